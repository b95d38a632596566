//! Naive dense reference implementation for small systems.
//!
//! Modes are interleaved (2x for up, 2x+1 for down) and every annihilator
//! is an explicit Kronecker product σᶻ ⊗ ⋯ ⊗ σᶻ ⊗ a ⊗ 1 ⊗ ⋯ ⊗ 1. Nothing
//! here touches the library's Fock space, operators or solvers.

#![allow(dead_code)]

pub mod suite;

use nalgebra::DMatrix;

use hubbard_core::lattice::LatticeGraph;

pub type Mat = DMatrix<f64>;

fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    Mat::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub struct Oracle {
    pub sites: usize,
    pub dim: usize,
    /// Annihilators, indexed by interleaved mode.
    modes: Vec<Mat>,
}

impl Oracle {
    pub fn new(sites: usize) -> Self {
        assert!(
            sites <= 4,
            "the dense oracle is meant for at most four sites"
        );
        let m = 2 * sites;
        let id = Mat::identity(2, 2);
        let z = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        // basis (|0>, |1>), a|1> = |0>
        let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let modes = (0..m)
            .map(|k| {
                let mut op = Mat::identity(1, 1);
                for j in 0..m {
                    let f = if j < k {
                        &z
                    } else if j == k {
                        &a
                    } else {
                        &id
                    };
                    op = kron(&op, f);
                }
                op
            })
            .collect();
        Oracle {
            sites,
            dim: 1 << m,
            modes,
        }
    }

    pub fn c(&self, x: usize, down: bool) -> &Mat {
        &self.modes[2 * x + down as usize]
    }

    pub fn cdag(&self, x: usize, down: bool) -> Mat {
        self.c(x, down).transpose()
    }

    pub fn n(&self, x: usize, down: bool) -> Mat {
        self.cdag(x, down) * self.c(x, down)
    }

    pub fn id(&self) -> Mat {
        Mat::identity(self.dim, self.dim)
    }

    pub fn hamiltonian(&self, graph: &LatticeGraph, t: f64, u: f64, mu: f64) -> Mat {
        let mut h = Mat::zeros(self.dim, self.dim);
        for b in graph.bonds() {
            for s in [false, true] {
                let hop = self.cdag(b.origin, s) * self.c(b.target, s);
                h += (&hop + hop.transpose()) * (t * b.weight);
            }
        }
        let half = self.id() * 0.5;
        for x in 0..self.sites {
            h -= (self.n(x, false) - &half) * (self.n(x, true) - &half) * u;
            h += (self.n(x, false) + self.n(x, true)) * mu;
        }
        h
    }

    /// c†_{x↑} c†_{x↓} c_{y↓} c_{y↑}.
    pub fn pair_hop(&self, x: usize, y: usize) -> Mat {
        self.cdag(x, false) * self.cdag(x, true) * self.c(y, true) * self.c(y, false)
    }

    /// (1/|Λ|) Σ_x c_{x↓} c_{x↑}.
    pub fn o_super(&self) -> Mat {
        let mut o = Mat::zeros(self.dim, self.dim);
        for x in 0..self.sites {
            o += self.c(x, true) * self.c(x, false);
        }
        o / self.sites as f64
    }

    pub fn total_spin_squared(&self) -> Mat {
        let mut sp = Mat::zeros(self.dim, self.dim);
        let mut sz = Mat::zeros(self.dim, self.dim);
        for x in 0..self.sites {
            sp += self.cdag(x, false) * self.c(x, true);
            sz += (self.n(x, false) - self.n(x, true)) * 0.5;
        }
        let sm = sp.transpose();
        (&sp * &sm + &sm * &sp) * 0.5 + &sz * &sz
    }

    /// Diagonal entry of basis state `i`: (N↑, N↓).
    pub fn counts(&self, i: usize) -> (usize, usize) {
        let m = 2 * self.sites;
        let mut up = 0;
        let mut down = 0;
        for k in 0..m {
            // mode k is the k-th tensor factor from the left
            if (i >> (m - 1 - k)) & 1 == 1 {
                if k % 2 == 0 {
                    up += 1;
                } else {
                    down += 1;
                }
            }
        }
        (up, down)
    }

    /// Principal submatrix on basis states accepted by `keep`.
    pub fn restrict(&self, a: &Mat, keep: impl Fn(usize, usize) -> bool) -> (Mat, Vec<usize>) {
        let idx: Vec<usize> = (0..self.dim)
            .filter(|&i| {
                let (u, d) = self.counts(i);
                keep(u, d)
            })
            .collect();
        let sub = Mat::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])]);
        (sub, idx)
    }
}

/// Cyclic Jacobi eigen-decomposition of a real symmetric matrix, ascending.
pub fn jacobi_eigh(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = Mat::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() < 1e-14 * (1.0 + a.norm()) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Gibbs state of a dense Hamiltonian.
pub struct Gibbs {
    values: Vec<f64>,
    vectors: Mat,
}

impl Gibbs {
    pub fn new(h: &Mat) -> Self {
        let (values, vectors) = jacobi_eigh(h);
        Gibbs { values, vectors }
    }

    pub fn ground_energy(&self) -> f64 {
        self.values[0]
    }

    pub fn expectation(&self, a: &Mat, beta: f64) -> f64 {
        let e0 = self.values[0];
        let mut num = 0.0;
        let mut z = 0.0;
        for (k, &e) in self.values.iter().enumerate() {
            let w = (-beta * (e - e0)).exp();
            let v = self.vectors.column(k);
            num += w * (v.transpose() * a * v)[(0, 0)];
            z += w;
        }
        num / z
    }

    /// Average of ⟨v, A v⟩ over the eigenvectors within `window` of the
    /// lowest level.
    pub fn ground_average(&self, a: &Mat, window: f64) -> (f64, usize) {
        let e0 = self.values[0];
        let members: Vec<usize> = (0..self.values.len())
            .filter(|&k| self.values[k] - e0 <= window)
            .collect();
        let total: f64 = members
            .iter()
            .map(|&k| {
                let v = self.vectors.column(k);
                (v.transpose() * a * v)[(0, 0)]
            })
            .sum();
        (total / members.len() as f64, members.len())
    }
}
