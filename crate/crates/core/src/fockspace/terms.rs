use num_complex::Complex64;

use super::basis::{mode, Config, Spin};

/// A single fermionic ladder operator acting on a mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

impl Ladder {
    pub fn create(site: usize, spin: Spin, num_sites: usize) -> Ladder {
        Ladder::Create(mode(site, spin, num_sites))
    }

    pub fn annihilate(site: usize, spin: Spin, num_sites: usize) -> Ladder {
        Ladder::Annihilate(mode(site, spin, num_sites))
    }

    pub fn adjoint(self) -> Ladder {
        match self {
            Ladder::Create(m) => Ladder::Annihilate(m),
            Ladder::Annihilate(m) => Ladder::Create(m),
        }
    }

    pub fn mode(self) -> usize {
        match self {
            Ladder::Create(m) | Ladder::Annihilate(m) => m,
        }
    }

    /// Acts on a basis word; `None` when the result vanishes.
    #[inline]
    pub fn apply(self, config: Config) -> Option<(Config, f64)> {
        let (m, create) = match self {
            Ladder::Create(m) => (m, true),
            Ladder::Annihilate(m) => (m, false),
        };
        let bit = 1u64 << m;
        if (config & bit != 0) == create {
            return None;
        }
        Some((config ^ bit, fermion_sign(config, m)))
    }
}

/// (−1) to the number of occupied modes below `m`.
#[inline]
pub fn fermion_sign(config: Config, m: usize) -> f64 {
    if (config & ((1u64 << m) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `coeff · L₁ L₂ … Lₖ`, written left to right and applied right to left. An
/// empty product is the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub ops: Vec<Ladder>,
}

impl Term {
    pub fn new(coeff: impl Into<Complex64>, ops: Vec<Ladder>) -> Self {
        Term {
            coeff: coeff.into(),
            ops,
        }
    }

    pub fn identity(coeff: impl Into<Complex64>) -> Self {
        Term::new(coeff, Vec::new())
    }

    #[inline]
    pub fn apply(&self, config: Config) -> Option<(Config, Complex64)> {
        let mut c = config;
        let mut sign = 1.0;
        for op in self.ops.iter().rev() {
            let (next, s) = op.apply(c)?;
            c = next;
            sign *= s;
        }
        Some((c, self.coeff * sign))
    }

    /// Change of `(N↑, N↓)` produced by the term.
    pub fn shift(&self, num_sites: usize) -> (i64, i64) {
        let mut d = (0, 0);
        for op in &self.ops {
            let (m, s) = match op {
                Ladder::Create(m) => (*m, 1),
                Ladder::Annihilate(m) => (*m, -1),
            };
            if m < num_sites {
                d.0 += s;
            } else {
                d.1 += s;
            }
        }
        d
    }

    pub fn adjoint(&self) -> Term {
        Term {
            coeff: self.coeff.conj(),
            ops: self.ops.iter().rev().map(|l| l.adjoint()).collect(),
        }
    }

    pub fn scaled(mut self, factor: impl Into<Complex64>) -> Term {
        self.coeff *= factor.into();
        self
    }
}

/// Product of two terms, `a · b`.
pub fn product(a: &Term, b: &Term) -> Term {
    let mut ops = a.ops.clone();
    ops.extend_from_slice(&b.ops);
    Term {
        coeff: a.coeff * b.coeff,
        ops,
    }
}

/// c†_{x,σ}.
pub fn creation_term(site: usize, spin: Spin, num_sites: usize) -> Term {
    Term::new(1.0, vec![Ladder::create(site, spin, num_sites)])
}

/// c_{x,σ}.
pub fn annihilation_term(site: usize, spin: Spin, num_sites: usize) -> Term {
    Term::new(1.0, vec![Ladder::annihilate(site, spin, num_sites)])
}

/// n_{x,σ} = c†_{x,σ} c_{x,σ}.
pub fn number_term(site: usize, spin: Spin, num_sites: usize) -> Term {
    Term::new(
        1.0,
        vec![
            Ladder::create(site, spin, num_sites),
            Ladder::annihilate(site, spin, num_sites),
        ],
    )
}

/// c†_{x,σ} c_{y,σ}.
pub fn hop_term(x: usize, y: usize, spin: Spin, num_sites: usize, coeff: f64) -> Term {
    Term::new(
        coeff,
        vec![
            Ladder::create(x, spin, num_sites),
            Ladder::annihilate(y, spin, num_sites),
        ],
    )
}

/// c†_{x,↑} c†_{x,↓}.
pub fn pair_creation_term(site: usize, num_sites: usize) -> Term {
    Term::new(
        1.0,
        vec![
            Ladder::create(site, Spin::Up, num_sites),
            Ladder::create(site, Spin::Down, num_sites),
        ],
    )
}

/// c_{x,↓} c_{x,↑}.
pub fn pair_annihilation_term(site: usize, num_sites: usize) -> Term {
    pair_creation_term(site, num_sites).adjoint()
}
