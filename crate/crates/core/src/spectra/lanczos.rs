//! Restarted Lanczos with full reorthogonalization and locking.
//!
//! Eigenpairs are found one at a time. Each search runs in the orthogonal
//! complement of the pairs already locked, so a degenerate level is picked
//! up once per independent eigenvector instead of collapsing into one.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const PAR_MIN: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOptions {
    /// Largest Krylov subspace per pass.
    pub max_krylov: usize,
    /// Passes before giving up on one eigenpair.
    pub max_restarts: usize,
    /// Required residual ‖Hv − λv‖ of every returned pair.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            max_krylov: 120,
            max_restarts: 60,
            tolerance: 1e-10,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
}

// Parallel reductions go through fixed-size chunks combined in order, so
// results do not depend on thread scheduling.
fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    if a.len() >= PAR_MIN {
        a.par_chunks(1024)
            .zip(b.par_chunks(1024))
            .map(|(x, y)| {
                x.iter()
                    .zip(y)
                    .map(|(p, q)| p.conj() * q)
                    .sum::<Complex64>()
            })
            .collect::<Vec<_>>()
            .into_iter()
            .sum()
    } else {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }
}

fn norm(a: &[Complex64]) -> f64 {
    dot(a, a).re.sqrt()
}

fn scale(a: &mut [Complex64], f: f64) {
    a.iter_mut().for_each(|x| *x *= f);
}

/// Two rounds of classical Gram–Schmidt against every vector in `sets`.
fn orthogonalize(w: &mut [Complex64], sets: &[&[Vec<Complex64>]]) {
    let basis: Vec<&Vec<Complex64>> = sets.iter().flat_map(|s| s.iter()).collect();
    if basis.is_empty() {
        return;
    }
    for _ in 0..2 {
        let coeffs: Vec<Complex64> = basis.par_iter().map(|u| dot(u, w)).collect();
        let n = w.len();
        let update = |start: usize, chunk: &mut [Complex64]| {
            for (u, &c) in basis.iter().zip(&coeffs) {
                if c == ZERO {
                    continue;
                }
                for (k, x) in chunk.iter_mut().enumerate() {
                    *x -= c * u[start + k];
                }
            }
        };
        if n >= PAR_MIN {
            w.par_chunks_mut(1024)
                .enumerate()
                .for_each(|(ci, chunk)| update(ci * 1024, chunk));
        } else {
            update(0, w);
        }
    }
}

/// Rayleigh quotient of a unit vector and its residual ‖Hv − λv‖.
fn rayleigh<F>(apply: &F, v: &[Complex64]) -> (f64, f64)
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let hv = apply(v);
    let value = dot(v, &hv).re;
    let r: Vec<Complex64> = hv.iter().zip(v).map(|(a, b)| a - b * value).collect();
    (value, norm(&r))
}

struct PassResult {
    vector: Vec<Complex64>,
    /// The Krylov space became invariant.
    exhausted: bool,
}

fn lowest_ritz(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let m = alphas.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let k = eig.eigenvalues.imin();
    (
        eig.eigenvalues[k],
        eig.eigenvectors.column(k).iter().copied().collect(),
    )
}

fn lanczos_pass<F>(
    apply: &F,
    start: Vec<Complex64>,
    locked: &[Vec<Complex64>],
    max_krylov: usize,
    tolerance: f64,
) -> PassResult
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let mut v: Vec<Vec<Complex64>> = vec![start];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut exhausted = false;
    loop {
        let j = v.len() - 1;
        let mut w = apply(&v[j]);
        let alpha = dot(&v[j], &w).re;
        alphas.push(alpha);
        orthogonalize(&mut w, &[locked, &v]);
        let beta = norm(&w);
        let scale_ref = alphas.iter().fold(1.0f64, |m, a| m.max(a.abs()));
        if beta <= 1e-13 * scale_ref {
            exhausted = true;
            break;
        }
        if v.len() >= max_krylov {
            break;
        }
        if alphas.len().is_multiple_of(10) {
            let (_, y) = lowest_ritz(&alphas, &betas);
            if beta * y[y.len() - 1].abs() < 0.05 * tolerance {
                break;
            }
        }
        scale(&mut w, 1.0 / beta);
        betas.push(beta);
        v.push(w);
    }
    let (_, y) = lowest_ritz(&alphas, &betas);
    let n = v[0].len();
    let mut ritz = vec![ZERO; n];
    for (vk, &yk) in v.iter().zip(&y) {
        for (r, x) in ritz.iter_mut().zip(vk) {
            *r += x * yk;
        }
    }
    orthogonalize(&mut ritz, &[locked]);
    let nr = norm(&ritz);
    scale(&mut ritz, 1.0 / nr);
    PassResult {
        vector: ritz,
        exhausted,
    }
}

fn random_start(dim: usize, seed: u64, locked: &[Vec<Complex64>]) -> Option<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..8 {
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::from(rng.gen_range(-1.0..1.0)))
            .collect();
        orthogonalize(&mut v, &[locked]);
        let n = norm(&v);
        if n > 1e-8 {
            scale(&mut v, 1.0 / n);
            return Some(v);
        }
    }
    None
}

/// The lowest eigenpair of a Hermitian map restricted to the orthogonal
/// complement of `locked`.
fn lowest_in_complement<F>(
    apply: &F,
    dim: usize,
    locked: &[Vec<Complex64>],
    opts: &KrylovOptions,
    seed: u64,
) -> Result<Eigenpair>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let mut start = random_start(dim, seed, locked).ok_or(Error::NonConvergence {
        iterations: 0,
        residual: f64::INFINITY,
    })?;
    let mut best = f64::INFINITY;
    for pass in 0..opts.max_restarts {
        let result = lanczos_pass(apply, start, locked, opts.max_krylov, opts.tolerance);
        let (value, r) = rayleigh(apply, &result.vector);
        best = best.min(r);
        if r <= opts.tolerance {
            return Ok(Eigenpair {
                value,
                vector: result.vector,
                residual: r,
            });
        }
        log::debug!(
            "Lanczos pass {pass}: value {value:.15} residual {r:.3e}{}",
            if result.exhausted {
                " (invariant subspace)"
            } else {
                ""
            }
        );
        start = result.vector;
    }
    Err(Error::NonConvergence {
        iterations: opts.max_restarts * opts.max_krylov,
        residual: best,
    })
}

/// The `count` lowest eigenpairs of the Hermitian map `apply` on a space of
/// dimension `dim`, in ascending order.
pub fn lowest_eigenpairs<F>(
    apply: F,
    dim: usize,
    count: usize,
    opts: &KrylovOptions,
) -> Result<Vec<Eigenpair>>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let count = count.min(dim);
    let mut pairs: Vec<Eigenpair> = Vec::with_capacity(count);
    let mut locked: Vec<Vec<Complex64>> = Vec::with_capacity(count);
    while pairs.len() < count {
        let seed = opts.seed.wrapping_add(pairs.len() as u64);
        let pair = lowest_in_complement(&apply, dim, &locked, opts, seed)?;
        locked.push(pair.vector.clone());
        pairs.push(pair);
    }
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(pairs)
}
