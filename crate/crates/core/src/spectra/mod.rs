//! Eigensolvers, ground manifolds and thermal ensembles.
//!
//! A Hamiltonian on a basis is split into independent blocks (single
//! `(N↑, N↓)` sectors, or fixed N↑ − N↓ towers for the field Hamiltonian).
//! Blocks up to `dense_threshold` are diagonalized densely, larger ones with
//! the Lanczos solver in [`lanczos`].

pub mod dense;
pub mod lanczos;
mod thermal;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

pub use dense::{dense_spectrum, DenseSpectrum, EigenVectors};
pub use lanczos::{Eigenpair, KrylovOptions};
pub use thermal::{thermal_expectation, ThermalEnsemble, ThermalState};

use crate::error::{Error, Result};
use crate::fockspace::{Basis, SectorKey, SparseOperator, StateVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Blocks of at most this dimension are diagonalized densely.
    pub dense_threshold: usize,
    pub krylov: KrylovOptions,
    /// Relative degeneracy window: levels within `degeneracy · (1 + |E₀|)`
    /// of the lowest one form the ground manifold.
    pub degeneracy: f64,
    /// Thermal ensembles refuse lattices above this many sites...
    pub thermal_site_limit: usize,
    /// ...unless this is set.
    pub allow_large: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            dense_threshold: 4096,
            krylov: KrylovOptions::default(),
            degeneracy: 1e-8,
            thermal_site_limit: 8,
            allow_large: false,
        }
    }
}

impl SolverOptions {
    pub fn degeneracy_window(&self, e0: f64) -> f64 {
        self.degeneracy * (1.0 + e0.abs())
    }
}

/// How a Hamiltonian's basis splits into invariant blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Partition {
    /// One block per `(N↑, N↓)` sector.
    Sectors,
    /// One block per value of N↑ − N↓.
    Towers,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BlockLabel {
    Sector(SectorKey),
    Tower(i64),
}

impl fmt::Display for BlockLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockLabel::Sector(k) => write!(f, "sector{k}"),
            BlockLabel::Tower(m) => write!(f, "tower({m})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Block {
    pub label: BlockLabel,
    pub basis: Arc<Basis>,
}

pub fn blocks(basis: &Arc<Basis>, partition: Partition) -> Result<Vec<Block>> {
    let l = basis.num_sites();
    let mut groups: BTreeMap<BlockLabel, Vec<SectorKey>> = BTreeMap::new();
    for key in basis.keys() {
        let label = match partition {
            Partition::Sectors => BlockLabel::Sector(key),
            Partition::Towers => BlockLabel::Tower(key.tower()),
        };
        groups.entry(label).or_default().push(key);
    }
    if groups.len() == 1 {
        let (label, _) = groups.into_iter().next().expect("one group");
        return Ok(vec![Block {
            label,
            basis: basis.clone(),
        }]);
    }
    groups
        .into_iter()
        .map(|(label, keys)| {
            Ok(Block {
                label,
                basis: Arc::new(Basis::from_keys(l, keys)?),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    Dense,
    Krylov,
}

/// Lowest levels of one block.
#[derive(Clone, Debug)]
pub struct BlockLevels {
    pub label: BlockLabel,
    pub basis: Arc<Basis>,
    /// Ascending; may hold more values than vectors.
    pub values: Vec<f64>,
    /// Eigenvectors of the first `vectors.len()` values.
    pub vectors: Vec<Vec<Complex64>>,
    /// Whether `values` is the complete spectrum of the block.
    pub complete: bool,
    pub method: Method,
}

fn check_hermitian(h: &SparseOperator) -> Result<()> {
    let scale = h.max_abs().max(1.0);
    if !h.is_hermitian(1e-12 * scale) {
        return Err(Error::BasisMismatch(
            "eigenproblem of a non-Hermitian operator".into(),
        ));
    }
    Ok(())
}

/// The `count` lowest eigenpairs of a Hermitian operator on its own basis.
pub fn lowest_levels(
    h: &SparseOperator,
    label: BlockLabel,
    count: usize,
    opts: &SolverOptions,
) -> Result<BlockLevels> {
    let dim = h.nrows();
    let basis = h.domain().clone();
    if dim == 0 {
        return Ok(BlockLevels {
            label,
            basis,
            values: Vec::new(),
            vectors: Vec::new(),
            complete: true,
            method: Method::Dense,
        });
    }
    if dim <= opts.dense_threshold {
        let spec = dense_spectrum(h)?;
        let vectors = (0..count.min(dim))
            .map(|j| spec.vectors.column(j))
            .collect();
        Ok(BlockLevels {
            label,
            basis,
            values: spec.values,
            vectors,
            complete: true,
            method: Method::Dense,
        })
    } else {
        let pairs = lanczos::lowest_eigenpairs(|x| h.apply_adjoint(x), dim, count, &opts.krylov)?;
        Ok(BlockLevels {
            label,
            basis,
            values: pairs.iter().map(|p| p.value).collect(),
            vectors: pairs.into_iter().map(|p| p.vector).collect(),
            complete: count >= dim,
            method: Method::Krylov,
        })
    }
}

/// The (near-)degenerate lowest eigenspace of a Hamiltonian.
#[derive(Clone, Debug)]
pub struct GroundManifold {
    pub basis: Arc<Basis>,
    /// Lowest energy E₀.
    pub energy: f64,
    /// Energies of the manifold members, all within `tolerance` of E₀.
    pub energies: Vec<f64>,
    /// Orthonormal members, written in `basis`.
    pub states: Vec<StateVector>,
    /// Block of each member.
    pub labels: Vec<BlockLabel>,
    /// Degeneracy window ε.
    pub tolerance: f64,
    /// Distance from E₀ to the lowest computed level outside the manifold.
    pub gap: Option<f64>,
    /// Lowest energy of every block.
    pub block_minima: Vec<(BlockLabel, f64)>,
}

impl GroundManifold {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Equal-weight average (1/d) Σ_i ⟨Φ_i, A Φ_i⟩, the zero-temperature
    /// limit of the thermal expectation.
    pub fn expectation(&self, op: &SparseOperator) -> Result<Complex64> {
        let mut total = Complex64::new(0.0, 0.0);
        for s in &self.states {
            total += s.expectation(op)?;
        }
        Ok(total / self.dim() as f64)
    }

    /// Ground-state energy of one block.
    pub fn block_minimum(&self, label: BlockLabel) -> Option<f64> {
        self.block_minima
            .iter()
            .find(|(l, _)| *l == label)
            .map(|&(_, e)| e)
    }
}

fn assemble_manifold(
    basis: &Arc<Basis>,
    levels: &[BlockLevels],
    opts: &SolverOptions,
) -> Result<GroundManifold> {
    let block_minima: Vec<(BlockLabel, f64)> = levels
        .iter()
        .filter(|b| !b.values.is_empty())
        .map(|b| (b.label, b.values[0]))
        .collect();
    let energy = block_minima
        .iter()
        .map(|&(_, e)| e)
        .fold(f64::INFINITY, f64::min);
    if !energy.is_finite() {
        return Err(Error::BasisMismatch(
            "ground state of an empty basis".into(),
        ));
    }
    let tolerance = opts.degeneracy_window(energy);
    let mut states = Vec::new();
    let mut energies = Vec::new();
    let mut labels = Vec::new();
    let mut gap: Option<f64> = None;
    for b in levels {
        for (k, &e) in b.values.iter().enumerate() {
            if e - energy <= tolerance {
                if k < b.vectors.len() {
                    let s = StateVector::new(b.basis.clone(), b.vectors[k].clone())?;
                    states.push(s.embed(basis)?);
                    energies.push(e);
                    labels.push(b.label);
                }
            } else {
                gap = Some(gap.map_or(e - energy, |g: f64| g.min(e - energy)));
                break;
            }
        }
    }
    Ok(GroundManifold {
        basis: basis.clone(),
        energy,
        energies,
        states,
        labels,
        tolerance,
        gap,
        block_minima,
    })
}

fn restricted_blocks(
    h: &SparseOperator,
    partition: Partition,
) -> Result<Vec<(Block, SparseOperator)>> {
    let basis = h.domain().clone();
    blocks(&basis, partition)?
        .into_iter()
        .map(|b| {
            let hb = if Arc::ptr_eq(&b.basis, &basis) {
                h.clone()
            } else {
                h.restrict(&b.basis, &b.basis)?
            };
            Ok((b, hb))
        })
        .collect()
}

/// The `count` lowest levels of every block, merged into the manifold of
/// computed states within the degeneracy window of the overall minimum.
pub fn ground_state(
    h: &SparseOperator,
    partition: Partition,
    count: usize,
    opts: &SolverOptions,
) -> Result<GroundManifold> {
    check_hermitian(h)?;
    let parts = restricted_blocks(h, partition)?;
    let levels = parts
        .par_iter()
        .map(|(b, hb)| lowest_levels(hb, b.label, count.max(1), opts))
        .collect::<Result<Vec<_>>>()?;
    assemble_manifold(h.domain(), &levels, opts)
}

/// The complete ground manifold: blocks whose lowest computed levels all
/// fall inside the degeneracy window are re-solved with more levels until a
/// level outside the window is found or the block is exhausted.
pub fn global_ground_manifold(
    h: &SparseOperator,
    partition: Partition,
    opts: &SolverOptions,
) -> Result<GroundManifold> {
    check_hermitian(h)?;
    let parts = restricted_blocks(h, partition)?;
    let mut counts = vec![2usize; parts.len()];
    let mut levels = parts
        .par_iter()
        .map(|(b, hb)| lowest_levels(hb, b.label, 2, opts))
        .collect::<Result<Vec<_>>>()?;
    loop {
        let e0 = levels
            .iter()
            .filter_map(|b| b.values.first().copied())
            .fold(f64::INFINITY, f64::min);
        let window = opts.degeneracy_window(e0);
        let pending: Vec<usize> = levels
            .iter()
            .enumerate()
            .filter(|(_, b)| {
                let inside = b.values.iter().filter(|&&e| e - e0 <= window).count();
                let unresolved = inside == b.values.len() && b.values.len() < b.basis.dim();
                inside > 0 && (unresolved || inside > b.vectors.len())
            })
            .map(|(i, _)| i)
            .collect();
        if pending.is_empty() {
            break;
        }
        let refreshed = pending
            .par_iter()
            .map(|&i| {
                let inside = levels[i]
                    .values
                    .iter()
                    .filter(|&&e| e - e0 <= window)
                    .count();
                let want = (2 * counts[i]).max(inside + 1);
                lowest_levels(&parts[i].1, parts[i].0.label, want, opts).map(|lv| (i, want, lv))
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, want, lv) in refreshed {
            counts[i] = want;
            levels[i] = lv;
        }
    }
    assemble_manifold(h.domain(), &levels, opts)
}

/// Zero-temperature expectation over a ground manifold.
pub fn ground_expectation(op: &SparseOperator, manifold: &GroundManifold) -> Result<Complex64> {
    manifold.expectation(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::BasisRestriction;
    use crate::lattice::LatticeGraph;
    use crate::model::{build_hamiltonian, ModelParams};

    #[test]
    fn atomic_limit_dimer() {
        let g = LatticeGraph::chain(2, false).unwrap();
        let b = Arc::new(Basis::new(2, BasisRestriction::Full).unwrap());
        let h = build_hamiltonian(&g, &ModelParams::new(0.0, 4.0, 0.0), &b).unwrap();
        let m = global_ground_manifold(&h, Partition::Sectors, &SolverOptions::default()).unwrap();
        assert!((m.energy + 2.0).abs() < 1e-12);
        assert_eq!(m.dim(), 4);
    }

    #[test]
    fn krylov_agrees_with_dense() {
        let g = LatticeGraph::chain(6, true).unwrap();
        let b = Arc::new(Basis::sector(6, 3, 3).unwrap());
        let h = build_hamiltonian(&g, &ModelParams::new(1.0, 3.0, 0.0), &b).unwrap();
        let dense = ground_state(&h, Partition::Sectors, 1, &SolverOptions::default()).unwrap();
        let opts = SolverOptions {
            dense_threshold: 10,
            ..Default::default()
        };
        let krylov = ground_state(&h, Partition::Sectors, 1, &opts).unwrap();
        assert!((dense.energy - krylov.energy).abs() < 1e-9);
    }

    #[test]
    fn tower_blocks_group_sectors() {
        let b = Arc::new(Basis::new(2, BasisRestriction::Full).unwrap());
        let bl = blocks(&b, Partition::Towers).unwrap();
        assert_eq!(bl.len(), 5);
        assert_eq!(bl.iter().map(|x| x.basis.dim()).sum::<usize>(), 16);
    }
}
