//! Exact diagonalization toolkit for the attractive Hubbard model on finite
//! bipartite lattices.
//!
//! The crate builds occupation-number bases resolved by `(N↑, N↓)` sector,
//! assembles the Hamiltonian and its companion operators as sparse matrices,
//! and runs numerical certificates for the rigorous statements known for the
//! model: pairing positivity, the superconducting correlation bounds, the
//! parity-sector restriction, Lieb's ground-state structure, off-diagonal
//! long-range order on imbalanced lattices, the single-fermion gap and the
//! gapless eta-pairing dispersion.
//!
//! Modules, bottom-up:
//!
//! - [`lattice`]: bipartite graphs, sublattice signs, unit cells, inversions.
//! - [`fockspace`]: sector bases, ladder-operator products, sparse operators.
//! - [`model`]: Hamiltonian assembly and local decomposition.
//! - [`symmetry`]: Shiba, particle-hole, phase and site-permutation maps plus
//!   spin and eta operators.
//! - [`spectra`]: dense and Krylov eigensolvers, ground manifolds, thermal
//!   ensembles.
//! - [`observables`]: order parameters and verification checks.
//! - [`excitations`]: single-fermion gap and pairing-dispersion machinery.
//! - [`report`]: verification records shared by all checks.

pub mod error;
pub mod excitations;
pub mod fockspace;
pub mod lattice;
pub mod model;
pub mod observables;
pub mod report;
pub mod spectra;
pub mod symmetry;

pub use error::{Error, Result};
pub use num_complex::Complex64;
