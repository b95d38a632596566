use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice is not bipartite: {0}")]
    NotBipartite(String),

    #[error("lattice is not connected through nonzero hopping")]
    Disconnected,

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("lattice has an odd number of sites ({0})")]
    OddSiteCount(usize),

    #[error("symmetry error: {0}")]
    Symmetry(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("basis restriction is not closed under the operator: {0}")]
    NotClosed(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("size guard exceeded: {sites} sites > limit {limit} (set the override to proceed)")]
    SizeGuard { sites: usize, limit: usize },

    #[error(
        "eigensolver did not converge after {iterations} iterations (best residual {residual:.3e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("hypothesis unmet: {0}")]
    HypothesisUnmet(String),

    #[error("non-commensurate wave vector: {0}")]
    Incommensurate(String),
}
