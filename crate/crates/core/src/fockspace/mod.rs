//! Occupation-number bases and sparse fermionic operators.
//!
//! Creation operators on a basis word follow the Jordan–Wigner convention
//! c†_m |w⟩ = (−1)^{#occupied modes below m} |w + m⟩, with the canonical
//! state of a word being c†_{m₁}⋯c†_{mₖ}|0⟩ for m₁ < ⋯ < mₖ.

mod basis;
mod operator;
mod state;
mod terms;

use std::sync::Arc;

pub use basis::{
    counts, is_occupied, mode, Basis, BasisRestriction, Config, Parity, SectorBasis, SectorKey,
    Spin, MAX_SITES,
};
pub use operator::{natural_codomain, Closure, SparseOperator};
pub use state::StateVector;
pub use terms::{
    annihilation_term, creation_term, fermion_sign, hop_term, number_term, pair_annihilation_term,
    pair_creation_term, product, Ladder, Term,
};

use num_complex::Complex64;

use crate::error::Result;

/// c†_{x,σ} from `domain` into its natural codomain. On a sector where
/// species σ is already full the result is the empty operator, and a
/// warning is logged.
pub fn creation(site: usize, spin: Spin, domain: &Arc<Basis>) -> Result<SparseOperator> {
    let op = SparseOperator::from_terms_natural(
        domain,
        &[creation_term(site, spin, domain.num_sites())],
    )?;
    if op.is_empty() {
        log::warn!("creation operator on site {site} ({spin:?}) annihilates the whole domain");
    }
    Ok(op)
}

/// c_{x,σ} from `domain` into its natural codomain.
pub fn annihilation(site: usize, spin: Spin, domain: &Arc<Basis>) -> Result<SparseOperator> {
    SparseOperator::from_terms_natural(domain, &[annihilation_term(site, spin, domain.num_sites())])
}

/// n_{x,σ}, diagonal on any basis.
pub fn number_op(site: usize, spin: Spin, basis: &Arc<Basis>) -> SparseOperator {
    let l = basis.num_sites();
    SparseOperator::diagonal(basis, move |c| {
        Complex64::from(if is_occupied(c, site, spin, l) {
            1.0
        } else {
            0.0
        })
    })
}

/// Total particle number N = Σ_x (n_{x,↑} + n_{x,↓}).
pub fn total_number(basis: &Arc<Basis>) -> SparseOperator {
    SparseOperator::diagonal(basis, |c| Complex64::from(c.count_ones() as f64))
}
