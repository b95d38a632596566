use std::sync::Arc;

use num_complex::Complex64;

use super::basis::Basis;
use super::operator::{same_basis, SparseOperator};
use crate::error::{Error, Result};

/// A vector in the span of a basis.
#[derive(Clone, Debug)]
pub struct StateVector {
    basis: Arc<Basis>,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(basis: Arc<Basis>, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::BasisMismatch(format!(
                "{} amplitudes for a basis of dimension {}",
                amps.len(),
                basis.dim()
            )));
        }
        Ok(StateVector { basis, amps })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
        self
    }

    /// ⟨self, other⟩, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if !same_basis(&self.basis, &other.basis) {
            return Err(Error::BasisMismatch("inner product across bases".into()));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// A·self, living in the operator's codomain.
    pub fn apply(&self, op: &SparseOperator) -> Result<StateVector> {
        if !same_basis(op.domain(), &self.basis) {
            return Err(Error::BasisMismatch(
                "operator domain differs from the state's basis".into(),
            ));
        }
        Ok(StateVector {
            basis: op.codomain().clone(),
            amps: op.apply(&self.amps),
        })
    }

    /// ⟨self, A self⟩.
    pub fn expectation(&self, op: &SparseOperator) -> Result<Complex64> {
        if !op.is_square() {
            return Err(Error::BasisMismatch(
                "expectation of an operator that changes the basis".into(),
            ));
        }
        self.inner(&self.apply(op)?)
    }

    /// The same vector written in a larger basis; fails if a configuration
    /// with nonzero amplitude is missing from the target.
    pub fn embed(&self, target: &Arc<Basis>) -> Result<StateVector> {
        if same_basis(target, &self.basis) {
            return Ok(self.clone());
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); target.dim()];
        for (j, &a) in self.amps.iter().enumerate() {
            let config = self.basis.config(j);
            match target.index_of(config) {
                Some(i) => amps[i] = a,
                None if a == Complex64::new(0.0, 0.0) => {}
                None => {
                    return Err(Error::BasisMismatch(format!(
                        "configuration {config:#b} missing from the target basis"
                    )))
                }
            }
        }
        Ok(StateVector {
            basis: target.clone(),
            amps,
        })
    }

    pub fn scaled(&self, factor: Complex64) -> StateVector {
        StateVector {
            basis: self.basis.clone(),
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn add_scaled(&self, other: &StateVector, factor: Complex64) -> Result<StateVector> {
        if !same_basis(&self.basis, &other.basis) {
            return Err(Error::BasisMismatch("sum of states across bases".into()));
        }
        Ok(StateVector {
            basis: self.basis.clone(),
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a + factor * b)
                .collect(),
        })
    }
}
