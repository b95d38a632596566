use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::dense::{dense_spectrum, DenseSpectrum};
use super::{check_hermitian, SolverOptions};
use crate::error::{Error, Result};
use crate::fockspace::{Basis, BasisRestriction, SectorKey, SparseOperator};

struct SectorSpectrum {
    key: SectorKey,
    range: Range<usize>,
    spectrum: DenseSpectrum,
}

/// Complete per-sector spectra of a number-conserving Hamiltonian, from
/// which Gibbs expectations at any β follow.
pub struct ThermalEnsemble {
    basis: Arc<Basis>,
    sectors: Vec<SectorSpectrum>,
    e_min: f64,
}

impl ThermalEnsemble {
    pub fn new(h: &SparseOperator, opts: &SolverOptions) -> Result<Self> {
        let basis = h.domain().clone();
        let sites = basis.num_sites();
        if sites > opts.thermal_site_limit && !opts.allow_large {
            return Err(Error::SizeGuard {
                sites,
                limit: opts.thermal_site_limit,
            });
        }
        check_hermitian(h)?;
        let sectors = (0..basis.sectors().len())
            .into_par_iter()
            .map(|i| {
                let key = basis.sectors()[i].key();
                let range = basis.sector_range(i);
                let block = if basis.sectors().len() == 1 {
                    h.clone()
                } else {
                    let sb = Arc::new(Basis::from_keys(sites, vec![key])?);
                    h.restrict(&sb, &sb)?
                };
                Ok(SectorSpectrum {
                    key,
                    range,
                    spectrum: dense_spectrum(&block)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let e_min = sectors
            .iter()
            .filter_map(|s| s.spectrum.values.first().copied())
            .fold(f64::INFINITY, f64::min);
        Ok(ThermalEnsemble {
            basis,
            sectors,
            e_min,
        })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    /// Lowest eigenvalue; Boltzmann weights are taken relative to it.
    pub fn min_energy(&self) -> f64 {
        self.e_min
    }

    /// Every eigenvalue with its sector, sector by sector.
    pub fn levels(&self) -> Vec<(SectorKey, f64)> {
        self.sectors
            .iter()
            .flat_map(|s| s.spectrum.values.iter().map(move |&e| (s.key, e)))
            .collect()
    }

    pub fn at(&self, beta: f64) -> ThermalState<'_> {
        let weights: Vec<Vec<f64>> = self
            .sectors
            .iter()
            .map(|s| {
                s.spectrum
                    .values
                    .iter()
                    .map(|&e| (-beta * (e - self.e_min)).exp())
                    .collect()
            })
            .collect();
        ThermalState {
            ensemble: self,
            beta,
            weights,
        }
    }
}

/// Gibbs state e^{−βH}/Z of an ensemble at one inverse temperature.
pub struct ThermalState<'a> {
    ensemble: &'a ThermalEnsemble,
    beta: f64,
    weights: Vec<Vec<f64>>,
}

impl ThermalState<'_> {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.ensemble.basis
    }

    /// Σ_i e^{−β(E_i − E_min)} ⟨v_i, A v_i⟩ over the eigenvectors of one
    /// sector; `None` stands for the identity.
    fn sector_trace(&self, s: usize, op: Option<&SparseOperator>) -> Complex64 {
        let sec = &self.ensemble.sectors[s];
        let w = &self.weights[s];
        let Some(op) = op else {
            return Complex64::from(w.iter().sum::<f64>());
        };
        let start = sec.range.start;
        let mut block: Vec<(usize, usize, Complex64)> = Vec::new();
        for j in sec.range.clone() {
            for (i, v) in op.column(j) {
                if sec.range.contains(&i) {
                    block.push((i - start, j - start, v));
                }
            }
        }
        if block.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let mut total = Complex64::new(0.0, 0.0);
        for (k, &wk) in w.iter().enumerate() {
            if wk == 0.0 {
                continue;
            }
            let v = sec.spectrum.vectors.column(k);
            let quad: Complex64 = block.iter().map(|&(i, j, a)| v[i].conj() * a * v[j]).sum();
            total += wk * quad;
        }
        total
    }

    fn check_op(&self, op: &SparseOperator) -> Result<()> {
        if !op.is_square() || **op.domain() != *self.ensemble.basis {
            return Err(Error::BasisMismatch(
                "thermal expectation of an operator on another basis".into(),
            ));
        }
        Ok(())
    }

    /// Tr_filter(A e^{−β(H − E_min)}) summed over the sectors accepted by
    /// `filter`; `None` stands for the identity.
    pub fn restricted_trace<F>(&self, op: Option<&SparseOperator>, filter: F) -> Result<Complex64>
    where
        F: Fn(SectorKey) -> bool + Sync,
    {
        if let Some(op) = op {
            self.check_op(op)?;
        }
        let parts: Vec<Complex64> = (0..self.ensemble.sectors.len())
            .into_par_iter()
            .map(|s| {
                if filter(self.ensemble.sectors[s].key) {
                    self.sector_trace(s, op)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Ok(parts.into_iter().sum())
    }

    /// Shifted partition function Tr e^{−β(H − E_min)}.
    pub fn partition_function(&self) -> f64 {
        self.weights.iter().flatten().sum()
    }

    /// ⟨A⟩ = Tr(A e^{−βH}) / Tr e^{−βH}.
    pub fn expectation(&self, op: &SparseOperator) -> Result<Complex64> {
        Ok(self.restricted_trace(Some(op), |_| true)? / self.partition_function())
    }

    /// Expectation in the ensemble restricted to the sectors of
    /// `restriction`, normalized by the restricted partition function.
    pub fn expectation_in(
        &self,
        op: &SparseOperator,
        restriction: BasisRestriction,
    ) -> Result<Complex64> {
        let num = self.restricted_trace(Some(op), |k| restriction.contains(k))?;
        let den = self.restricted_trace(None, |k| restriction.contains(k))?;
        Ok(num / den.re)
    }
}

/// ⟨A⟩_β over the sectors of `restriction` for a Hamiltonian ensemble.
pub fn thermal_expectation(
    ensemble: &ThermalEnsemble,
    op: &SparseOperator,
    beta: f64,
    restriction: BasisRestriction,
) -> Result<Complex64> {
    ensemble.at(beta).expectation_in(op, restriction)
}
