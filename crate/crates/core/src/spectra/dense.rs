use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::SparseOperator;

/// Eigenvectors as matrix columns, kept real when the operator is real.
#[derive(Clone, Debug)]
pub enum EigenVectors {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

impl EigenVectors {
    pub fn ncols(&self) -> usize {
        match self {
            EigenVectors::Real(m) => m.ncols(),
            EigenVectors::Complex(m) => m.ncols(),
        }
    }

    pub fn nrows(&self) -> usize {
        match self {
            EigenVectors::Real(m) => m.nrows(),
            EigenVectors::Complex(m) => m.nrows(),
        }
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        match self {
            EigenVectors::Real(m) => m.column(j).iter().map(|&v| Complex64::from(v)).collect(),
            EigenVectors::Complex(m) => m.column(j).iter().copied().collect(),
        }
    }
}

/// Complete spectrum of a Hermitian block, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct DenseSpectrum {
    pub values: Vec<f64>,
    pub vectors: EigenVectors,
}

fn ascending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

pub fn dense_spectrum(op: &SparseOperator) -> Result<DenseSpectrum> {
    if !op.is_square() {
        return Err(Error::BasisMismatch(
            "eigenproblem of a non-square operator".into(),
        ));
    }
    let n = op.nrows();
    if op.is_real(0.0) {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (i, j, v) in op.entries() {
            m[(i, j)] = v.re;
        }
        let eig = SymmetricEigen::new(m);
        let order = ascending(eig.eigenvalues.as_slice());
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(DenseSpectrum {
            values,
            vectors: EigenVectors::Real(vectors),
        })
    } else {
        let eig = SymmetricEigen::new(op.to_dense());
        let order = ascending(eig.eigenvalues.as_slice());
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(DenseSpectrum {
            values,
            vectors: EigenVectors::Complex(vectors),
        })
    }
}
