use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::basis::{Basis, Config};
use super::terms::Term;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// What to do when an operator maps a domain state outside its codomain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Closure {
    /// Report the restriction as not closed.
    Strict,
    /// Drop the outgoing amplitude (projection onto the codomain).
    Project,
}

/// Complex sparse matrix from `domain` to `codomain`, stored column-major
/// with sorted, coalesced row indices and no explicit zeros.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    domain: Arc<Basis>,
    codomain: Arc<Basis>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<Complex64>,
}

pub(crate) fn same_basis(a: &Arc<Basis>, b: &Arc<Basis>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn coalesce(mut entries: Vec<(usize, Complex64)>) -> Vec<(usize, Complex64)> {
    entries.sort_unstable_by_key(|e| e.0);
    let mut out: Vec<(usize, Complex64)> = Vec::with_capacity(entries.len());
    for (r, v) in entries {
        match out.last_mut() {
            Some(last) if last.0 == r => last.1 += v,
            _ => out.push((r, v)),
        }
    }
    out.retain(|e| e.1 != ZERO);
    out
}

impl SparseOperator {
    fn from_column_lists(
        domain: Arc<Basis>,
        codomain: Arc<Basis>,
        columns: Vec<Vec<(usize, Complex64)>>,
    ) -> Self {
        let nnz = columns.iter().map(Vec::len).sum();
        let mut col_ptr = Vec::with_capacity(columns.len() + 1);
        let mut row_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        col_ptr.push(0);
        for col in columns {
            for (r, v) in col {
                row_idx.push(r);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        SparseOperator {
            domain,
            codomain,
            col_ptr,
            row_idx,
            values,
        }
    }

    /// Builds an operator column by column: `column(config, out)` pushes the
    /// `(config, amplitude)` pairs of the image of one domain basis state.
    pub fn from_columns<F>(
        domain: Arc<Basis>,
        codomain: Arc<Basis>,
        closure: Closure,
        column: F,
    ) -> Result<Self>
    where
        F: Fn(Config, &mut Vec<(Config, Complex64)>) + Sync,
    {
        let columns = (0..domain.dim())
            .into_par_iter()
            .map_init(Vec::new, |buf, j| {
                buf.clear();
                let config = domain.config(j);
                column(config, buf);
                let mut entries = Vec::with_capacity(buf.len());
                for &(c, v) in buf.iter() {
                    match codomain.index_of(c) {
                        Some(i) => entries.push((i, v)),
                        None if closure == Closure::Project => {}
                        None => {
                            return Err(Error::NotClosed(format!(
                                "configuration {c:#b} reached from {config:#b} lies outside the codomain"
                            )))
                        }
                    }
                }
                Ok(coalesce(entries))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_column_lists(domain, codomain, columns))
    }

    /// Σ of the given terms as a matrix from `domain` into `codomain`.
    pub fn from_terms(
        domain: &Arc<Basis>,
        codomain: &Arc<Basis>,
        terms: &[Term],
        closure: Closure,
    ) -> Result<Self> {
        Self::from_columns(domain.clone(), codomain.clone(), closure, |config, out| {
            for t in terms {
                if let Some((c, v)) = t.apply(config) {
                    out.push((c, v));
                }
            }
        })
    }

    /// Σ of the given terms into the smallest codomain holding every image:
    /// the domain itself when it is closed under the terms, otherwise the
    /// union of the shifted sectors.
    pub fn from_terms_natural(domain: &Arc<Basis>, terms: &[Term]) -> Result<Self> {
        let codomain = natural_codomain(domain, terms)?;
        Self::from_terms(domain, &codomain, terms, Closure::Strict)
    }

    pub fn diagonal<F>(basis: &Arc<Basis>, f: F) -> Self
    where
        F: Fn(Config) -> Complex64 + Sync,
    {
        let columns = (0..basis.dim())
            .into_par_iter()
            .map(|j| {
                let v = f(basis.config(j));
                if v == ZERO {
                    Vec::new()
                } else {
                    vec![(j, v)]
                }
            })
            .collect();
        Self::from_column_lists(basis.clone(), basis.clone(), columns)
    }

    pub fn identity(basis: &Arc<Basis>) -> Self {
        Self::diagonal(basis, |_| Complex64::new(1.0, 0.0))
    }

    pub fn zero(domain: &Arc<Basis>, codomain: &Arc<Basis>) -> Self {
        Self::from_column_lists(
            domain.clone(),
            codomain.clone(),
            vec![Vec::new(); domain.dim()],
        )
    }

    /// Dense-to-sparse conversion (mostly for tests).
    pub fn from_dense(
        domain: &Arc<Basis>,
        codomain: &Arc<Basis>,
        m: &DMatrix<Complex64>,
    ) -> Result<Self> {
        if m.nrows() != codomain.dim() || m.ncols() != domain.dim() {
            return Err(Error::BasisMismatch(format!(
                "matrix {}x{} vs bases {}→{}",
                m.nrows(),
                m.ncols(),
                domain.dim(),
                codomain.dim()
            )));
        }
        let columns = (0..m.ncols())
            .map(|j| {
                (0..m.nrows())
                    .filter(|&i| m[(i, j)] != ZERO)
                    .map(|i| (i, m[(i, j)]))
                    .collect()
            })
            .collect();
        Ok(Self::from_column_lists(
            domain.clone(),
            codomain.clone(),
            columns,
        ))
    }

    pub fn domain(&self) -> &Arc<Basis> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<Basis> {
        &self.codomain
    }

    pub fn nrows(&self) -> usize {
        self.codomain.dim()
    }

    pub fn ncols(&self) -> usize {
        self.domain.dim()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        same_basis(&self.domain, &self.codomain)
    }

    /// True when the operator annihilates everything (for instance a creation
    /// operator on a completely filled sector).
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Nonzero entries of column `j` as `(row, value)` pairs.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    /// All nonzero entries as `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.ncols()).flat_map(move |j| self.column(j).map(move |(i, v)| (i, j, v)))
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let r = self.col_ptr[col]..self.col_ptr[col + 1];
        match self.row_idx[r.clone()].binary_search(&row) {
            Ok(k) => self.values[r.start + k],
            Err(_) => ZERO,
        }
    }

    /// Entry between two basis configurations, zero if either is absent.
    pub fn element(&self, row: Config, col: Config) -> Complex64 {
        match (self.codomain.index_of(row), self.domain.index_of(col)) {
            (Some(i), Some(j)) => self.get(i, j),
            _ => ZERO,
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.nrows(), self.ncols());
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.im.abs() <= tol)
    }

    fn check_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if !same_basis(&self.domain, &other.domain) || !same_basis(&self.codomain, &other.codomain)
        {
            return Err(Error::BasisMismatch(format!(
                "{what}: operands act between different bases"
            )));
        }
        Ok(())
    }

    fn zip_columns<F>(&self, other: &Self, f: F) -> Self
    where
        F: Fn(Complex64, Complex64) -> Complex64 + Sync,
    {
        let columns = (0..self.ncols())
            .into_par_iter()
            .map(|j| {
                let mut entries: Vec<(usize, Complex64)> = self.column(j).collect();
                let mut out = Vec::with_capacity(entries.len());
                let mut b = other.column(j).peekable();
                let mut a = entries.drain(..).peekable();
                loop {
                    let next = match (a.peek(), b.peek()) {
                        (Some(&(ra, va)), Some(&(rb, vb))) => {
                            if ra == rb {
                                a.next();
                                b.next();
                                (ra, f(va, vb))
                            } else if ra < rb {
                                a.next();
                                (ra, f(va, ZERO))
                            } else {
                                b.next();
                                (rb, f(ZERO, vb))
                            }
                        }
                        (Some(&(ra, va)), None) => {
                            a.next();
                            (ra, f(va, ZERO))
                        }
                        (None, Some(&(rb, vb))) => {
                            b.next();
                            (rb, f(ZERO, vb))
                        }
                        (None, None) => break,
                    };
                    if next.1 != ZERO {
                        out.push(next);
                    }
                }
                out
            })
            .collect();
        Self::from_column_lists(self.domain.clone(), self.codomain.clone(), columns)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        Ok(self.zip_columns(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sub")?;
        Ok(self.zip_columns(other, |a, b| a - b))
    }

    /// `self + factor · other`.
    pub fn add_scaled(&self, other: &Self, factor: impl Into<Complex64>) -> Result<Self> {
        self.check_same_shape(other, "add_scaled")?;
        let f = factor.into();
        Ok(self.zip_columns(other, move |a, b| a + f * b))
    }

    pub fn scale(&self, factor: impl Into<Complex64>) -> Self {
        let f = factor.into();
        if f == ZERO {
            return Self::zero(&self.domain, &self.codomain);
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= f);
        out
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if !same_basis(&rhs.codomain, &self.domain) {
            return Err(Error::BasisMismatch(
                "mul: right factor's codomain differs from left factor's domain".into(),
            ));
        }
        let n = self.nrows();
        let columns = (0..rhs.ncols())
            .into_par_iter()
            .map_init(
                || (vec![ZERO; n], vec![false; n], Vec::new()),
                |(acc, mark, touched), j| {
                    for (k, b) in rhs.column(j) {
                        for (i, a) in self.column(k) {
                            if !mark[i] {
                                mark[i] = true;
                                touched.push(i);
                            }
                            acc[i] += a * b;
                        }
                    }
                    touched.sort_unstable();
                    let mut out = Vec::with_capacity(touched.len());
                    for &i in touched.iter() {
                        if acc[i] != ZERO {
                            out.push((i, acc[i]));
                        }
                        acc[i] = ZERO;
                        mark[i] = false;
                    }
                    touched.clear();
                    out
                },
            )
            .collect();
        Ok(Self::from_column_lists(
            rhs.domain.clone(),
            self.codomain.clone(),
            columns,
        ))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut columns: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); self.nrows()];
        for j in 0..self.ncols() {
            for (i, v) in self.column(j) {
                columns[i].push((j, v.conj()));
            }
        }
        Self::from_column_lists(self.codomain.clone(), self.domain.clone(), columns)
    }

    /// [self, other] = self·other − other·self.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// {self, other} = self·other + other·self.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.add(&other.mul(self)?)
    }

    /// Largest entrywise deviation between two operators on the same bases.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square()
            && self
                .max_abs_diff(&self.adjoint())
                .map(|d| d <= tol)
                .unwrap_or(false)
    }

    /// y = A·x.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols(), "vector length does not match domain");
        let mut y = vec![ZERO; self.nrows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj == ZERO {
                continue;
            }
            for (i, v) in self.column(j) {
                y[i] += v * xj;
            }
        }
        y
    }

    /// y = A†·x, parallel over output entries. For a Hermitian operator this
    /// is the same as [`apply`](Self::apply).
    pub fn apply_adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(
            x.len(),
            self.nrows(),
            "vector length does not match codomain"
        );
        (0..self.ncols())
            .into_par_iter()
            .with_min_len(256)
            .map(|j| self.column(j).map(|(i, v)| v.conj() * x[i]).sum())
            .collect()
    }

    /// ⟨x, A y⟩ with the first argument conjugated.
    pub fn matrix_element(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let ay = self.apply(y);
        x.iter().zip(&ay).map(|(a, b)| a.conj() * b).sum()
    }

    /// The same operator seen between smaller (or equal) bases: entries whose
    /// row or column configuration is missing from the new bases are dropped.
    pub fn restrict(&self, domain: &Arc<Basis>, codomain: &Arc<Basis>) -> Result<Self> {
        let columns = (0..domain.dim())
            .into_par_iter()
            .map(|j| {
                let config = domain.config(j);
                let src = self.domain.index_of(config).ok_or_else(|| {
                    Error::BasisMismatch(format!(
                        "configuration {config:#b} not in the operator's domain"
                    ))
                })?;
                Ok(self
                    .column(src)
                    .filter_map(|(i, v)| codomain.index_of(self.codomain.config(i)).map(|r| (r, v)))
                    .collect::<Vec<_>>())
            })
            .collect::<Result<Vec<Vec<_>>>>()?;
        let columns = columns
            .into_iter()
            .map(|mut c| {
                c.sort_unstable_by_key(|e| e.0);
                c
            })
            .collect();
        Ok(Self::from_column_lists(
            domain.clone(),
            codomain.clone(),
            columns,
        ))
    }
}

/// Smallest codomain holding every image of `domain` under `terms`.
pub fn natural_codomain(domain: &Arc<Basis>, terms: &[Term]) -> Result<Arc<Basis>> {
    let l = domain.num_sites();
    let mut keys = Vec::new();
    for key in domain.keys() {
        for t in terms {
            let (du, dd) = t.shift(l);
            if let Some(k) = key.shifted(du, dd, l) {
                keys.push(k);
            }
        }
    }
    keys.sort_unstable();
    keys.dedup();
    if !keys.is_empty() && keys.iter().all(|&k| domain.contains_key(k)) {
        Ok(domain.clone())
    } else {
        Ok(Arc::new(Basis::from_keys(l, keys)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::basis::{BasisRestriction, Spin};
    use crate::fockspace::terms::{annihilation_term, creation_term, number_term};

    fn full(l: usize) -> Arc<Basis> {
        Arc::new(Basis::new(l, BasisRestriction::Full).unwrap())
    }

    fn op(b: &Arc<Basis>, t: Term) -> SparseOperator {
        SparseOperator::from_terms(b, b, &[t], Closure::Strict).unwrap()
    }

    #[test]
    fn canonical_anticommutator_single_mode() {
        let b = full(1);
        let c = op(&b, annihilation_term(0, Spin::Up, 1));
        let cd = op(&b, creation_term(0, Spin::Up, 1));
        let id = SparseOperator::identity(&b);
        assert_eq!(
            c.anticommutator(&cd).unwrap().max_abs_diff(&id).unwrap(),
            0.0
        );
    }

    #[test]
    fn adjoint_twice_is_identity_map() {
        let b = full(2);
        let cd = op(&b, creation_term(1, Spin::Down, 2)).scale(Complex64::new(0.5, 2.0));
        assert_eq!(cd.adjoint().adjoint().max_abs_diff(&cd).unwrap(), 0.0);
    }

    #[test]
    fn product_matches_dense() {
        let b = full(2);
        let a = op(&b, creation_term(0, Spin::Up, 2))
            .add(&op(&b, number_term(1, Spin::Down, 2)))
            .unwrap();
        let c = op(&b, annihilation_term(1, Spin::Up, 2)).scale(Complex64::new(0.0, 1.0));
        let sparse = a.mul(&c).unwrap().to_dense();
        let dense = a.to_dense() * c.to_dense();
        assert!((sparse - dense).norm() < 1e-15);
    }

    #[test]
    fn apply_and_adjoint_apply_agree_with_dense() {
        let b = full(2);
        let a = op(&b, creation_term(0, Spin::Up, 2)).scale(Complex64::new(1.0, -0.5));
        let x: Vec<Complex64> = (0..16)
            .map(|i| Complex64::new(i as f64, 1.0 - i as f64))
            .collect();
        let xd = nalgebra::DVector::from_vec(x.clone());
        let y = a.apply(&x);
        let yd = a.to_dense() * &xd;
        assert!(y.iter().zip(yd.iter()).all(|(p, q)| (p - q).norm() < 1e-14));
        let z = a.apply_adjoint(&x);
        let zd = a.to_dense().adjoint() * &xd;
        assert!(z.iter().zip(zd.iter()).all(|(p, q)| (p - q).norm() < 1e-14));
    }

    #[test]
    fn strict_closure_reports_escape() {
        let b = Arc::new(Basis::sector(2, 1, 0).unwrap());
        let r =
            SparseOperator::from_terms(&b, &b, &[creation_term(0, Spin::Up, 2)], Closure::Strict);
        assert!(matches!(r, Err(Error::NotClosed(_))));
        let natural =
            SparseOperator::from_terms_natural(&b, &[creation_term(0, Spin::Up, 2)]).unwrap();
        assert_eq!(
            natural.codomain().keys(),
            vec![crate::fockspace::SectorKey::new(2, 0)]
        );
        assert_eq!(natural.nnz(), 1);
    }

    #[test]
    fn creation_on_filled_sector_is_empty() {
        let b = Arc::new(Basis::sector(2, 2, 0).unwrap());
        let cd = SparseOperator::from_terms_natural(&b, &[creation_term(0, Spin::Up, 2)]).unwrap();
        assert!(cd.is_empty());
        assert_eq!(cd.nrows(), 0);
    }

    #[test]
    fn restrict_to_sector_block() {
        let b = full(2);
        let n = op(&b, number_term(0, Spin::Up, 2));
        let s = Arc::new(Basis::sector(2, 1, 1).unwrap());
        let r = n.restrict(&s, &s).unwrap();
        assert_eq!(r.nrows(), 4);
        assert_eq!(r.nnz(), 2);
    }
}
