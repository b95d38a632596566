//! Unitary symmetries and the spin and eta-pairing operator families.
//!
//! Mode transformations (Shiba, particle-hole, site permutations) are given
//! mode by mode as U† c_m U = s_m · c_{m'} or s_m · c†_{m'}. Their action on
//! a basis is computed by pushing each canonical product of creation
//! operators through the map, starting from the image of the vacuum, so the
//! fermionic reordering signs come out of the ladder algebra itself.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::{
    counts, pair_creation_term, product, Basis, Closure, Config, Ladder, SectorKey, SparseOperator,
    Spin, Term,
};
use crate::lattice::{InversionMap, LatticeGraph};

/// Image of one mode: U† c_m U = sign · c_{target}, or sign · c†_{target}
/// when `hole` is set.
#[derive(Clone, Copy, Debug, PartialEq)]
struct ModeImage {
    target: usize,
    sign: f64,
    hole: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeTransform {
    num_sites: usize,
    images: Vec<ModeImage>,
}

impl ModeTransform {
    /// Partial particle-hole map on the down spins:
    /// c_{x,↓} ↦ η_x c†_{x,↓}, up spins untouched.
    pub fn shiba(graph: &LatticeGraph) -> Self {
        let l = graph.num_sites();
        let images = (0..2 * l)
            .map(|m| {
                if m < l {
                    ModeImage {
                        target: m,
                        sign: 1.0,
                        hole: false,
                    }
                } else {
                    ModeImage {
                        target: m,
                        sign: graph.eta(m - l),
                        hole: true,
                    }
                }
            })
            .collect();
        ModeTransform {
            num_sites: l,
            images,
        }
    }

    /// Particle-hole map on both spins: c_{x,σ} ↦ η_x c†_{x,σ}.
    pub fn particle_hole(graph: &LatticeGraph) -> Self {
        let l = graph.num_sites();
        let images = (0..2 * l)
            .map(|m| ModeImage {
                target: m,
                sign: graph.eta(m % l),
                hole: true,
            })
            .collect();
        ModeTransform {
            num_sites: l,
            images,
        }
    }

    /// Relabels sites: c_{x,σ} ↦ c_{perm[x],σ}.
    pub fn site_permutation(perm: &[usize]) -> Result<Self> {
        let l = perm.len();
        let mut seen = vec![false; l];
        for &y in perm {
            if y >= l || std::mem::replace(&mut seen[y], true) {
                return Err(Error::Symmetry(format!("{perm:?} is not a permutation")));
            }
        }
        let images = (0..2 * l)
            .map(|m| ModeImage {
                target: perm[m % l] + (m / l) * l,
                sign: 1.0,
                hole: false,
            })
            .collect();
        Ok(ModeTransform {
            num_sites: l,
            images,
        })
    }

    pub fn inversion(map: &InversionMap) -> Result<Self> {
        Self::site_permutation(&map.perm)
    }

    fn vacuum_image(&self) -> Config {
        self.images
            .iter()
            .filter(|im| im.hole)
            .fold(0, |acc, im| acc | 1u64 << im.target)
    }

    /// Image of a canonical basis state: U†|w⟩ = sign · |w'⟩.
    fn image_of(&self, config: Config) -> (Config, f64) {
        let mut state = self.vacuum_image();
        let mut sign = 1.0;
        for m in (0..2 * self.num_sites).rev() {
            if config >> m & 1 == 0 {
                continue;
            }
            let im = self.images[m];
            // U† c†_m U is the adjoint of the image of c_m.
            let op = if im.hole {
                Ladder::Annihilate(im.target)
            } else {
                Ladder::Create(im.target)
            };
            let (next, s) = op
                .apply(state)
                .expect("mode transformation images are a bijection on modes");
            state = next;
            sign *= s * im.sign;
        }
        (state, sign)
    }

    /// The transformation restricted to `basis`, as the signed permutation
    /// |j⟩ ↦ s_j |π(j)⟩ realizing U† on it.
    pub fn on_basis(&self, basis: &Arc<Basis>) -> Result<SignedPermutation> {
        if basis.num_sites() != self.num_sites {
            return Err(Error::BasisMismatch(format!(
                "transformation on {} sites applied to a basis on {}",
                self.num_sites,
                basis.num_sites()
            )));
        }
        let l = self.num_sites;
        let keys: Vec<SectorKey> = basis
            .sectors()
            .iter()
            .filter(|s| s.dim() > 0)
            .map(|s| {
                let (u, d) = counts(self.image_of(s.configs()[0]).0, l);
                SectorKey::new(u, d)
            })
            .collect();
        let codomain = if keys == basis.keys() {
            basis.clone()
        } else {
            Arc::new(Basis::from_keys(l, keys)?)
        };
        let mut image = Vec::with_capacity(basis.dim());
        let mut sign = Vec::with_capacity(basis.dim());
        for config in basis.configs() {
            let (c, s) = self.image_of(config);
            let i = codomain.index_of(c).ok_or_else(|| {
                Error::Symmetry("transformation does not map sectors onto sectors".into())
            })?;
            image.push(i);
            sign.push(s);
        }
        Ok(SignedPermutation {
            domain: basis.clone(),
            codomain,
            image,
            sign,
        })
    }

    /// U† A U.
    pub fn conjugate(&self, op: &SparseOperator) -> Result<SparseOperator> {
        let right = self.on_basis(op.domain())?;
        let left = if Arc::ptr_eq(op.domain(), op.codomain()) {
            right.clone()
        } else {
            self.on_basis(op.codomain())?
        };
        let inverse = right.inverse_map();
        let (l, r) = (&left, &right);
        SparseOperator::from_columns(
            right.codomain.clone(),
            left.codomain.clone(),
            Closure::Strict,
            |config, out| {
                let jj = r.codomain.index_of(config).expect("column from codomain");
                let j = inverse[jj];
                let sj = r.sign[j];
                for (i, v) in op.column(j) {
                    let target = l.codomain.config(l.image[i]);
                    out.push((target, v * l.sign[i] * sj));
                }
            },
        )
    }
}

/// The matrix |j⟩ ↦ sign_j |image_j⟩ between two bases.
#[derive(Clone, Debug)]
pub struct SignedPermutation {
    pub domain: Arc<Basis>,
    pub codomain: Arc<Basis>,
    pub image: Vec<usize>,
    pub sign: Vec<f64>,
}

impl SignedPermutation {
    fn inverse_map(&self) -> Vec<usize> {
        let mut inv = vec![0; self.image.len()];
        for (j, &i) in self.image.iter().enumerate() {
            inv[i] = j;
        }
        inv
    }

    pub fn to_operator(&self) -> SparseOperator {
        let (img, sgn, dom) = (self.image.clone(), self.sign.clone(), self.domain.clone());
        let cod = self.codomain.clone();
        SparseOperator::from_columns(
            dom.clone(),
            cod.clone(),
            Closure::Strict,
            move |config, out| {
                let j = dom.index_of(config).expect("domain config");
                out.push((cod.config(img[j]), Complex64::from(sgn[j])));
            },
        )
        .expect("permutation stays inside its codomain")
    }
}

/// U(θ) = e^{iθN}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseRotation {
    pub theta: f64,
}

impl PhaseRotation {
    pub fn new(theta: f64) -> Self {
        PhaseRotation { theta }
    }

    pub fn eigenvalue(&self, config: Config) -> Complex64 {
        Complex64::from_polar(1.0, self.theta * config.count_ones() as f64)
    }

    pub fn matrix(&self, basis: &Arc<Basis>) -> SparseOperator {
        let me = *self;
        SparseOperator::diagonal(basis, move |c| me.eigenvalue(c))
    }

    /// U† A U.
    pub fn conjugate(&self, op: &SparseOperator) -> SparseOperator {
        let me = *self;
        SparseOperator::from_columns(
            op.domain().clone(),
            op.codomain().clone(),
            Closure::Strict,
            |config, out| {
                let j = op.domain().index_of(config).expect("domain config");
                for (i, v) in op.column(j) {
                    let row = op.codomain().config(i);
                    out.push((row, v * me.eigenvalue(row).conj() * me.eigenvalue(config)));
                }
            },
        )
        .expect("phase rotation keeps the bases")
    }
}

/// Site-resolved spin operators and their totals.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    /// S⁺_x = c†_{x,↑} c_{x,↓}.
    pub raising: Vec<SparseOperator>,
    /// S⁻_x = c†_{x,↓} c_{x,↑}.
    pub lowering: Vec<SparseOperator>,
    /// S^{(i)}_x for i = 1, 2, 3.
    pub components: [Vec<SparseOperator>; 3],
    /// Σ_x S^{(i)}_x for i = 1, 2, 3.
    pub total: [SparseOperator; 3],
    /// Total S², built directly on the basis so it stays within sectors.
    pub squared: SparseOperator,
}

pub fn spin_raising_term(x: usize, l: usize) -> Term {
    Term::new(
        1.0,
        vec![
            Ladder::create(x, Spin::Up, l),
            Ladder::annihilate(x, Spin::Down, l),
        ],
    )
}

pub fn spin_lowering_term(x: usize, l: usize) -> Term {
    spin_raising_term(x, l).adjoint()
}

/// S² = Σ_{x,y} S⁻_x S⁺_y + S³(S³ + 1) on any union of sectors.
pub fn total_spin_squared(basis: &Arc<Basis>) -> Result<SparseOperator> {
    let l = basis.num_sites();
    let mut terms = Vec::with_capacity(l * l);
    for x in 0..l {
        for y in 0..l {
            terms.push(product(&spin_lowering_term(x, l), &spin_raising_term(y, l)));
        }
    }
    SparseOperator::from_columns(
        basis.clone(),
        basis.clone(),
        Closure::Strict,
        |config, out| {
            let (u, d) = counts(config, l);
            let m = (u as f64 - d as f64) / 2.0;
            if m != 0.0 {
                out.push((config, Complex64::from(m * (m + 1.0))));
            }
            for t in &terms {
                if let Some(image) = t.apply(config) {
                    out.push(image);
                }
            }
        },
    )
}

pub fn spin_ops(graph: &LatticeGraph, basis: &Arc<Basis>) -> Result<SpinOperators> {
    let l = graph.num_sites();
    let half = Complex64::from(0.5);
    let minus_half_i = Complex64::new(0.0, -0.5);
    let mut raising = Vec::with_capacity(l);
    let mut lowering = Vec::with_capacity(l);
    let mut comps: [Vec<SparseOperator>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut all_terms: [Vec<Term>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for x in 0..l {
        let plus = spin_raising_term(x, l);
        let minus = spin_lowering_term(x, l);
        raising.push(SparseOperator::from_terms_natural(basis, std::slice::from_ref(&plus))?);
        lowering.push(SparseOperator::from_terms_natural(basis, std::slice::from_ref(&minus))?);
        let t1 = vec![plus.clone().scaled(half), minus.clone().scaled(half)];
        let t2 = vec![plus.scaled(minus_half_i), minus.scaled(-minus_half_i)];
        let up = crate::fockspace::number_term(x, Spin::Up, l);
        let down = crate::fockspace::number_term(x, Spin::Down, l);
        let t3 = vec![up.scaled(half), down.scaled(-half)];
        for (k, t) in [t1, t2, t3].into_iter().enumerate() {
            comps[k].push(SparseOperator::from_terms_natural(basis, &t)?);
            all_terms[k].extend(t);
        }
    }
    let total = [
        SparseOperator::from_terms_natural(basis, &all_terms[0])?,
        SparseOperator::from_terms_natural(basis, &all_terms[1])?,
        SparseOperator::from_terms_natural(basis, &all_terms[2])?,
    ];
    Ok(SpinOperators {
        raising,
        lowering,
        components: comps,
        total,
        squared: total_spin_squared(basis)?,
    })
}

/// e^{i p·r_x} for every site. A nonzero wave vector needs a spatial
/// embedding, must vanish along open axes, and must be commensurate with
/// every periodic axis (p_k · extent_k ∈ 2πℤ).
pub fn momentum_phases(graph: &LatticeGraph, p: &[f64]) -> Result<Vec<Complex64>> {
    let l = graph.num_sites();
    if p.iter().all(|&v| v == 0.0) {
        return Ok(vec![Complex64::from(1.0); l]);
    }
    let geom = graph.geometry().ok_or_else(|| {
        Error::Incommensurate(format!("{} has no spatial embedding", graph.name()))
    })?;
    if p.len() != geom.dim() {
        return Err(Error::Incommensurate(format!(
            "wave vector has {} components, lattice dimension {}",
            p.len(),
            geom.dim()
        )));
    }
    for (k, &pk) in p.iter().enumerate() {
        if !geom.periodic[k] {
            if pk != 0.0 {
                return Err(Error::Incommensurate(format!(
                    "component {k} along an open axis"
                )));
            }
            continue;
        }
        let winding = pk * geom.extents[k] as f64 / (2.0 * PI);
        if (winding - winding.round()).abs() > 1e-9 {
            return Err(Error::Incommensurate(format!(
                "p_{k} = {pk} on an axis of extent {}",
                geom.extents[k]
            )));
        }
    }
    Ok(geom
        .positions
        .iter()
        .map(|r| {
            let phase: f64 = r.iter().zip(p).map(|(&rk, &pk)| rk as f64 * pk).sum();
            Complex64::from_polar(1.0, phase)
        })
        .collect())
}

/// Terms of O_η(p) = Σ_x η_x e^{i p·r_x} c†_{x,↑} c†_{x,↓}.
pub fn eta_terms(graph: &LatticeGraph, p: &[f64]) -> Result<Vec<Term>> {
    let l = graph.num_sites();
    let phases = momentum_phases(graph, p)?;
    Ok((0..l)
        .map(|x| pair_creation_term(x, l).scaled(phases[x] * graph.eta(x)))
        .collect())
}

#[derive(Clone, Debug)]
pub struct EtaOperators {
    /// a_x = η_x c†_{x,↑} c†_{x,↓}.
    pub local: Vec<SparseOperator>,
    /// O_η(p).
    pub total: SparseOperator,
}

pub fn eta_ops(graph: &LatticeGraph, basis: &Arc<Basis>, p: &[f64]) -> Result<EtaOperators> {
    let l = graph.num_sites();
    let local = (0..l)
        .map(|x| {
            SparseOperator::from_terms_natural(
                basis,
                &[pair_creation_term(x, l).scaled(graph.eta(x))],
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let total = SparseOperator::from_terms_natural(basis, &eta_terms(graph, p)?)?;
    Ok(EtaOperators { local, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{number_op, BasisRestriction};
    use crate::model::{build_hamiltonian, build_parts, ModelParams};

    fn full(l: usize) -> Arc<Basis> {
        Arc::new(Basis::new(l, BasisRestriction::Full).unwrap())
    }

    #[test]
    fn shiba_is_unitary_and_flips_interaction() {
        let g = LatticeGraph::chain(4, true).unwrap();
        let b = full(4);
        let shiba = ModeTransform::shiba(&g);
        let v = shiba.on_basis(&b).unwrap().to_operator();
        let id = SparseOperator::identity(&b);
        assert_eq!(v.adjoint().mul(&v).unwrap().max_abs_diff(&id).unwrap(), 0.0);
        let parts = build_parts(&g, &ModelParams::new(1.0, 3.0, 0.0), &b).unwrap();
        let flipped = shiba.conjugate(&parts.interaction).unwrap();
        assert!(flipped.add(&parts.interaction).unwrap().max_abs() < 1e-12);
        let hop = shiba.conjugate(&parts.hop).unwrap();
        assert!(hop.max_abs_diff(&parts.hop).unwrap() < 1e-12);
    }

    #[test]
    fn shiba_maps_down_density_to_hole_density() {
        let g = LatticeGraph::star(3).unwrap();
        let b = full(4);
        let shiba = ModeTransform::shiba(&g);
        for x in 0..4 {
            let n = number_op(x, Spin::Down, &b);
            let expected = SparseOperator::identity(&b).sub(&n).unwrap();
            assert!(
                shiba
                    .conjugate(&n)
                    .unwrap()
                    .max_abs_diff(&expected)
                    .unwrap()
                    < 1e-12
            );
        }
    }

    #[test]
    fn conjugation_matches_dense_sandwich() {
        let g = LatticeGraph::chain(2, false).unwrap();
        let b = full(2);
        let h = build_hamiltonian(&g, &ModelParams::new(0.7, 2.0, 0.3), &b).unwrap();
        for t in [ModeTransform::shiba(&g), ModeTransform::particle_hole(&g)] {
            let v = t.on_basis(&b).unwrap().to_operator().to_dense();
            let expect = &v * h.to_dense() * v.adjoint();
            let got = t.conjugate(&h).unwrap().to_dense();
            assert!((expect - got).norm() < 1e-13);
        }
    }

    #[test]
    fn shiba_moves_fixed_sectors() {
        let g = LatticeGraph::chain(4, true).unwrap();
        let b = Arc::new(Basis::sector(4, 1, 1).unwrap());
        let p = ModeTransform::shiba(&g).on_basis(&b).unwrap();
        assert_eq!(p.codomain.keys(), vec![SectorKey::new(1, 3)]);
    }

    #[test]
    fn particle_hole_fixes_half_filled_hamiltonian() {
        let g = LatticeGraph::star(3).unwrap();
        let b = full(4);
        let h = build_hamiltonian(&g, &ModelParams::new(1.0, 4.0, 0.0), &b).unwrap();
        let ph = ModeTransform::particle_hole(&g);
        assert!(ph.conjugate(&h).unwrap().max_abs_diff(&h).unwrap() < 1e-12);
        let n = crate::fockspace::total_number(&b);
        let expected = SparseOperator::identity(&b).scale(8.0).sub(&n).unwrap();
        assert!(ph.conjugate(&n).unwrap().max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn phase_rotation_eigenvalue() {
        let u = PhaseRotation::new(PI);
        let z = u.eigenvalue(0b0111);
        assert!((z - Complex64::from(-1.0)).norm() < 1e-12);
    }

    #[test]
    fn single_site_spin_half() {
        let g = LatticeGraph::custom("site", vec![crate::lattice::Sublattice::A], &[]).unwrap();
        let b = Arc::new(Basis::new(1, BasisRestriction::FixedTotal(1)).unwrap());
        let s = spin_ops(&g, &b).unwrap();
        let expected = SparseOperator::identity(&b).scale(0.75);
        assert!(s.squared.max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn spin_squared_matches_components() {
        let g = LatticeGraph::chain(3, false).unwrap();
        let b = full(3);
        let s = spin_ops(&g, &b).unwrap();
        let mut sum = SparseOperator::zero(&b, &b);
        for k in 0..3 {
            sum = sum.add(&s.total[k].mul(&s.total[k]).unwrap()).unwrap();
        }
        assert!(sum.max_abs_diff(&s.squared).unwrap() < 1e-12);
    }

    #[test]
    fn inversion_commutes_with_hamiltonian() {
        let g = LatticeGraph::chain(6, true).unwrap();
        let b = Arc::new(Basis::sector(6, 2, 2).unwrap());
        let h = build_hamiltonian(&g, &ModelParams::new(1.0, 2.0, 0.0), &b).unwrap();
        let inv = ModeTransform::inversion(&g.inversion(0).unwrap()).unwrap();
        assert!(inv.conjugate(&h).unwrap().max_abs_diff(&h).unwrap() < 1e-12);
    }

    #[test]
    fn incommensurate_momentum_rejected() {
        let g = LatticeGraph::chain(4, true).unwrap();
        assert!(momentum_phases(&g, &[PI / 2.0]).is_ok());
        assert!(matches!(
            momentum_phases(&g, &[0.3]),
            Err(Error::Incommensurate(_))
        ));
        let star = LatticeGraph::star(3).unwrap();
        assert!(momentum_phases(&star, &[0.5]).is_err());
    }
}
