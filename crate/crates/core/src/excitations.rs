//! Single-fermion excitations and momentum-resolved pairing excitations.
//!
//! The single-fermion part builds 𝒜↑ = Σ_x α_x c†_{x,↑} over the fixed-N
//! ground state and compares the exact excitation ratio with the bounds
//! obtained from the commutator [H, 𝒜↑]. The pairing part evaluates the
//! variational energy of O_η(p) Φ for commensurate wave vectors p.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::{
    creation_term, number_op, number_term, product, Basis, BasisRestriction, Closure, SectorKey,
    SparseOperator, Spin, StateVector, Term,
};
use crate::lattice::{LatticeGraph, Sublattice};
use crate::model::{build_hamiltonian, local_decomposition, ModelParams};
use crate::observables::{EXPECTATION_TOL, IDENTITY_TOL};
use crate::report::{CheckRecord, Context, Relation, Stopwatch, VerificationReport};
use crate::spectra::{global_ground_manifold, BlockLabel, Partition, SolverOptions};
use crate::symmetry::{eta_terms, ModeTransform};

/// Densities closer than this are treated as uniform.
const UNIFORM_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExcitationKind {
    Delta(usize),
    TwoSite(usize, usize),
    General,
}

impl fmt::Display for ExcitationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExcitationKind::Delta(x) => write!(f, "delta({x})"),
            ExcitationKind::TwoSite(x, y) => write!(f, "two-site({x},{y})"),
            ExcitationKind::General => f.write_str("general"),
        }
    }
}

/// Site amplitudes α_x of 𝒜↑ = Σ_x α_x c†_{x,↑}.
#[derive(Clone, Debug, PartialEq)]
pub struct ExcitationCoefficients {
    pub alpha: Vec<Complex64>,
    pub normalized: bool,
    pub kind: ExcitationKind,
}

impl ExcitationCoefficients {
    pub fn new(alpha: Vec<Complex64>) -> Result<Self> {
        let w: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
        if alpha.is_empty() || !(w > 0.0) || !w.is_finite() {
            return Err(Error::InvalidParams(
                "excitation amplitudes must be nonzero and finite".into(),
            ));
        }
        Ok(ExcitationCoefficients {
            normalized: (w - 1.0).abs() <= 1e-14,
            alpha,
            kind: ExcitationKind::General,
        })
    }

    /// α = e_x.
    pub fn delta(num_sites: usize, x: usize) -> Result<Self> {
        if x >= num_sites {
            return Err(Error::OutOfRange(format!("site {x} on {num_sites} sites")));
        }
        let mut alpha = vec![Complex64::new(0.0, 0.0); num_sites];
        alpha[x] = Complex64::from(1.0);
        Ok(ExcitationCoefficients {
            alpha,
            normalized: true,
            kind: ExcitationKind::Delta(x),
        })
    }

    /// α = (e_x + e_y)/√2.
    pub fn two_site(num_sites: usize, x: usize, y: usize) -> Result<Self> {
        if x >= num_sites || y >= num_sites || x == y {
            return Err(Error::OutOfRange(format!(
                "sites ({x},{y}) on {num_sites} sites"
            )));
        }
        let mut alpha = vec![Complex64::new(0.0, 0.0); num_sites];
        alpha[x] = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
        alpha[y] = alpha[x];
        Ok(ExcitationCoefficients {
            alpha,
            normalized: true,
            kind: ExcitationKind::TwoSite(x, y),
        })
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Σ_x |α_x|².
    pub fn weight(&self) -> f64 {
        self.alpha.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.weight().sqrt();
        self.alpha.iter_mut().for_each(|a| *a /= n);
        self.normalized = true;
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// α̃_y = Σ_x w_xy α_x with w_xy = t_xy/t₀ over the bonds of the graph.
    pub fn tilde(&self, graph: &LatticeGraph, params: &ModelParams) -> Vec<Complex64> {
        let t0 = params.max_hopping(graph);
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        if t0 == 0.0 {
            return out;
        }
        for (i, b) in graph.bonds().iter().enumerate() {
            let w = params.hopping(graph, i) / t0;
            out[b.target] += self.alpha[b.origin] * w;
            out[b.origin] += self.alpha[b.target] * w;
        }
        out
    }
}

/// Constants controlling the hopping penalty of the loose gap bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HoppingConstants {
    /// t₀ = max |t_xy|.
    pub t0: f64,
    /// max_y Σ_x w_xy², with w_xy = t_xy/t₀.
    pub gamma_nn: f64,
    /// γ_nn times the largest coordination number; bounds Σ_y |α̃_y|².
    pub gamma_tilde: f64,
    pub coordination: usize,
}

pub fn hopping_constants(graph: &LatticeGraph, params: &ModelParams) -> HoppingConstants {
    let t0 = params.max_hopping(graph);
    let mut sums = vec![0.0; graph.num_sites()];
    if t0 > 0.0 {
        for (i, b) in graph.bonds().iter().enumerate() {
            let w = params.hopping(graph, i) / t0;
            sums[b.origin] += w * w;
            sums[b.target] += w * w;
        }
    }
    let gamma_nn = sums.iter().copied().fold(0.0, f64::max);
    let coordination = graph.max_coordination();
    HoppingConstants {
        t0,
        gamma_nn,
        gamma_tilde: gamma_nn * coordination as f64,
        coordination,
    }
}

/// 𝒜↑ with its companions 𝒜̃↑ = Σ_y α̃_y c†_{y,↑} and
/// 𝒜↑,↓ = Σ_x α_x c†_{x,↑} n_{x,↓}, all from the same domain.
#[derive(Clone, Debug)]
pub struct Excitation {
    pub a_up: SparseOperator,
    pub a_tilde: SparseOperator,
    pub a_updown: SparseOperator,
    /// Every configuration of the domain is already full of up fermions.
    pub empty: bool,
}

fn weighted_creation(alpha: &[Complex64], l: usize, with_down: bool) -> Vec<Term> {
    alpha
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(x, &a)| {
            let c = creation_term(x, Spin::Up, l);
            let t = if with_down {
                product(&c, &number_term(x, Spin::Down, l))
            } else {
                c
            };
            t.scaled(a)
        })
        .collect()
}

pub fn build_excitation(
    alpha: &ExcitationCoefficients,
    graph: &LatticeGraph,
    params: &ModelParams,
    basis: &Arc<Basis>,
) -> Result<Excitation> {
    let l = basis.num_sites();
    if alpha.len() != l || graph.num_sites() != l {
        return Err(Error::BasisMismatch(format!(
            "{} amplitudes for a basis on {l} sites",
            alpha.len()
        )));
    }
    let mut alpha = alpha.clone();
    if !alpha.normalized {
        log::warn!(
            "excitation amplitudes have weight {}; normalizing",
            alpha.weight()
        );
        alpha.normalize();
    }
    let tilde = alpha.tilde(graph, params);
    let up = weighted_creation(&alpha.alpha, l, false);
    let a_up = SparseOperator::from_terms_natural(basis, &up)?;
    let codomain = a_up.codomain().clone();
    let a_tilde = SparseOperator::from_terms(
        basis,
        &codomain,
        &weighted_creation(&tilde, l, false),
        Closure::Strict,
    )?;
    let a_updown = SparseOperator::from_terms(
        basis,
        &codomain,
        &weighted_creation(&alpha.alpha, l, true),
        Closure::Strict,
    )?;
    let empty = codomain.dim() == 0;
    if empty {
        log::warn!("no room for another up fermion: the excitation operator is empty");
    }
    Ok(Excitation {
        a_up,
        a_tilde,
        a_updown,
        empty,
    })
}

fn uniform_coupling(params: &ModelParams) -> Result<f64> {
    params.u.uniform_value().ok_or_else(|| {
        Error::InvalidParams("the single-fermion gap needs a uniform coupling U".into())
    })
}

/// 𝒜𝒜† + 𝒜†𝒜 = I, {𝒜↑,↓, 𝒜↑,↓†} = Σ|α_x|² n_{x,↓}, and
/// [H, 𝒜↑] = (U/2 + μ)𝒜↑ + t₀𝒜̃↑ − U𝒜↑,↓ on the full Fock space.
pub fn verify_excitation_identities(
    graph: &LatticeGraph,
    params: &ModelParams,
    alpha: &ExcitationCoefficients,
) -> Result<VerificationReport> {
    let clock = Stopwatch::start();
    let u = uniform_coupling(params)?;
    let l = graph.num_sites();
    let ctx = Context::new(graph.name(), format!("{params} alpha={}", alpha.kind));
    let full = Arc::new(Basis::new(l, BasisRestriction::Full)?);
    let ex = build_excitation(alpha, graph, params, &full)?;
    let alpha = if alpha.normalized {
        alpha.clone()
    } else {
        alpha.clone().normalized()
    };
    let id = SparseOperator::identity(&full);
    let mut report = VerificationReport::new();
    let row = |claim: &str, quantity: &str, diff: f64| {
        CheckRecord::compare(
            claim,
            &ctx,
            quantity,
            diff,
            Relation::AtMost,
            0.0,
            IDENTITY_TOL,
        )
    };
    report.push(row(
        "excitation.anticommutator",
        "max |A A^dag + A^dag A - I|",
        ex.a_up
            .anticommutator(&ex.a_up.adjoint())?
            .max_abs_diff(&id)?,
    ));
    let mut weight = SparseOperator::zero(&full, &full);
    for (x, a) in alpha.alpha.iter().enumerate() {
        weight = weight.add_scaled(&number_op(x, Spin::Down, &full), a.norm_sqr())?;
    }
    report.push(row(
        "excitation.updown-anticommutator",
        "max |{A_ud, A_ud^dag} - sum |alpha_x|^2 n_x,dn|",
        ex.a_updown
            .anticommutator(&ex.a_updown.adjoint())?
            .max_abs_diff(&weight)?,
    ));
    let h = build_hamiltonian(graph, params, &full)?;
    let t0 = params.max_hopping(graph);
    let rhs = ex
        .a_up
        .scale(0.5 * u + params.mu)
        .add_scaled(&ex.a_tilde, t0)?
        .add_scaled(&ex.a_updown, -u)?;
    report.push(row(
        "excitation.commutator",
        "max |[H,A] - (U/2+mu) A - t0 A_tilde + U A_ud|",
        h.commutator(&ex.a_up)?.max_abs_diff(&rhs)?,
    ));
    report.stamp(clock.seconds());
    Ok(report)
}

/// Which bound on ‖𝒜↑,↓Φ‖² the loose gap bound uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DensityRule {
    /// ⟨n_{x,↓}⟩ is uniform: ν↓.
    Uniform,
    /// ⟨n_{x,↓}⟩ is uniform on each sublattice of an imbalanced graph: ν↓/a.
    Sublattice,
    /// Σ_x |α_x|² ⟨n_{x,↓}⟩ itself.
    Exact,
}

/// Exact single-fermion excitation data and the two gap bounds.
#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub lattice: String,
    pub params: String,
    pub particles: usize,
    pub kind: ExcitationKind,
    pub ground_energy: f64,
    pub manifold_dim: usize,
    pub ground_sector: Option<SectorKey>,
    /// ‖(H − E_GS)𝒜↑Φ‖/‖𝒜↑Φ‖.
    pub ratio: f64,
    /// ⟨𝒜↑Φ, (H − E_GS)𝒜↑Φ⟩/‖𝒜↑Φ‖².
    pub rayleigh: f64,
    /// ⟨Φ, 𝒜↑†𝒜↑ Φ⟩.
    pub norm_condition: f64,
    pub tilde_norm: f64,
    pub updown_norm: f64,
    /// Σ_y |α̃_y|².
    pub tilde_weight: f64,
    pub constants: HoppingConstants,
    pub u_half_plus_mu: f64,
    pub coupling: f64,
    pub nu_up: f64,
    pub nu_down: f64,
    pub max_up_density: f64,
    pub up_density_uniform: bool,
    pub minority_fraction: f64,
    pub density_rule: DensityRule,
    /// Σ_x |α_x|² ⟨n_{x,↓}⟩.
    pub exact_density: f64,
    pub density_bound: f64,
    /// (U/2 + μ) − √2 t₀ ‖𝒜̃Φ‖ − √2 U ‖𝒜↑,↓Φ‖.
    pub tight_bound: f64,
    /// (U/2 + μ) − √(2γ̃) t₀ − √(2 density_bound) U.
    pub loose_bound: f64,
    pub seconds: f64,
}

impl GapReport {
    pub fn hypothesis_met(&self) -> bool {
        self.norm_condition >= 0.5
    }

    pub fn to_report(&self) -> VerificationReport {
        let ctx = Context::new(
            self.lattice.clone(),
            format!("{} N={} alpha={}", self.params, self.particles, self.kind),
        );
        let tol = EXPECTATION_TOL;
        let mut r = VerificationReport::new();
        r.push(CheckRecord::compare(
            "gap.unique-ground",
            &ctx,
            "fixed-N ground manifold dimension",
            self.manifold_dim as f64,
            Relation::Equal,
            1.0,
            0.0,
        ));
        r.push(CheckRecord::compare(
            "gap.norm-condition",
            &ctx,
            "<Phi,A^dag A Phi> >= 1/2",
            self.norm_condition,
            Relation::AtLeast,
            0.5,
            tol,
        ));
        if self.hypothesis_met() {
            r.push(CheckRecord::compare(
                "gap.tight-bound",
                &ctx,
                "|(H-E)A Phi|/|A Phi| >= (U/2+mu) - sqrt2 t0 |A_tilde Phi| - sqrt2 U |A_ud Phi|",
                self.ratio,
                Relation::AtLeast,
                self.tight_bound,
                tol,
            ));
            r.push(CheckRecord::compare(
                "gap.loose-bound",
                &ctx,
                "|(H-E)A Phi|/|A Phi| >= (U/2+mu) - sqrt(2 gamma_tilde) t0 - sqrt(2 nu) U",
                self.ratio,
                Relation::AtLeast,
                self.loose_bound,
                tol,
            ));
            r.push(CheckRecord::compare(
                "gap.variational-energy",
                &ctx,
                "<A Phi,(H-E)A Phi>/|A Phi|^2 >= tight bound",
                self.rayleigh,
                Relation::AtLeast,
                self.tight_bound,
                tol,
            ));
        } else {
            for (claim, bound) in [
                ("gap.tight-bound", self.tight_bound),
                ("gap.loose-bound", self.loose_bound),
            ] {
                r.push(CheckRecord::info(
                    claim,
                    &ctx,
                    "hypothesis unmet: norm condition below 1/2",
                    self.ratio,
                    bound,
                ));
            }
        }
        r.push(CheckRecord::compare(
            "gap.tilde-weight",
            &ctx,
            "sum |alpha_tilde|^2 <= gamma_tilde",
            self.tilde_weight,
            Relation::AtMost,
            self.constants.gamma_tilde,
            tol,
        ));
        r.push(CheckRecord::compare(
            "gap.tilde-weight",
            &ctx,
            "|A_tilde Phi|^2 <= sum |alpha_tilde|^2",
            self.tilde_norm * self.tilde_norm,
            Relation::AtMost,
            self.tilde_weight,
            tol,
        ));
        r.push(CheckRecord::compare(
            "gap.density-bound",
            &ctx,
            format!("|A_ud Phi|^2 <= density bound ({:?})", self.density_rule),
            self.updown_norm * self.updown_norm,
            Relation::AtMost,
            self.density_bound,
            tol,
        ));
        if self.minority_fraction < 0.5 {
            r.push(CheckRecord::compare(
                "gap.sublattice-density-bound",
                &ctx,
                "|A_ud Phi|^2 <= nu_dn / a",
                self.updown_norm * self.updown_norm,
                Relation::AtMost,
                self.nu_down / self.minority_fraction,
                tol,
            ));
        }
        match self.kind {
            ExcitationKind::Delta(_) if self.up_density_uniform => r.push(CheckRecord::compare(
                "gap.delta-norm",
                &ctx,
                "<Phi,A^dag A Phi> vs 1 - nu_up",
                self.norm_condition,
                Relation::Equal,
                1.0 - self.nu_up,
                tol,
            )),
            ExcitationKind::TwoSite(..) => r.push(CheckRecord::compare(
                "gap.two-site-norm",
                &ctx,
                "<Phi,A^dag A Phi> >= 1 - 3 max<n_up>",
                self.norm_condition,
                Relation::AtLeast,
                1.0 - 3.0 * self.max_up_density,
                tol,
            )),
            _ => {}
        }
        r.stamp(self.seconds);
        r
    }
}

fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Single-fermion excitation of the N-particle ground state with amplitudes
/// `alpha`, and the bounds on its energy.
pub fn gap_check(
    graph: &LatticeGraph,
    params: &ModelParams,
    particles: usize,
    alpha: &ExcitationCoefficients,
    opts: &SolverOptions,
) -> Result<GapReport> {
    let clock = Stopwatch::start();
    let l = graph.num_sites();
    if !particles.is_multiple_of(2) || particles > 2 * l {
        return Err(Error::InvalidParams(format!(
            "particle number must be even and at most {}; got {particles}",
            2 * l
        )));
    }
    let u = uniform_coupling(params)?;
    if u < 0.0 {
        return Err(Error::InvalidParams("the gap bounds need U >= 0".into()));
    }
    let basis = Arc::new(Basis::new(l, BasisRestriction::FixedTotal(particles))?);
    let h = build_hamiltonian(graph, params, &basis)?;
    let manifold = global_ground_manifold(&h, Partition::Sectors, opts)?;
    let phi = &manifold.states[0];
    let e0 = manifold.energy;
    let ground_sector = match manifold.labels.first() {
        Some(BlockLabel::Sector(k)) => Some(*k),
        _ => None,
    };

    let ex = build_excitation(alpha, graph, params, &basis)?;
    let alpha = if alpha.normalized {
        alpha.clone()
    } else {
        alpha.clone().normalized()
    };
    let a_phi = phi.apply(&ex.a_up)?;
    let norm_condition = a_phi.norm_sqr();
    let (ratio, rayleigh) = if ex.empty || norm_condition == 0.0 {
        (0.0, 0.0)
    } else {
        let hc = build_hamiltonian(graph, params, ex.a_up.codomain())?;
        let h_a = a_phi.apply(&hc)?;
        let shifted = h_a.add_scaled(&a_phi, Complex64::from(-e0))?;
        let rayleigh = a_phi.inner(&shifted)?.re / norm_condition;
        (shifted.norm() / norm_condition.sqrt(), rayleigh)
    };
    let tilde_norm = phi.apply(&ex.a_tilde)?.norm();
    let updown_norm = phi.apply(&ex.a_updown)?.norm();
    let tilde_weight = alpha
        .tilde(graph, params)
        .iter()
        .map(|a| a.norm_sqr())
        .sum();
    let constants = hopping_constants(graph, params);

    let up: Vec<f64> = (0..l)
        .map(|x| {
            phi.expectation(&number_op(x, Spin::Up, &basis))
                .map(|v| v.re)
        })
        .collect::<Result<_>>()?;
    let down: Vec<f64> = (0..l)
        .map(|x| {
            phi.expectation(&number_op(x, Spin::Down, &basis))
                .map(|v| v.re)
        })
        .collect::<Result<_>>()?;
    let lf = l as f64;
    let nu_up = up.iter().sum::<f64>() / lf;
    let nu_down = down.iter().sum::<f64>() / lf;
    let a = graph.minority_fraction();
    let exact_density: f64 = alpha
        .alpha
        .iter()
        .zip(&down)
        .map(|(al, n)| al.norm_sqr() * n)
        .sum();
    let on = |s: Sublattice| -> Vec<f64> {
        (0..l)
            .filter(|&x| graph.sublattice(x) == s)
            .map(|x| down[x])
            .collect()
    };
    let (density_rule, density_bound) = if spread(&down) <= UNIFORM_TOL {
        (DensityRule::Uniform, nu_down)
    } else if a < 0.5
        && spread(&on(Sublattice::A)) <= UNIFORM_TOL
        && spread(&on(Sublattice::B)) <= UNIFORM_TOL
    {
        (DensityRule::Sublattice, nu_down / a)
    } else {
        (DensityRule::Exact, exact_density)
    };
    let s2 = std::f64::consts::SQRT_2;
    let base = 0.5 * u + params.mu;
    let tight_bound = base - s2 * constants.t0 * tilde_norm - s2 * u * updown_norm;
    let loose_bound = base
        - (2.0 * constants.gamma_tilde).sqrt() * constants.t0
        - (2.0 * density_bound).sqrt() * u;
    Ok(GapReport {
        lattice: graph.name().to_string(),
        params: params.to_string(),
        particles,
        kind: alpha.kind,
        ground_energy: e0,
        manifold_dim: manifold.dim(),
        ground_sector,
        ratio,
        rayleigh,
        norm_condition,
        tilde_norm,
        updown_norm,
        tilde_weight,
        constants,
        u_half_plus_mu: base,
        coupling: u,
        nu_up,
        nu_down,
        max_up_density: up.iter().copied().fold(0.0, f64::max),
        up_density_uniform: spread(&up) <= UNIFORM_TOL,
        minority_fraction: a,
        density_rule,
        exact_density,
        density_bound,
        tight_bound,
        loose_bound,
        seconds: clock.seconds(),
    })
}

/// Which pair operator excites the ground state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PairVariant {
    /// O_η(p), adding a pair.
    Creation,
    /// O_η(p)†, removing a pair.
    Annihilation,
}

/// Variational pairing energy at one wave vector.
#[derive(Clone, Debug, Serialize)]
pub struct DispersionPoint {
    pub p: Vec<f64>,
    pub p_norm: f64,
    /// ΔE for O_η(p).
    pub delta_e: Option<f64>,
    /// ΔE for O_η(p)†.
    pub delta_e_conjugate: Option<f64>,
    /// ‖O_η(p)Φ‖².
    pub norm_sq: f64,
    /// ‖O_η(p)†Φ‖².
    pub norm_sq_conjugate: f64,
    /// ⟨Φ, [O†, [H, O]] Φ⟩.
    pub double_commutator: f64,
    /// Σ over cells of the local double commutators, cos part.
    pub local_cos: f64,
    /// The same, sin part; the local sum is cos − i·sin.
    pub local_sin: Complex64,
    pub local_sum: Complex64,
    /// ΔE of the primary variant at −p.
    pub delta_e_reflected: Option<f64>,
}

impl DispersionPoint {
    pub fn primary(&self, variant: PairVariant) -> Option<f64> {
        match variant {
            PairVariant::Creation => self.delta_e,
            PairVariant::Annihilation => self.delta_e_conjugate,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DispersionReport {
    pub lattice: String,
    pub params: String,
    pub sites: usize,
    pub particles: usize,
    pub sector: SectorKey,
    pub ground_energy: f64,
    /// Dimension of the sector ground manifold before the inversion choice.
    pub manifold_dim: usize,
    /// Inversion eigenvalue of the chosen ground state, if the lattice has
    /// an inversion through site 0.
    pub inversion_parity: Option<f64>,
    pub variant: PairVariant,
    pub points: Vec<DispersionPoint>,
    /// 4 Σ_b |t_b||δ_b| / ||Λ| − N|.
    pub c0: f64,
    /// 2 Σ_b |t_b||δ_b|² / ||Λ| − N|.
    pub c0_tilde: f64,
    pub mu: f64,
    pub seconds: f64,
}

impl DispersionReport {
    /// ΔE(p) − 2μ of the primary variant, divided by |p| and p², for the
    /// nonzero wave vectors.
    pub fn ratios(&self) -> Vec<(f64, f64, f64)> {
        self.points
            .iter()
            .filter(|pt| pt.p_norm > 0.0)
            .filter_map(|pt| {
                let de = pt.primary(self.variant)? - 2.0 * self.mu;
                Some((pt.p_norm, de / pt.p_norm, de / (pt.p_norm * pt.p_norm)))
            })
            .collect()
    }

    pub fn to_report(&self) -> VerificationReport {
        let l = self.lattice.clone();
        let base = Context::new(l, format!("{} N={}", self.params, self.particles));
        let vacancy = self.vacancy();
        let tol = EXPECTATION_TOL;
        let mut r = VerificationReport::new();
        if self.manifold_dim > 1 {
            r.push(CheckRecord::info(
                "dispersion.ground-choice",
                &base,
                "sector ground manifold dimension; inversion-even member used",
                self.manifold_dim as f64,
                self.inversion_parity.unwrap_or(f64::NAN),
            ));
        }
        for pt in &self.points {
            let ctx = base.with_params(format!("p={:?}", pt.p));
            r.push(CheckRecord::compare(
                "dispersion.local-sum",
                &ctx,
                "<[O^dag,[H,O]]> vs sum over cells (cos - i sin)",
                (pt.double_commutator - pt.local_sum.re)
                    .abs()
                    .max(pt.local_sum.im.abs()),
                Relation::AtMost,
                0.0,
                tol,
            ));
            if let (Some(a), Some(b)) = (pt.delta_e, pt.delta_e_conjugate) {
                r.push(CheckRecord::compare(
                    "dispersion.double-commutator",
                    &ctx,
                    "num(O) + num(O^dag) vs <[O^dag,[H,O]]>",
                    a * pt.norm_sq + b * pt.norm_sq_conjugate,
                    Relation::Equal,
                    pt.double_commutator,
                    tol,
                ));
            }
            r.push(CheckRecord::compare(
                "dispersion.guard-identity",
                &ctx,
                "|O Phi|^2 vs |O^dag Phi|^2 + |sites| - N",
                pt.norm_sq,
                Relation::Equal,
                pt.norm_sq_conjugate + vacancy,
                tol,
            ));
            let (den, floor) = match self.variant {
                PairVariant::Creation => (pt.norm_sq, vacancy),
                PairVariant::Annihilation => (pt.norm_sq_conjugate, -vacancy),
            };
            r.push(CheckRecord::compare(
                "dispersion.guard",
                &ctx,
                "variational denominator >= ||sites| - N|",
                den,
                Relation::AtLeast,
                floor,
                tol,
            ));
            let Some(de) = pt.primary(self.variant) else {
                continue;
            };
            r.push(CheckRecord::info(
                "dispersion.nonnegative",
                &ctx,
                "Delta E(p) against the sector ground energy",
                de,
                0.0,
            ));
            if pt.p_norm == 0.0 {
                r.push(CheckRecord::compare(
                    "dispersion.zero-momentum",
                    &ctx,
                    "Delta E(0) vs 2 mu",
                    de,
                    Relation::Equal,
                    2.0 * self.mu,
                    tol,
                ));
                continue;
            }
            r.push(CheckRecord::compare(
                "dispersion.linear-bound",
                &ctx,
                "Delta E(p) - 2 mu <= C0 |p|",
                de - 2.0 * self.mu,
                Relation::AtMost,
                self.c0 * pt.p_norm,
                tol,
            ));
            if let Some(reflected) = pt.delta_e_reflected {
                r.push(CheckRecord::compare(
                    "dispersion.inversion-symmetry",
                    &ctx,
                    "Delta E(p) vs Delta E(-p)",
                    de,
                    Relation::Equal,
                    reflected,
                    tol,
                ));
                if self.inversion_parity.is_some() {
                    r.push(CheckRecord::compare(
                        "dispersion.quadratic-bound",
                        &ctx,
                        "Delta E(p) - 2 mu <= C0_tilde p^2",
                        de - 2.0 * self.mu,
                        Relation::AtMost,
                        self.c0_tilde * pt.p_norm * pt.p_norm,
                        tol,
                    ));
                }
            }
            log::info!(
                "{} p={:?}: cos part {:.6e}, sin part {:.3e}",
                self.lattice,
                pt.p,
                pt.local_cos,
                pt.local_sin.norm()
            );
        }
        r.stamp(self.seconds);
        r
    }

    fn vacancy(&self) -> f64 {
        self.sites as f64 - self.particles as f64
    }
}

fn sector_for(particles: usize) -> SectorKey {
    SectorKey::new(particles.div_ceil(2), particles / 2)
}

/// The sector ground state, made an inversion eigenvector when the sector
/// ground level is degenerate and the lattice has an inversion through
/// site 0.
fn symmetric_ground_state(
    graph: &LatticeGraph,
    h: &SparseOperator,
    opts: &SolverOptions,
) -> Result<(StateVector, f64, usize, Option<f64>)> {
    let m = global_ground_manifold(h, Partition::Sectors, opts)?;
    let basis = h.domain().clone();
    let inversion = match graph.inversion(0) {
        Ok(map) => Some(
            ModeTransform::inversion(&map)?
                .on_basis(&basis)?
                .to_operator(),
        ),
        Err(_) => None,
    };
    let Some(p_op) = inversion else {
        return Ok((m.states[0].clone(), m.energy, m.dim(), None));
    };
    let k = m.dim();
    let images: Vec<StateVector> = m
        .states
        .iter()
        .map(|s| s.apply(&p_op))
        .collect::<Result<_>>()?;
    let mut mat = DMatrix::<Complex64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            mat[(i, j)] = m.states[i].inner(&images[j])?;
        }
    }
    let mat = (&mat + mat.adjoint()) * Complex64::from(0.5);
    let eig = SymmetricEigen::new(mat);
    let best = eig.eigenvalues.imax();
    let v = eig.eigenvectors.column(best);
    let mut phi = m.states[0].scaled(v[0]);
    for i in 1..k {
        phi = phi.add_scaled(&m.states[i], v[i])?;
    }
    let phi = phi.normalized();
    let parity = phi.inner(&phi.apply(&p_op)?)?.re;
    Ok((phi, m.energy, k, Some(parity)))
}

/// ⟨Φ, [left, [h, right]] Φ⟩ evaluated through vectors.
fn nested_commutator(
    phi: &StateVector,
    left: &SparseOperator,
    h: &SparseOperator,
    right: &SparseOperator,
) -> Result<Complex64> {
    let left_dag = phi.apply(&left.adjoint())?;
    let r_phi = phi.apply(right)?;
    let h_phi = phi.apply(h)?;
    let l_phi = phi.apply(left)?;
    let a = left_dag.inner(&r_phi.apply(h)?)?;
    let b = left_dag.inner(&h_phi.apply(right)?)?;
    let c = h_phi.inner(&l_phi.apply(right)?)?;
    let d = phi.apply(&right.adjoint())?.inner(&l_phi.apply(h)?)?;
    Ok(a - b - c + d)
}

fn pair_operator(basis: &Arc<Basis>, terms: &[Term]) -> Result<SparseOperator> {
    SparseOperator::from_terms(basis, basis, terms, Closure::Project)
}

/// Variational energies of O_η(p)Φ and O_η(p)†Φ over the N-particle
/// sector ground state Φ, at each wave vector of `momenta`.
pub fn pairing_dispersion(
    graph: &LatticeGraph,
    params: &ModelParams,
    particles: usize,
    momenta: &[Vec<f64>],
    opts: &SolverOptions,
) -> Result<DispersionReport> {
    let clock = Stopwatch::start();
    let l = graph.num_sites();
    if !graph.is_translation_invariant() {
        return Err(Error::InvalidLattice(format!(
            "{} is not a periodic translation-invariant lattice",
            graph.name()
        )));
    }
    if particles == l {
        return Err(Error::HypothesisUnmet(
            "at half filling |O Phi|^2 has no lower bound; use N != |sites|".into(),
        ));
    }
    if particles > 2 * l || particles == 0 {
        return Err(Error::InvalidParams(format!(
            "particle number {particles} on {l} sites"
        )));
    }
    let variant = if particles < l {
        PairVariant::Creation
    } else {
        PairVariant::Annihilation
    };
    let key = sector_for(particles);
    let keys: Vec<SectorKey> = [-1i64, 0, 1]
        .iter()
        .filter_map(|&d| key.shifted(d, d, l))
        .collect();
    let wide = Arc::new(Basis::from_keys(l, keys)?);
    let sector = Arc::new(Basis::sector(l, key.n_up, key.n_down)?);
    let h_sector = build_hamiltonian(graph, params, &sector)?;
    let (phi, e0, manifold_dim, inversion_parity) = symmetric_ground_state(graph, &h_sector, opts)?;
    let phi = phi.embed(&wide)?;
    let h = build_hamiltonian(graph, params, &wide)?;
    let pieces = if params.is_uniform() {
        local_decomposition(graph, params, &wide)?
    } else {
        Vec::new()
    };
    let cells = graph.unit_cells();
    let geom = graph
        .geometry()
        .expect("translation-invariant lattices carry geometry");

    let evaluate = |p: &[f64]| -> Result<(Option<f64>, Option<f64>, f64, f64, SparseOperator)> {
        let o = pair_operator(&wide, &eta_terms(graph, p)?)?;
        let shifted = h.add_scaled(&SparseOperator::identity(&wide), -e0)?;
        let energy = |op: &SparseOperator| -> Result<(Option<f64>, f64)> {
            let v = phi.apply(op)?;
            let n = v.norm_sqr();
            if n <= 1e-14 {
                return Ok((None, n));
            }
            Ok((Some(v.inner(&v.apply(&shifted)?)?.re / n), n))
        };
        let (de, n) = energy(&o)?;
        let (dc, nc) = energy(&o.adjoint())?;
        Ok((de, dc, n, nc, o))
    };

    let points = momenta
        .par_iter()
        .map(|p| -> Result<DispersionPoint> {
            let (delta_e, delta_e_conjugate, norm_sq, norm_sq_conjugate, o) = evaluate(p)?;
            let double_commutator = nested_commutator(&phi, &o.adjoint(), &h, &o)?.re;
            let mut local_cos = 0.0;
            let mut local_sin = Complex64::new(0.0, 0.0);
            let mut local_sum = Complex64::new(0.0, 0.0);
            for piece in &pieces {
                let anchor = cells.cells[piece.cell][0];
                let phase = |x: usize| -> f64 {
                    let d = geom.displacement(anchor, x);
                    d.iter().zip(p).map(|(&dk, &pk)| dk as f64 * pk).sum()
                };
                let mut right = Vec::with_capacity(l);
                let mut cos_left = Vec::with_capacity(l);
                let mut sin_left = Vec::with_capacity(l);
                for x in 0..l {
                    let eta = graph.eta(x);
                    let th = phase(x);
                    let create = crate::fockspace::pair_creation_term(x, l);
                    right.push(create.clone().scaled(Complex64::from_polar(eta, th)));
                    let ann = create.adjoint();
                    cos_left.push(ann.clone().scaled(eta * th.cos()));
                    sin_left.push(ann.scaled(eta * th.sin()));
                }
                let right = pair_operator(&wide, &right)?;
                let s1 =
                    nested_commutator(&phi, &pair_operator(&wide, &cos_left)?, &piece.op, &right)?;
                let s2 =
                    nested_commutator(&phi, &pair_operator(&wide, &sin_left)?, &piece.op, &right)?;
                local_cos += s1.re;
                local_sin += s2;
                local_sum += s1 - Complex64::i() * s2;
            }
            let reflected: Vec<f64> = p.iter().map(|v| -v).collect();
            let delta_e_reflected = if p.iter().any(|&v| v != 0.0) {
                let (a, b, _, _, _) = evaluate(&reflected)?;
                match variant {
                    PairVariant::Creation => a,
                    PairVariant::Annihilation => b,
                }
            } else {
                None
            };
            Ok(DispersionPoint {
                p: p.clone(),
                p_norm: p.iter().map(|v| v * v).sum::<f64>().sqrt(),
                delta_e,
                delta_e_conjugate,
                norm_sq,
                norm_sq_conjugate,
                double_commutator,
                local_cos,
                local_sin,
                local_sum: if pieces.is_empty() {
                    Complex64::from(double_commutator)
                } else {
                    local_sum
                },
                delta_e_reflected,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut linear = 0.0;
    let mut quadratic = 0.0;
    for (i, b) in graph.bonds().iter().enumerate() {
        let d: f64 = geom
            .displacement(b.origin, b.target)
            .iter()
            .map(|&v| (v * v) as f64)
            .sum::<f64>()
            .sqrt();
        let t = params.hopping(graph, i).abs();
        linear += t * d;
        quadratic += t * d * d;
    }
    let vacancy = (l as f64 - particles as f64).abs();
    Ok(DispersionReport {
        lattice: graph.name().to_string(),
        params: params.to_string(),
        sites: l,
        particles,
        sector: key,
        ground_energy: e0,
        manifold_dim,
        inversion_parity,
        variant,
        points,
        c0: 4.0 * linear / vacancy,
        c0_tilde: 2.0 * quadratic / vacancy,
        mu: params.mu,
        seconds: clock.seconds(),
    })
}

/// The smallest nonzero wave vector along the first axis, 2π/L₁.
pub fn minimal_momentum(graph: &LatticeGraph) -> Result<Vec<f64>> {
    let geom = graph.geometry().ok_or_else(|| {
        Error::Incommensurate(format!("{} has no spatial embedding", graph.name()))
    })?;
    if !geom.periodic[0] {
        return Err(Error::Incommensurate("first axis is open".into()));
    }
    let mut p = vec![0.0; geom.dim()];
    p[0] = 2.0 * PI / geom.extents[0] as f64;
    Ok(p)
}

/// ΔE(0) and ΔE(2π/L) on periodic chains of the given lengths at a fixed
/// number of particles per site, and the family-wide linear and quadratic
/// constants.
pub fn dispersion_trend(
    lengths: &[usize],
    params: &ModelParams,
    filling: f64,
    opts: &SolverOptions,
) -> Result<(Vec<DispersionReport>, VerificationReport)> {
    let mut reports = Vec::with_capacity(lengths.len());
    let mut rows = VerificationReport::new();
    for &l in lengths {
        let graph = LatticeGraph::chain(l, true)?;
        let n = (filling * l as f64).round() as usize;
        let p = minimal_momentum(&graph)?;
        let report = pairing_dispersion(&graph, params, n, &[vec![0.0], p], opts)?;
        rows.extend(report.to_report());
        reports.push(report);
    }
    let ctx = Context::new(
        format!("chain{lengths:?}"),
        format!("{params} filling={filling}"),
    );
    let c0 = reports.iter().map(|r| r.c0).fold(0.0, f64::max);
    let c0_tilde = reports.iter().map(|r| r.c0_tilde).fold(0.0, f64::max);
    let all: Vec<(f64, f64, f64)> = reports.iter().flat_map(|r| r.ratios()).collect();
    let lin = all.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let quad = all.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    rows.push(CheckRecord::compare(
        "dispersion.trend-linear",
        &ctx,
        "max over lengths of (Delta E - 2 mu)/|p_min| <= C0",
        lin,
        Relation::AtMost,
        c0,
        EXPECTATION_TOL,
    ));
    if reports.iter().all(|r| r.inversion_parity.is_some()) {
        rows.push(CheckRecord::compare(
            "dispersion.trend-quadratic",
            &ctx,
            "max over lengths of (Delta E - 2 mu)/p_min^2 <= C0_tilde",
            quad,
            Relation::AtMost,
            c0_tilde,
            EXPECTATION_TOL,
        ));
    }
    for r in &reports {
        for (p, a, b) in r.ratios() {
            rows.push(CheckRecord::info(
                "dispersion.trend-constants",
                &Context::new(
                    r.lattice.clone(),
                    format!("{} N={} |p|={p}", r.params, r.particles),
                ),
                "empirical (Delta E - 2 mu)/|p| vs (Delta E - 2 mu)/p^2",
                a,
                b,
            ));
        }
    }
    Ok((reports, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_normalize() {
        let mut a =
            ExcitationCoefficients::new(vec![Complex64::from(3.0), Complex64::new(0.0, 4.0)])
                .unwrap();
        assert!(!a.normalized);
        a.normalize();
        assert!((a.weight() - 1.0).abs() < 1e-15);
        assert!(ExcitationCoefficients::new(vec![Complex64::from(0.0)]).is_err());
        assert!(ExcitationCoefficients::two_site(3, 1, 1).is_err());
    }

    #[test]
    fn chain_constants() {
        let g = LatticeGraph::chain(6, true).unwrap();
        let c = hopping_constants(&g, &ModelParams::new(-0.5, 1.0, 0.0));
        assert_eq!(c.t0, 0.5);
        assert_eq!(c.gamma_nn, 2.0);
        assert_eq!(c.gamma_tilde, 4.0);
    }

    #[test]
    fn excitation_identities_on_chain4() {
        let g = LatticeGraph::chain(4, true).unwrap();
        let p = ModelParams::new(0.8, 3.0, 0.4);
        let alpha = ExcitationCoefficients::new(vec![
            Complex64::new(0.3, 0.1),
            Complex64::from(-0.7),
            Complex64::new(0.0, 0.5),
            Complex64::from(0.2),
        ])
        .unwrap()
        .normalized();
        let r = verify_excitation_identities(&g, &p, &alpha).unwrap();
        assert!(r.all_passed(), "{:#?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn empty_lattice_norm_condition_is_one() {
        let g = LatticeGraph::chain(4, true).unwrap();
        let alpha = ExcitationCoefficients::two_site(4, 0, 1).unwrap();
        let r = gap_check(
            &g,
            &ModelParams::new(1.0, 2.0, 0.0),
            0,
            &alpha,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!((r.norm_condition - 1.0).abs() < 1e-14);
    }

    #[test]
    fn full_up_species_gives_empty_operator() {
        let b = Arc::new(Basis::sector(2, 2, 0).unwrap());
        let g = LatticeGraph::chain(2, false).unwrap();
        let alpha = ExcitationCoefficients::delta(2, 0).unwrap();
        let ex = build_excitation(&alpha, &g, &ModelParams::new(1.0, 1.0, 0.0), &b).unwrap();
        assert!(ex.empty);
    }

    #[test]
    fn atomic_limit_gap() {
        let g = LatticeGraph::chain(6, true).unwrap();
        let p = ModelParams::new(0.0, 2.0, 0.3);
        let alpha = ExcitationCoefficients::delta(6, 2).unwrap();
        let r = gap_check(&g, &p, 2, &alpha, &SolverOptions::default()).unwrap();
        assert!(r.ratio >= r.u_half_plus_mu - (2.0 * r.nu_down).sqrt() * 2.0 - 1e-12);
        // Pairs sit anywhere at t = 0, so only the bounds are expected to hold.
        assert!(r.manifold_dim > 1);
        let rep = r.to_report();
        assert!(rep.failures().all(|f| f.claim_id == "gap.unique-ground"));
    }

    #[test]
    fn half_filling_is_rejected() {
        let g = LatticeGraph::chain(4, true).unwrap();
        let err = pairing_dispersion(
            &g,
            &ModelParams::new(1.0, 2.0, 0.0),
            4,
            &[vec![0.0]],
            &SolverOptions::default(),
        );
        assert!(matches!(err, Err(Error::HypothesisUnmet(_))));
    }

    #[test]
    fn dispersion_small_chain() {
        let g = LatticeGraph::chain(4, true).unwrap();
        let p = minimal_momentum(&g).unwrap();
        let r = pairing_dispersion(
            &g,
            &ModelParams::new(1.0, 2.0, 0.0),
            2,
            &[vec![0.0], p],
            &SolverOptions::default(),
        )
        .unwrap();
        let rep = r.to_report();
        assert!(
            rep.all_passed(),
            "{:#?}",
            rep.failures().collect::<Vec<_>>()
        );
        assert!(r.points[0].delta_e.unwrap().abs() < 1e-10);
    }
}
