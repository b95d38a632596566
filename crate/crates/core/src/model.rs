//! Hubbard Hamiltonian assembly.
//!
//! H = Σ_{⟨x,y⟩} t_xy Σ_σ (c†_{x,σ} c_{y,σ} + h.c.)
//!     − Σ_x U_x (n_{x,↑} − ½)(n_{x,↓} − ½) + μ Σ_x n_x
//!
//! with one hopping term per undirected bond. The field Hamiltonian adds
//! −B Σ_x (c_{x,↓} c_{x,↑} + h.c.), which conserves only N↑ − N↓.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::{
    hop_term, is_occupied, pair_annihilation_term, pair_creation_term, Basis, Closure, Config,
    SparseOperator, Spin, Term,
};
use crate::lattice::LatticeGraph;

/// On-site attraction strength, uniform or per site.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Coupling {
    Uniform(f64),
    PerSite(Vec<f64>),
}

impl Coupling {
    pub fn at(&self, x: usize) -> f64 {
        match self {
            Coupling::Uniform(u) => *u,
            Coupling::PerSite(v) => v[x],
        }
    }

    pub fn uniform_value(&self) -> Option<f64> {
        match self {
            Coupling::Uniform(u) => Some(*u),
            Coupling::PerSite(v) => {
                let first = *v.first()?;
                v.iter().all(|&u| u == first).then_some(first)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelParams {
    /// Hopping scale; bond amplitudes are `t × bond weight`.
    pub t: f64,
    /// Explicit per-bond amplitudes replacing `t × weight`, aligned with the
    /// lattice's bond list.
    pub bond_hopping: Option<Vec<f64>>,
    pub u: Coupling,
    /// Chemical potential, entering as +μ Σ n_x.
    pub mu: f64,
    /// Pairing field strength of the field Hamiltonian.
    pub b: f64,
}

impl ModelParams {
    pub fn new(t: f64, u: f64, mu: f64) -> Self {
        ModelParams {
            t,
            bond_hopping: None,
            u: Coupling::Uniform(u),
            mu,
            b: 0.0,
        }
    }

    pub fn with_field(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn validate(&self, graph: &LatticeGraph) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !self.t.is_finite() {
            return bad(format!("hopping t = {}", self.t));
        }
        if let Some(h) = &self.bond_hopping {
            if h.len() != graph.bonds().len() {
                return bad(format!(
                    "{} bond amplitudes for {} bonds",
                    h.len(),
                    graph.bonds().len()
                ));
            }
            if h.iter().any(|v| !v.is_finite()) {
                return bad("non-finite bond amplitude".into());
            }
        }
        if let Coupling::PerSite(v) = &self.u {
            if v.len() != graph.num_sites() {
                return bad(format!(
                    "{} couplings for {} sites",
                    v.len(),
                    graph.num_sites()
                ));
            }
        }
        for x in 0..graph.num_sites() {
            let u = self.u.at(x);
            if !(u.is_finite() && u >= 0.0) {
                return bad(format!(
                    "U at site {x} is {u}; the attraction must be nonnegative"
                ));
            }
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return bad(format!(
                "chemical potential {} must be nonnegative",
                self.mu
            ));
        }
        if !(self.b.is_finite() && self.b >= 0.0) {
            return bad(format!("pairing field {} must be nonnegative", self.b));
        }
        Ok(())
    }

    /// Physical amplitude t_xy of bond `i`.
    pub fn hopping(&self, graph: &LatticeGraph, i: usize) -> f64 {
        match &self.bond_hopping {
            Some(h) => h[i],
            None => self.t * graph.bonds()[i].weight,
        }
    }

    /// t₀ = max |t_xy|.
    pub fn max_hopping(&self, graph: &LatticeGraph) -> f64 {
        (0..graph.bonds().len())
            .map(|i| self.hopping(graph, i).abs())
            .fold(0.0, f64::max)
    }

    /// Whether the parameters look the same from every unit cell.
    pub fn is_uniform(&self) -> bool {
        self.bond_hopping.is_none() && self.u.uniform_value().is_some()
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={}", self.t)?;
        if self.bond_hopping.is_some() {
            f.write_str("(per-bond)")?;
        }
        match &self.u {
            Coupling::Uniform(u) => write!(f, " U={u}")?,
            Coupling::PerSite(v) => write!(f, " U={v:?}")?,
        }
        write!(f, " mu={}", self.mu)?;
        if self.b != 0.0 {
            write!(f, " B={}", self.b)?;
        }
        Ok(())
    }
}

/// Hopping terms of one spin species.
pub fn hopping_terms(graph: &LatticeGraph, params: &ModelParams, spin: Spin) -> Vec<Term> {
    let l = graph.num_sites();
    let mut terms = Vec::with_capacity(2 * graph.bonds().len());
    for (i, b) in graph.bonds().iter().enumerate() {
        let t = params.hopping(graph, i);
        if t == 0.0 {
            continue;
        }
        terms.push(hop_term(b.origin, b.target, spin, l, t));
        terms.push(hop_term(b.target, b.origin, spin, l, t));
    }
    terms
}

/// Diagonal value of −Σ_x U_x (n_{x,↑} − ½)(n_{x,↓} − ½) on a configuration.
pub fn interaction_energy(config: Config, u: &Coupling, num_sites: usize) -> f64 {
    (0..num_sites)
        .map(|x| {
            let up = if is_occupied(config, x, Spin::Up, num_sites) {
                0.5
            } else {
                -0.5
            };
            let down = if is_occupied(config, x, Spin::Down, num_sites) {
                0.5
            } else {
                -0.5
            };
            -u.at(x) * up * down
        })
        .sum()
}

/// The pieces of the Hamiltonian on one basis.
#[derive(Clone, Debug)]
pub struct HamiltonianParts {
    pub hop_up: SparseOperator,
    pub hop_down: SparseOperator,
    pub hop: SparseOperator,
    pub interaction: SparseOperator,
    pub number: SparseOperator,
}

fn check_sites(graph: &LatticeGraph, basis: &Basis) -> Result<()> {
    if graph.num_sites() != basis.num_sites() {
        return Err(Error::BasisMismatch(format!(
            "lattice has {} sites, basis {}",
            graph.num_sites(),
            basis.num_sites()
        )));
    }
    Ok(())
}

pub fn build_parts(
    graph: &LatticeGraph,
    params: &ModelParams,
    basis: &Arc<Basis>,
) -> Result<HamiltonianParts> {
    params.validate(graph)?;
    check_sites(graph, basis)?;
    let l = graph.num_sites();
    let hop_up = SparseOperator::from_terms(
        basis,
        basis,
        &hopping_terms(graph, params, Spin::Up),
        Closure::Strict,
    )?;
    let hop_down = SparseOperator::from_terms(
        basis,
        basis,
        &hopping_terms(graph, params, Spin::Down),
        Closure::Strict,
    )?;
    let hop = hop_up.add(&hop_down)?;
    let u = params.u.clone();
    let interaction = SparseOperator::diagonal(basis, move |c| {
        Complex64::from(interaction_energy(c, &u, l))
    });
    let number = crate::fockspace::total_number(basis);
    Ok(HamiltonianParts {
        hop_up,
        hop_down,
        hop,
        interaction,
        number,
    })
}

fn assemble(
    graph: &LatticeGraph,
    params: &ModelParams,
    basis: &Arc<Basis>,
    extra: Vec<Term>,
) -> Result<SparseOperator> {
    params.validate(graph)?;
    check_sites(graph, basis)?;
    let l = graph.num_sites();
    let mut terms = hopping_terms(graph, params, Spin::Up);
    terms.extend(hopping_terms(graph, params, Spin::Down));
    terms.extend(extra);
    let (u, mu) = (params.u.clone(), params.mu);
    SparseOperator::from_columns(
        basis.clone(),
        basis.clone(),
        Closure::Strict,
        |config, out| {
            let diag = interaction_energy(config, &u, l) + mu * config.count_ones() as f64;
            if diag != 0.0 {
                out.push((config, Complex64::from(diag)));
            }
            for t in &terms {
                if let Some(image) = t.apply(config) {
                    out.push(image);
                }
            }
        },
    )
}

/// The Hamiltonian on `basis`, which must be closed under it (any union of
/// sectors is).
pub fn build_hamiltonian(
    graph: &LatticeGraph,
    params: &ModelParams,
    basis: &Arc<Basis>,
) -> Result<SparseOperator> {
    assemble(graph, params, basis, Vec::new())
}

/// H(B) = H − B Σ_x (c_{x,↓} c_{x,↑} + c†_{x,↑} c†_{x,↓}) with B = `params.b`.
/// The basis must be closed under pair creation and annihilation, e.g. a
/// fixed-magnetization tower or the full space.
pub fn build_field_hamiltonian(
    graph: &LatticeGraph,
    params: &ModelParams,
    basis: &Arc<Basis>,
) -> Result<SparseOperator> {
    let l = graph.num_sites();
    let mut extra = Vec::new();
    if params.b != 0.0 {
        for x in 0..l {
            extra.push(pair_annihilation_term(x, l).scaled(-params.b));
            extra.push(pair_creation_term(x, l).scaled(-params.b));
        }
    }
    assemble(graph, params, basis, extra)
}

/// Hamiltonian piece of one unit cell.
#[derive(Clone, Debug)]
pub struct LocalTerm {
    pub cell: usize,
    /// Sites the piece acts on.
    pub support: Vec<usize>,
    pub op: SparseOperator,
}

/// Splits H into congruent cell pieces: each cell carries its own sites'
/// interaction and chemical potential terms and the hopping of the bonds it
/// owns (see [`LatticeGraph::unit_cells`]). Requires uniform parameters.
pub fn local_decomposition(
    graph: &LatticeGraph,
    params: &ModelParams,
    basis: &Arc<Basis>,
) -> Result<Vec<LocalTerm>> {
    params.validate(graph)?;
    check_sites(graph, basis)?;
    if !params.is_uniform() {
        return Err(Error::InvalidParams(
            "local decomposition needs uniform hopping and coupling".into(),
        ));
    }
    let l = graph.num_sites();
    let cells = graph.unit_cells();
    (0..cells.len())
        .map(|c| {
            let mut terms = Vec::new();
            for (i, b) in graph.bonds().iter().enumerate() {
                if cells.bond_cell[i] != c {
                    continue;
                }
                let t = params.hopping(graph, i);
                for spin in Spin::BOTH {
                    terms.push(hop_term(b.origin, b.target, spin, l, t));
                    terms.push(hop_term(b.target, b.origin, spin, l, t));
                }
            }
            let members = cells.cells[c].clone();
            let (u, mu) = (params.u.clone(), params.mu);
            let op = SparseOperator::from_columns(
                basis.clone(),
                basis.clone(),
                Closure::Strict,
                |config, out| {
                    let mut diag = 0.0;
                    for &x in &members {
                        let nu = is_occupied(config, x, Spin::Up, l) as u8 as f64;
                        let nd = is_occupied(config, x, Spin::Down, l) as u8 as f64;
                        diag += -u.at(x) * (nu - 0.5) * (nd - 0.5) + mu * (nu + nd);
                    }
                    if diag != 0.0 {
                        out.push((config, Complex64::from(diag)));
                    }
                    for t in &terms {
                        if let Some(image) = t.apply(config) {
                            out.push(image);
                        }
                    }
                },
            )?;
            Ok(LocalTerm {
                cell: c,
                support: cells.supports[c].clone(),
                op,
            })
        })
        .collect()
}
