//! Library results against the dense oracle on every small test system.

use std::sync::Arc;

use hubbard_core::fockspace::{Basis, BasisRestriction, SectorKey};
use hubbard_core::lattice::LatticeGraph;
use hubbard_core::model::{build_field_hamiltonian, build_hamiltonian, ModelParams};
use hubbard_core::observables::{pairing_correlations, OrderParameters};
use hubbard_core::spectra::{
    global_ground_manifold, lowest_levels, BlockLabel, Partition, SolverOptions, ThermalEnsemble,
};
use hubbard_core::symmetry::total_spin_squared;

use super::{Gibbs, Oracle};

/// One compared quantity: library value, oracle value.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub label: String,
    pub library: f64,
    pub oracle: f64,
}

impl Comparison {
    pub fn error(&self) -> f64 {
        (self.library - self.oracle).abs()
    }
}

pub fn systems() -> Vec<LatticeGraph> {
    vec![
        LatticeGraph::chain(2, false).unwrap(),
        LatticeGraph::chain(3, false).unwrap(),
        LatticeGraph::chain(4, true).unwrap(),
        LatticeGraph::star(3).unwrap(),
    ]
}

pub fn parameter_sets() -> Vec<(f64, f64, f64)> {
    vec![(1.0, 4.0, 0.0), (0.7, 2.5, 0.3), (1.0, 0.0, 0.0)]
}

pub fn run() -> Vec<Comparison> {
    let opts = SolverOptions::default();
    let mut out = Vec::new();
    for g in systems() {
        let l = g.num_sites();
        let oracle = Oracle::new(l);
        let full = Arc::new(Basis::new(l, BasisRestriction::Full).unwrap());
        for (t, u, mu) in parameter_sets() {
            let tag = format!("{} t={t} U={u} mu={mu}", g.name());
            let mut push = |what: &str, library: f64, reference: f64| {
                out.push(Comparison {
                    label: format!("{tag}: {what}"),
                    library,
                    oracle: reference,
                })
            };
            let params = ModelParams::new(t, u, mu);
            let dense = oracle.hamiltonian(&g, t, u, mu);
            let gibbs = Gibbs::new(&dense);

            let h = build_hamiltonian(&g, &params, &full).unwrap();
            let manifold = global_ground_manifold(&h, Partition::Sectors, &opts).unwrap();
            push("ground energy", manifold.energy, gibbs.ground_energy());
            let order = OrderParameters::new(&g, &full).unwrap();
            let o = oracle.o_super();
            let oo = o.transpose() * &o;
            let window = opts.degeneracy_window(gibbs.ground_energy());
            let (ground_oo, dim) = gibbs.ground_average(&oo, window);
            push(
                "ground manifold dimension",
                manifold.dim() as f64,
                dim as f64,
            );
            push(
                "ground <O_super^dag O_super>",
                manifold.expectation(&order.o_super_sq).unwrap().re,
                ground_oo,
            );

            for nu in 0..=l {
                for nd in 0..=l {
                    let sector = Arc::new(Basis::sector(l, nu, nd).unwrap());
                    let hs = build_hamiltonian(&g, &params, &sector).unwrap();
                    let label = BlockLabel::Sector(SectorKey::new(nu, nd));
                    let lib = lowest_levels(&hs, label, 1, &opts).unwrap().values[0];
                    let (sub, _) = oracle.restrict(&dense, |a, b| a == nu && b == nd);
                    let reference = super::jacobi_eigh(&sub).0[0];
                    push(&format!("sector ({nu},{nd}) ground energy"), lib, reference);
                }
            }

            let ensemble = ThermalEnsemble::new(&h, &opts).unwrap();
            let s2 = total_spin_squared(&full).unwrap();
            let s2_dense = oracle.total_spin_squared();
            let n_dense = (0..l).fold(oracle.id() * 0.0, |acc, x| {
                acc + oracle.n(x, false) + oracle.n(x, true)
            });
            let n_op = hubbard_core::fockspace::total_number(&full);
            for beta in [0.5, 2.0] {
                let state = ensemble.at(beta);
                let k = pairing_correlations(&state, &g).unwrap();
                for x in 0..l {
                    for y in 0..l {
                        push(
                            &format!("beta={beta} K[{x}][{y}]"),
                            k.get(x, y),
                            gibbs.expectation(&oracle.pair_hop(x, y), beta),
                        );
                    }
                }
                push(
                    &format!("beta={beta} <O_super^dag O_super>"),
                    state.expectation(&order.o_super_sq).unwrap().re,
                    gibbs.expectation(&oo, beta),
                );
                push(
                    &format!("beta={beta} <S^2>"),
                    state.expectation(&s2).unwrap().re,
                    gibbs.expectation(&s2_dense, beta),
                );
                push(
                    &format!("beta={beta} <N>"),
                    state.expectation(&n_op).unwrap().re,
                    gibbs.expectation(&n_dense, beta),
                );
            }

            for b in [0.5, 2.0] {
                let hb = build_field_hamiltonian(&g, &params.clone().with_field(b), &full).unwrap();
                let mb = global_ground_manifold(&hb, Partition::Towers, &opts).unwrap();
                let lambda = &o + o.transpose();
                let dense_b = &dense - lambda * (b * l as f64);
                push(
                    &format!("B={b} ground energy"),
                    mb.energy,
                    super::jacobi_eigh(&dense_b).0[0],
                );
            }
        }
    }
    out
}
