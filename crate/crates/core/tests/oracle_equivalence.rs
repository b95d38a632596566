mod oracle;

use std::sync::Arc;

use hubbard_core::fockspace::{Basis, BasisRestriction};
use hubbard_core::lattice::LatticeGraph;
use hubbard_core::model::{build_hamiltonian, ModelParams};
use hubbard_core::spectra::{global_ground_manifold, Partition, SolverOptions};

#[test]
fn library_matches_dense_oracle() {
    let rows = oracle::suite::run();
    assert!(rows.len() > 100);
    let bad: Vec<_> = rows.iter().filter(|c| c.error() > 1e-9).collect();
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn jacobi_reproduces_frozen_dimer_energy() {
    let g = LatticeGraph::chain(2, false).unwrap();
    let o = oracle::Oracle::new(2);
    let (values, _) = oracle::jacobi_eigh(&o.hamiltonian(&g, 1.0, 4.0, 0.0));
    assert!((values[0] + 2.828_427_124_746_19).abs() < 1e-12);
}

#[test]
fn frozen_dimer_ground_energies() {
    let g = LatticeGraph::chain(2, false).unwrap();
    let full = Arc::new(Basis::new(2, BasisRestriction::Full).unwrap());
    let opts = SolverOptions::default();
    let e = |p: ModelParams| {
        let h = build_hamiltonian(&g, &p, &full).unwrap();
        global_ground_manifold(&h, Partition::Sectors, &opts)
            .unwrap()
            .energy
    };
    assert!((e(ModelParams::new(1.0, 4.0, 0.0)) + 2.828_427_124_746_19).abs() < 1e-12);
    assert!((e(ModelParams::new(1.0, 0.0, 0.0)) + 2.0).abs() < 1e-12);
    let hb = hubbard_core::model::build_field_hamiltonian(
        &g,
        &ModelParams::new(1.0, 4.0, 0.0).with_field(0.5),
        &full,
    )
    .unwrap();
    let mb = global_ground_manifold(&hb, Partition::Towers, &opts).unwrap();
    assert!((mb.energy + 3.433_664_629_783_287).abs() < 1e-12);
}
