use num_complex::Complex64;
use proptest::prelude::*;

use hubbard_core::excitations::{
    hopping_constants, verify_excitation_identities, ExcitationCoefficients,
};
use hubbard_core::lattice::{LatticeGraph, Sublattice};
use hubbard_core::model::ModelParams;
use hubbard_core::observables::{thermal_scan, verify_transform_identities};
use hubbard_core::report::VerificationReport;
use hubbard_core::spectra::SolverOptions;

fn graphs() -> Vec<LatticeGraph> {
    vec![
        LatticeGraph::chain(2, false).unwrap(),
        LatticeGraph::chain(4, true).unwrap(),
        LatticeGraph::chain(5, false).unwrap(),
        LatticeGraph::star(3).unwrap(),
        LatticeGraph::star(5).unwrap(),
    ]
}

/// Bipartite K_{2,3} with arbitrary nonzero weights.
fn weighted_graph(w: &[f64]) -> LatticeGraph {
    use Sublattice::{A, B};
    let edges: Vec<(usize, usize, f64)> = (0..2)
        .flat_map(|a| (2..5).map(move |b| (a, b)))
        .zip(w)
        .map(|((a, b), &w)| (a, b, w))
        .collect();
    LatticeGraph::custom("k23", vec![A, A, B, B, B], &edges).unwrap()
}

fn amplitudes(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)
        .prop_map(|v| {
            v.into_iter()
                .map(|(re, im)| Complex64::new(re, im))
                .collect()
        })
        .prop_filter("nonzero", |v: &Vec<Complex64>| {
            v.iter().any(|a| a.norm() > 1e-3)
        })
}

fn assert_passes(report: &VerificationReport) -> Result<(), TestCaseError> {
    let failures: Vec<String> = report.failures().map(|r| format!("{r:?}")).collect();
    prop_assert!(failures.is_empty(), "{}", failures.join("\n"));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tilde_weight_bounded_by_gamma(graph in 0..5usize, alpha in amplitudes(6), t in 0.1..3.0f64) {
        let g = &graphs()[graph];
        let p = ModelParams::new(t, 2.0, 0.0);
        let a = ExcitationCoefficients::new(alpha[..g.num_sites()].to_vec());
        prop_assume!(a.is_ok());
        let a = a.unwrap().normalized();
        let tilde: f64 = a.tilde(g, &p).iter().map(|z| z.norm_sqr()).sum();
        let gamma = hopping_constants(g, &p).gamma_tilde;
        prop_assert!(tilde <= gamma * (1.0 + 1e-12), "{tilde} > {gamma}");
    }

    #[test]
    fn tilde_weight_bounded_on_weighted_graph(
        w in prop::collection::vec(prop_oneof![-2.0..-0.1f64, 0.1..2.0f64], 6),
        alpha in amplitudes(5),
    ) {
        let g = weighted_graph(&w);
        let p = ModelParams::new(1.0, 2.0, 0.0);
        let a = ExcitationCoefficients::new(alpha).unwrap().normalized();
        let tilde: f64 = a.tilde(&g, &p).iter().map(|z| z.norm_sqr()).sum();
        let gamma = hopping_constants(&g, &p).gamma_tilde;
        prop_assert!(tilde <= gamma * (1.0 + 1e-12), "{tilde} > {gamma}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn excitation_algebra_holds(graph in 0..4usize, alpha in amplitudes(6), t in 0.1..2.0f64, u in 0.0..6.0f64, mu in 0.0..1.0f64) {
        let g = &graphs()[graph];
        let a = ExcitationCoefficients::new(alpha[..g.num_sites()].to_vec());
        prop_assume!(a.is_ok());
        let report = verify_excitation_identities(g, &ModelParams::new(t, u, mu), &a.unwrap()).unwrap();
        assert_passes(&report)?;
    }

    #[test]
    fn thermal_claims_hold_at_half_filling(graph in 0..4usize, t in 0.2..2.0f64, u in 0.5..6.0f64, beta in 0.1..6.0f64) {
        let g = &graphs()[graph];
        let report = thermal_scan(g, &ModelParams::new(t, u, 0.0), &[beta], &SolverOptions::default()).unwrap();
        prop_assert!(!report.is_empty());
        assert_passes(&report)?;
    }

    #[test]
    fn transforms_hold_for_any_parameters(graph in 0..4usize, t in 0.2..2.0f64, u in 0.0..6.0f64, mu in 0.0..1.0f64) {
        let g = &graphs()[graph];
        let report = verify_transform_identities(g, &ModelParams::new(t, u, mu), &SolverOptions::default()).unwrap();
        assert_passes(&report)?;
    }
}
