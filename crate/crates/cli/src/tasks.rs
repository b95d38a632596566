//! Task dispatch: one resolved config in, one verification report out.

use std::sync::Arc;

use hubbard_core::excitations::{gap_check, pairing_dispersion, verify_excitation_identities};
use hubbard_core::fockspace::{Basis, SectorKey};
use hubbard_core::lattice::LatticeGraph;
use hubbard_core::model::build_hamiltonian;
use hubbard_core::observables::{
    lieb_ground_check, magnetization_scan, thermal_scan, verify_bound_chain, verify_lro,
    verify_operator_identities, verify_parity_lemma, verify_transform_identities,
};
use hubbard_core::report::{CheckRecord, Context, Stopwatch, VerificationReport};
use hubbard_core::spectra::{lowest_levels, BlockLabel};
use hubbard_core::{Error, Result};

use crate::config::{RunConfig, TaskKind};

pub fn run(config: &RunConfig, graph: &LatticeGraph) -> Result<VerificationReport> {
    let clock = Stopwatch::start();
    let params = config.model.params();
    let opts = config.numerics.solver();
    let task = &config.task;
    let l = graph.num_sites();
    let mut report = match task.kind {
        TaskKind::VerifyIdentities => {
            let alpha = task
                .alpha
                .as_ref()
                .expect("resolved")
                .coefficients(l)
                .map_err(config_error)?;
            let mut r = verify_operator_identities(graph, &params)?;
            r.extend(verify_transform_identities(graph, &params, &opts)?);
            r.extend(verify_excitation_identities(graph, &params, &alpha)?);
            r
        }
        TaskKind::ThermalScan => {
            let betas = task.betas.as_deref().expect("resolved");
            let mut r = thermal_scan(graph, &params, betas, &opts)?;
            if l.is_multiple_of(2) && params.mu == 0.0 {
                r.extend(verify_bound_chain(graph, &params, betas, &opts)?);
                r.extend(verify_parity_lemma(graph, &params, betas, &opts)?);
            } else {
                log::info!("bound chain and parity lemma need an even lattice at mu = 0; skipped");
            }
            r
        }
        TaskKind::Lro => verify_lro(graph, &params, &opts)?,
        TaskKind::Magnetization => magnetization_scan(graph, &params, &config.model.fields, &opts)?,
        TaskKind::Gap => {
            let alpha = task
                .alpha
                .as_ref()
                .expect("resolved")
                .coefficients(l)
                .map_err(config_error)?;
            let particles = task.particles.expect("resolved");
            gap_check(graph, &params, particles, &alpha, &opts)?.to_report()
        }
        TaskKind::Dispersion => {
            let momenta = task.momenta.as_deref().expect("resolved");
            let particles = task.particles.expect("resolved");
            pairing_dispersion(graph, &params, particles, momenta, &opts)?.to_report()
        }
        TaskKind::Spectrum => spectrum(config, graph)?,
    };
    if config.output.record_timing {
        report.stamp(clock.seconds());
    } else {
        report.clear_timing();
    }
    Ok(report)
}

fn config_error(e: crate::config::ConfigError) -> Error {
    Error::InvalidParams(e.0)
}

/// The lowest levels of every (N↑, N↓) sector, followed by the ground-state
/// structure checks at the configured particle number.
fn spectrum(config: &RunConfig, graph: &LatticeGraph) -> Result<VerificationReport> {
    let params = config.model.params();
    let opts = config.numerics.solver();
    let l = graph.num_sites();
    if l > opts.thermal_site_limit && !opts.allow_large {
        return Err(Error::SizeGuard {
            sites: l,
            limit: opts.thermal_site_limit,
        });
    }
    let levels = config.task.levels.expect("resolved");
    let ctx = Context::new(graph.name(), params.to_string());
    let mut table = Vec::new();
    for nu in 0..=l {
        for nd in 0..=l {
            let basis = Arc::new(Basis::sector(l, nu, nd)?);
            let h = build_hamiltonian(graph, &params, &basis)?;
            let label = BlockLabel::Sector(SectorKey::new(nu, nd));
            let block = lowest_levels(&h, label, levels, &opts)?;
            for (k, &e) in block.values.iter().take(levels).enumerate() {
                table.push((nu, nd, k, e));
            }
        }
    }
    let e0 = table.iter().map(|r| r.3).fold(f64::INFINITY, f64::min);
    let mut report: VerificationReport = table
        .into_iter()
        .map(|(nu, nd, k, e)| {
            CheckRecord::info(
                "spectrum.level",
                &ctx,
                format!("sector ({nu},{nd}) level {k} vs global ground energy"),
                e,
                e0,
            )
        })
        .collect();
    let particles = config.task.particles.expect("resolved");
    let attractive = params.u.uniform_value().is_some_and(|u| u >= 0.0);
    if particles > 0 && particles.is_multiple_of(2) && attractive {
        report.extend(lieb_ground_check(graph, &params, particles, &opts)?);
    } else {
        log::info!("ground-state structure checks need U >= 0 and an even positive N; skipped");
    }
    Ok(report)
}
