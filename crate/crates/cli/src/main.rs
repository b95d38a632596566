//! `hubbard-verify`: run one verification task described by a TOML config.
//!
//! Exit codes: 0 when every check passes, 1 when at least one fails, 2 on a
//! configuration, input or numerical error. Nothing is written unless the
//! task completes.

mod config;
mod tasks;
mod writer;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Format, RunConfig};
use hubbard_core::report::Verdict;

#[derive(Parser, Debug)]
#[command(
    name = "hubbard-verify",
    version,
    about = "Run a Hubbard-model verification task from a TOML config"
)]
struct Cli {
    /// Run configuration.
    config: PathBuf,
    /// Report path, overriding `output.path`.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Report format, overriding `output.format`.
    #[arg(short, long, value_enum)]
    format: Option<Format>,
    /// Validate the config and print the resolved document without running.
    #[arg(long)]
    dry_run: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let mut raw = RunConfig::load(&cli.config)?;
    if let Some(f) = cli.format {
        raw.output.format = f;
    }
    if let Some(p) = &cli.output {
        raw.output.path = Some(p.clone());
    }
    let (config, graph) = raw.resolve(&cli.config)?;
    if cli.dry_run {
        print!("{}", config.to_toml());
        return Ok(true);
    }

    log::info!(
        "{} on {} ({})",
        config.task.kind,
        graph.name(),
        config.model.params()
    );
    let report = tasks::run(&config, &graph)?;
    let body = writer::render(report.rows(), config.output.format)?;
    writer::write_file(config.report_path(), &body)?;
    writer::write_file(&config.echo_path(), config.to_toml().as_bytes())?;

    let count = |v: Verdict| report.rows().iter().filter(|r| r.verdict == v).count();
    for r in report.failures() {
        eprintln!(
            "FAIL {} [{} {}] {}: lhs {} rhs {} margin {:.3e}",
            r.claim_id, r.lattice, r.params, r.quantity, r.lhs, r.rhs, r.margin
        );
    }
    eprintln!(
        "{}: {} pass, {} fail, {} info -> {}",
        config.task.kind,
        count(Verdict::Pass),
        count(Verdict::Fail),
        count(Verdict::Info),
        config.report_path().display()
    );
    Ok(report.all_passed())
}
