//! Run configuration.
//!
//! One TOML document selects a lattice, the model parameters, a single task
//! and the numerics. Every optional field is filled in by [`RunConfig::resolve`],
//! and the resolved document is what gets echoed next to the report.
//!
//! ```toml
//! [lattice]
//! type = "chain"          # chain | star | hypercube | lieb2d | custom
//! length = 4
//! pbc = true
//!
//! [model]
//! t = 1.0
//! u = 4.0                 # attraction strength, U >= 0 is attractive
//! mu = 0.0
//! fields = [0.5, 1.0, 2.0]
//!
//! [task]
//! kind = "gap"            # verify-identities | lro | magnetization | gap |
//!                         # dispersion | thermal-scan | spectrum
//! particles = 2
//! alpha = { form = "delta", site = 0 }
//!
//! [numerics]
//! seed = 24301
//!
//! [output]
//! format = "csv"          # csv | json
//! path = "gap.csv"
//! record_timing = false
//! ```
//!
//! Lattice blocks:
//!
//! - `chain`: `length`, `pbc`
//! - `star`: `arms`
//! - `hypercube`: `dims = [lx, ly, ...]`, `pbc`
//! - `lieb2d`: `lx`, `ly` (unit cells), `pbc`
//! - `custom`: `sites`, `sublattice = ["A", "B", ...]`,
//!   `edges = [[x, y, w], ...]`; the bond amplitude is `t * w`.
//!
//! Task fields, with their defaults:
//!
//! - `betas` (thermal-scan): `[0.5, 1.0, 2.0]`
//! - `particles`: 2 for gap, `|sites|/2` for dispersion, the largest even
//!   number not above `|sites|` for spectrum
//! - `alpha` (gap, verify-identities): `{ form = "delta", site = 0 }`; also
//!   `{ form = "two-site", sites = [x, y] }` and
//!   `{ form = "general", re = [...], im = [...] }`
//! - `momenta` (dispersion): zero and the smallest nonzero lattice momentum
//! - `levels` (spectrum): 4

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hubbard_core::excitations::{minimal_momentum, ExcitationCoefficients};
use hubbard_core::lattice::{LatticeGraph, Sublattice};
use hubbard_core::model::ModelParams;
use hubbard_core::spectra::{KrylovOptions, SolverOptions};
use hubbard_core::Complex64;

/// A configuration problem, reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeSpec,
    pub model: ModelSpec,
    pub task: TaskSpec,
    #[serde(default)]
    pub numerics: NumericsSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LatticeSpec {
    Chain {
        length: usize,
        #[serde(default)]
        pbc: bool,
    },
    Star {
        arms: usize,
    },
    Hypercube {
        dims: Vec<usize>,
        #[serde(default)]
        pbc: bool,
    },
    Lieb2d {
        lx: usize,
        ly: usize,
        #[serde(default)]
        pbc: bool,
    },
    Custom {
        sites: usize,
        sublattice: Vec<SublatticeLabel>,
        edges: Vec<(usize, usize, f64)>,
    },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub enum SublatticeLabel {
    A,
    B,
}

impl LatticeSpec {
    pub fn build(&self) -> Result<LatticeGraph, ConfigError> {
        let graph = match self {
            LatticeSpec::Chain { length, pbc } => LatticeGraph::chain(*length, *pbc),
            LatticeSpec::Star { arms } => LatticeGraph::star(*arms),
            LatticeSpec::Hypercube { dims, pbc } => LatticeGraph::hypercube(dims, *pbc),
            LatticeSpec::Lieb2d { lx, ly, pbc } => LatticeGraph::lieb2d(*lx, *ly, *pbc),
            LatticeSpec::Custom {
                sites,
                sublattice,
                edges,
            } => {
                if sublattice.len() != *sites {
                    return invalid(format!(
                        "lattice: {} sublattice labels for {sites} sites",
                        sublattice.len()
                    ));
                }
                let labels = sublattice
                    .iter()
                    .map(|s| match s {
                        SublatticeLabel::A => Sublattice::A,
                        SublatticeLabel::B => Sublattice::B,
                    })
                    .collect();
                LatticeGraph::custom("custom", labels, edges)
            }
        };
        graph.map_err(|e| ConfigError(format!("lattice: {e}")))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default = "default_t")]
    pub t: f64,
    pub u: f64,
    #[serde(default)]
    pub mu: f64,
    /// Pairing field strengths for the magnetization task.
    #[serde(default = "default_fields")]
    pub fields: Vec<f64>,
}

fn default_t() -> f64 {
    1.0
}

fn default_fields() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

impl ModelSpec {
    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.t, self.u, self.mu)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    VerifyIdentities,
    Lro,
    Magnetization,
    Gap,
    Dispersion,
    ThermalScan,
    Spectrum,
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::VerifyIdentities => "verify-identities",
            TaskKind::Lro => "lro",
            TaskKind::Magnetization => "magnetization",
            TaskKind::Gap => "gap",
            TaskKind::Dispersion => "dispersion",
            TaskKind::ThermalScan => "thermal-scan",
            TaskKind::Spectrum => "spectrum",
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub kind: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momenta: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlphaSpec {
    Delta { site: usize },
    TwoSite { sites: [usize; 2] },
    General { re: Vec<f64>, im: Vec<f64> },
}

impl AlphaSpec {
    pub fn coefficients(&self, num_sites: usize) -> Result<ExcitationCoefficients, ConfigError> {
        let built = match self {
            AlphaSpec::Delta { site } => ExcitationCoefficients::delta(num_sites, *site),
            AlphaSpec::TwoSite { sites: [x, y] } => {
                ExcitationCoefficients::two_site(num_sites, *x, *y)
            }
            AlphaSpec::General { re, im } => {
                if re.len() != num_sites || im.len() != num_sites {
                    return invalid(format!(
                        "task.alpha: expected {num_sites} real and imaginary parts, got {} and {}",
                        re.len(),
                        im.len()
                    ));
                }
                ExcitationCoefficients::new(
                    re.iter()
                        .zip(im)
                        .map(|(&a, &b)| Complex64::new(a, b))
                        .collect(),
                )
            }
        };
        built.map_err(|e| ConfigError(format!("task.alpha: {e}")))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsSpec {
    /// Blocks up to this dimension are diagonalized densely.
    pub dense_threshold: usize,
    /// Relative window defining degenerate ground levels.
    pub degeneracy: f64,
    /// Required eigenpair residual of the Krylov solver.
    pub krylov_tolerance: f64,
    pub max_krylov: usize,
    pub max_restarts: usize,
    pub seed: u64,
    /// Largest lattice handled by full-Fock-space tasks...
    pub site_limit: usize,
    /// ...unless this override is set.
    pub allow_large: bool,
}

impl Default for NumericsSpec {
    fn default() -> Self {
        let s = SolverOptions::default();
        NumericsSpec {
            dense_threshold: s.dense_threshold,
            degeneracy: s.degeneracy,
            krylov_tolerance: s.krylov.tolerance,
            max_krylov: s.krylov.max_krylov,
            max_restarts: s.krylov.max_restarts,
            seed: s.krylov.seed,
            site_limit: s.thermal_site_limit,
            allow_large: s.allow_large,
        }
    }
}

impl NumericsSpec {
    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            dense_threshold: self.dense_threshold,
            krylov: KrylovOptions {
                max_krylov: self.max_krylov,
                max_restarts: self.max_restarts,
                tolerance: self.krylov_tolerance,
                seed: self.seed,
            },
            degeneracy: self.degeneracy,
            thermal_site_limit: self.site_limit,
            allow_large: self.allow_large,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub format: Format,
    /// Report file; defaults to the config path with the format's extension.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Keep per-row runtimes; off by default so reports are reproducible
    /// byte for byte.
    pub record_timing: bool,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Validates the document against the lattice and fills in every
    /// default, so the result fully describes the run.
    pub fn resolve(mut self, config_path: &Path) -> Result<(Self, LatticeGraph), ConfigError> {
        let graph = self.lattice.build()?;
        let l = graph.num_sites();
        let m = &self.model;
        for (name, v) in [("t", m.t), ("u", m.u), ("mu", m.mu)] {
            if !v.is_finite() {
                return invalid(format!("model.{name} = {v} is not finite"));
            }
        }
        self.model
            .params()
            .validate(&graph)
            .map_err(|e| ConfigError(format!("model: {e}")))?;
        let n = &self.numerics;
        if !(n.degeneracy > 0.0) || !(n.krylov_tolerance > 0.0) || n.max_krylov < 2 {
            return invalid(
                "numerics: degeneracy and krylov_tolerance must be positive, max_krylov at least 2",
            );
        }

        let task = &mut self.task;
        match task.kind {
            TaskKind::ThermalScan => {
                let betas = task.betas.get_or_insert_with(|| vec![0.5, 1.0, 2.0]);
                if betas.is_empty() || betas.iter().any(|b| !(*b >= 0.0) || !b.is_finite()) {
                    return invalid(
                        "task.betas must be a nonempty list of finite nonnegative values",
                    );
                }
            }
            TaskKind::Magnetization => {
                if self.model.fields.is_empty()
                    || self
                        .model
                        .fields
                        .iter()
                        .any(|b| !(*b > 0.0) || !b.is_finite())
                {
                    return invalid(
                        "model.fields must be a nonempty list of positive field strengths",
                    );
                }
            }
            TaskKind::Gap => {
                let particles = *task.particles.get_or_insert(2);
                if particles == 0 || !particles.is_multiple_of(2) || particles > 2 * l {
                    return invalid(format!(
                        "task.particles = {particles}: the gap task needs an even N in 2..={}",
                        2 * l
                    ));
                }
                task.alpha
                    .get_or_insert(AlphaSpec::Delta { site: 0 })
                    .coefficients(l)?;
            }
            TaskKind::VerifyIdentities => {
                task.alpha
                    .get_or_insert(AlphaSpec::Delta { site: 0 })
                    .coefficients(l)?;
            }
            TaskKind::Dispersion => {
                let particles = *task.particles.get_or_insert(l / 2);
                if particles > 2 * l {
                    return invalid(format!(
                        "task.particles = {particles} exceeds 2|sites| = {}",
                        2 * l
                    ));
                }
                if task.momenta.is_none() {
                    let p = minimal_momentum(&graph)
                        .map_err(|e| ConfigError(format!("task.momenta: {e}")))?;
                    task.momenta = Some(vec![vec![0.0; p.len()], p]);
                }
                let momenta = task.momenta.as_ref().expect("set above");
                if momenta.is_empty() || momenta.iter().flatten().any(|v| !v.is_finite()) {
                    return invalid("task.momenta must be a nonempty list of finite wave vectors");
                }
            }
            TaskKind::Spectrum => {
                let particles = *task.particles.get_or_insert(l - l % 2);
                if particles > 2 * l {
                    return invalid(format!(
                        "task.particles = {particles} exceeds 2|sites| = {}",
                        2 * l
                    ));
                }
                if *task.levels.get_or_insert(4) == 0 {
                    return invalid("task.levels must be positive");
                }
            }
            TaskKind::Lro => {}
        }

        let out = &mut self.output;
        if out.path.is_none() {
            out.path = Some(config_path.with_extension(out.format.extension()));
        }
        Ok((self, graph))
    }

    pub fn report_path(&self) -> &Path {
        self.output
            .path
            .as_deref()
            .expect("resolved config has an output path")
    }

    /// `<report path>.resolved.toml`.
    pub fn echo_path(&self) -> PathBuf {
        let mut p = self.report_path().as_os_str().to_owned();
        p.push(".resolved.toml");
        PathBuf::from(p)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GAP: &str = r#"
        [lattice]
        type = "chain"
        length = 4
        pbc = true

        [model]
        u = 2.0

        [task]
        kind = "gap"
    "#;

    #[test]
    fn defaults_are_filled_in() {
        let (c, g) = RunConfig::parse(GAP)
            .unwrap()
            .resolve(Path::new("run.toml"))
            .unwrap();
        assert_eq!(g.num_sites(), 4);
        assert_eq!(c.model.t, 1.0);
        assert_eq!(c.task.particles, Some(2));
        assert_eq!(c.task.alpha, Some(AlphaSpec::Delta { site: 0 }));
        assert_eq!(c.report_path(), Path::new("run.csv"));
        assert_eq!(c.echo_path(), Path::new("run.csv.resolved.toml"));
        assert_eq!(c.numerics, NumericsSpec::default());
    }

    #[test]
    fn resolved_echo_round_trips() {
        let (c, _) = RunConfig::parse(GAP)
            .unwrap()
            .resolve(Path::new("run.toml"))
            .unwrap();
        let again = RunConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(again, c);
        let (twice, _) = again.resolve(Path::new("elsewhere.toml")).unwrap();
        assert_eq!(twice, c);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = GAP.replace("pbc = true", "pbc = true\nperiodic = true");
        assert!(RunConfig::parse(&text).is_err());
        let text = GAP.replace("u = 2.0", "u = 2.0\nv = 1.0");
        assert!(RunConfig::parse(&text).is_err());
    }

    #[test]
    fn custom_lattice_is_validated() {
        let text = r#"
            [lattice]
            type = "custom"
            sites = 3
            sublattice = ["A", "B", "B"]
            edges = [[0, 1, 1.0], [1, 2, 1.0]]
            [model]
            u = 1.0
            [task]
            kind = "lro"
        "#;
        let err = RunConfig::parse(text)
            .unwrap()
            .resolve(Path::new("x.toml"))
            .unwrap_err();
        assert!(err.0.starts_with("lattice:"), "{err}");
        let ok = text.replace("[1, 2, 1.0]", "[0, 2, 0.5]");
        let (_, g) = RunConfig::parse(&ok)
            .unwrap()
            .resolve(Path::new("x.toml"))
            .unwrap();
        assert_eq!(g.bonds().len(), 2);
    }

    #[test]
    fn task_parameters_are_checked() {
        let odd = GAP.replace("kind = \"gap\"", "kind = \"gap\"\nparticles = 3");
        assert!(RunConfig::parse(&odd)
            .unwrap()
            .resolve(Path::new("x.toml"))
            .is_err());
        let far = GAP.replace(
            "kind = \"gap\"",
            "kind = \"gap\"\nalpha = { form = \"delta\", site = 9 }",
        );
        assert!(RunConfig::parse(&far)
            .unwrap()
            .resolve(Path::new("x.toml"))
            .is_err());
    }
}
