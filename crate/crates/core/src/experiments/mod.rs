//! Experiment drivers: configuration, seeding, replica fan-out,
//! persistence (CSV/JSON/SVG), and the validation suite behind the CLI.

mod runs;
mod svg;

pub use runs::{
    run_fick_constant, run_fick_scaling, run_hydrostatics, run_operator_convergence,
    run_profile_table, run_validate, CheckVerdict, FaultInjection, ValidateReport,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Which experiment a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Hydrostatics,
    FickScaling,
    OperatorConvergence,
    Validate,
    ProfileTable,
    FickConstant,
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ExperimentKind::Hydrostatics => "hydrostatics",
            ExperimentKind::FickScaling => "fick-scaling",
            ExperimentKind::OperatorConvergence => "operator-convergence",
            ExperimentKind::Validate => "validate",
            ExperimentKind::ProfileTable => "profile-table",
            ExperimentKind::FickConstant => "fick-constant",
        };
        f.write_str(s)
    }
}

/// Full experiment description; TOML on disk, echoed into the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    /// System sizes, ascending.
    #[serde(default)]
    pub n_list: Vec<usize>,
    /// Burn-in time; 0 selects the `10 N^2 / (total pair rate)` heuristic.
    #[serde(default)]
    pub t_burn: f64,
    /// Measurement window per replica.
    #[serde(default = "default_t_measure")]
    pub t_measure: f64,
    #[serde(default = "default_replicas")]
    pub replicas: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Absolute tolerance handed to every quadrature.
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    /// Walkers for the stable-exit Monte Carlo oracle (validate only).
    #[serde(default = "default_mc_walkers")]
    pub mc_walkers: u64,
}

fn default_t_measure() -> f64 {
    200.0
}
fn default_replicas() -> u64 {
    4
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_quad_tol() -> f64 {
    1e-9
}
fn default_mc_walkers() -> u64 {
    1_000_000
}

impl ExperimentConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0 && self.gamma < 2.0) {
            return Err(Error::GammaOutOfRange(self.gamma));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} = {v} outside (0, 1)")));
            }
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("N list must be strictly ascending".into()));
        }
        if self.n_list.iter().any(|&n| n < 3) {
            return Err(Error::Config("system sizes below 3 are degenerate".into()));
        }
        if self.replicas < 1 {
            return Err(Error::Config("replica count must be at least 1".into()));
        }
        if self.t_burn < 0.0 || self.t_measure <= 0.0 {
            return Err(Error::Config("time windows must be positive".into()));
        }
        if !(self.quad_tol > 0.0) {
            return Err(Error::Config("quadrature tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Per-replica RNG streams: replica `r` runs on stream `r` of `seed`.
    pub fn replica_streams(&self) -> Vec<(u64, u64)> {
        (0..self.replicas).map(|r| (self.seed, r)).collect()
    }
}

/// Everything needed to reproduce a run bit-exactly given the same build.
/// `wall_clock_secs` is the one informational (non-reproducible) field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub code_version: String,
    pub c_gamma: f64,
    pub wall_clock_secs: f64,
    pub replica_seeds: Vec<(u64, u64)>,
    pub quad_tol: f64,
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig, c_gamma: f64, wall_clock_secs: f64) -> Self {
        RunManifest {
            config: config.clone(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            c_gamma,
            wall_clock_secs,
            replica_seeds: config.replica_streams(),
            quad_tol: config.quad_tol,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("manifest serialization: {e}")))?;
        std::fs::write(dir.join("manifest.json"), text + "\n")?;
        Ok(())
    }
}
