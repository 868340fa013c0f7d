//! JSON configuration for the `sde` and `mc` subcommands.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "horizon": 1.0,
//!   "steps": 1024,
//!   "coefficients": { "kind": "ou", "theta": 1.0, "mean": 0.0, "sigma": 0.2 },
//!   "lower": { "constant": -1.0 },
//!   "upper": { "csv": "upper.csv" },
//!   "driver": { "constant": 0.0 },
//!   "tol": 1e-12,
//!   "tol_fixed_point": 1e-10,
//!   "max_iterations": 50
//! }
//! ```
//!
//! CSV paths are relative to the directory holding the config file.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use skorokhod::io::read_path_csv;
use skorokhod::path::{GridPath, TimeGrid, DEFAULT_TOL};
use skorokhod::sde::{CoefficientSpec, SdeProblem, DEFAULT_MAX_ITERATIONS, DEFAULT_TOL_FIXED_POINT};
use skorokhod::separation::BarrierPair;

use crate::output::Fingerprint;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PathSpec {
    Constant(f64),
    Csv(PathBuf),
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_tol_fixed_point() -> f64 {
    DEFAULT_TOL_FIXED_POINT
}

fn default_max_iterations() -> usize {
    DEFAULT_MAX_ITERATIONS
}

fn default_driver() -> PathSpec {
    PathSpec::Constant(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeConfig {
    pub schema: u32,
    pub horizon: f64,
    pub steps: usize,
    pub coefficients: CoefficientSpec,
    pub lower: PathSpec,
    pub upper: PathSpec,
    #[serde(default = "default_driver")]
    pub driver: PathSpec,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_tol_fixed_point")]
    pub tol_fixed_point: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

/// A parsed config with its paths materialized on the uniform grid.
pub struct Loaded {
    pub config: SdeConfig,
    /// Template problem with a zero Brownian path.
    pub template: SdeProblem,
    pub fingerprint: Fingerprint,
}

impl SdeConfig {
    pub fn load(path: &Path) -> Result<Loaded> {
        let mut fingerprint = Fingerprint::default();
        let bytes = fingerprint.add_file("config", path)?;
        let config: SdeConfig =
            serde_json::from_slice(&bytes).with_context(|| format!("parsing config {}", path.display()))?;
        if config.schema != SCHEMA {
            bail!("unsupported config schema {} (expected {SCHEMA})", config.schema);
        }
        let base = path.parent().unwrap_or(Path::new("."));
        let grid = Arc::new(TimeGrid::uniform(config.horizon, config.steps)?);
        let mut load = |label: &str, spec: &PathSpec| -> Result<GridPath> {
            match spec {
                PathSpec::Constant(v) => Ok(GridPath::constant(grid.clone(), *v)?),
                PathSpec::Csv(file) => {
                    let file = base.join(file);
                    fingerprint.add_file(label, &file)?;
                    let reader = File::open(&file).with_context(|| format!("opening {}", file.display()))?;
                    read_path_csv(reader, Some(&grid))
                        .with_context(|| format!("reading {label} from {}", file.display()))
                }
            }
        };
        let lower = load("lower", &config.lower)?;
        let upper = load("upper", &config.upper)?;
        let driver = load("driver", &config.driver)?;
        let barriers = BarrierPair::new(lower, upper)?;
        let template = SdeProblem::new(driver, config.coefficients.build()?, barriers, GridPath::zeros(grid))?
            .with_tolerances(config.tol, config.tol_fixed_point, config.max_iterations)?;
        Ok(Loaded { config, template, fingerprint })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let text = r#"{"schema": 1, "horizon": 2.0, "steps": 8,
            "coefficients": {"kind": "linear-drift", "sigma": 0.2, "slope": -1.0},
            "lower": {"constant": -1.0}, "upper": {"csv": "u.csv"}}"#;
        let c: SdeConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.driver, PathSpec::Constant(0.0));
        assert_eq!(c.upper, PathSpec::Csv("u.csv".into()));
        assert_eq!(c.max_iterations, 50);
        assert_eq!(c.coefficients, CoefficientSpec::LinearDrift { sigma: 0.2, slope: -1.0, offset: 0.0 });
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{"schema": 1, "horizon": 1.0, "steps": 8, "typo": 3,
            "coefficients": {"kind": "constant", "sigma": 0.0, "drift": 0.0},
            "lower": {"constant": -1.0}, "upper": {"constant": 1.0}}"#;
        assert!(serde_json::from_str::<SdeConfig>(text).is_err());
    }
}
