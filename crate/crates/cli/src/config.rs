//! Run configuration: one JSON file, then command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::exit::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub h: f64,
    pub theta: f64,
    pub covariance: CovarianceConfig,
    pub clt: CltConfig,
    pub volterra: VolterraConfig,
    pub check: CheckConfig,
    pub rate: RateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 20_240_601,
            out_dir: PathBuf::from("hamf-out"),
            h: 0.3,
            theta: 1.0,
            covariance: Default::default(),
            clt: Default::default(),
            volterra: Default::default(),
            check: Default::default(),
            rate: Default::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovarianceConfig {
    pub t: f64,
    pub s: f64,
    /// Highest chaos order kept in `K_θ`.
    pub n_max: usize,
    /// Radii for the `a + b/R` extrapolation of `Q_{n,R}`.
    pub radii: Vec<f64>,
    /// Radii of the `q1_R` decay table.
    pub q1_radii: Vec<f64>,
    pub budget: usize,
}

impl Default for CovarianceConfig {
    fn default() -> Self {
        Self {
            t: 1.0,
            s: 1.0,
            n_max: 3,
            radii: vec![250.0, 500.0, 1000.0],
            q1_radii: vec![10.0, 100.0, 1000.0],
            budget: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CltConfig {
    pub t: f64,
    pub r_list: Vec<f64>,
    pub n_chaos: usize,
    pub n_samples: usize,
    pub delta: f64,
    pub entry_budget: usize,
}

impl Default for CltConfig {
    fn default() -> Self {
        Self {
            t: 1.0,
            r_list: vec![20.0, 25.0, 50.0, 100.0, 200.0],
            n_chaos: 2,
            n_samples: 10_000,
            delta: 0.025,
            entry_budget: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VolterraConfig {
    pub r: f64,
    pub z: f64,
    pub t: f64,
    pub x: f64,
    /// Times at which `J_1..J_4` are tabulated.
    pub j_times: Vec<f64>,
    pub steps: usize,
    pub replicas: usize,
    pub series_order: usize,
    pub series_budget: usize,
    pub gronwall_order: usize,
    pub gronwall_paths: usize,
    pub picard_iterations: usize,
    pub picard_cells: usize,
}

impl Default for VolterraConfig {
    fn default() -> Self {
        Self {
            r: 0.0,
            z: 0.0,
            t: 1.0,
            x: 0.0,
            j_times: vec![0.5, 1.0, 2.0, 4.0],
            steps: 512,
            replicas: 1000,
            series_order: 3,
            series_budget: 2_000_000,
            gronwall_order: 40,
            gronwall_paths: 1_000_000,
            picard_iterations: 20,
            picard_cells: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    pub inequality_cases: usize,
    pub identity_cases: usize,
    pub moment_samples: usize,
    /// Deliberately breaks one property so the failure path can be exercised.
    pub inject_fault: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { inequality_cases: 1000, identity_cases: 100, moment_samples: 20_000, inject_fault: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateConfig {
    pub q1_radii: Vec<f64>,
    pub tightness_radii: Vec<f64>,
    pub times: Vec<f64>,
    pub delta: f64,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            q1_radii: vec![10.0, 100.0, 1000.0],
            tightness_radii: vec![50.0, 200.0],
            times: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            delta: 0.1,
        }
    }
}

/// Values given on the command line; each replaces its config counterpart.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(s) = overrides.seed {
            cfg.seed = s;
        }
        if let Some(d) = &overrides.out_dir {
            cfg.out_dir = d.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: &str| Err(CliError::Config(m.to_string()));
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !(self.h > 0.25 && self.h < 0.5) {
            return fail("h must lie in (0.25, 0.5)");
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return fail("theta must be positive");
        }
        let radii = [
            ("covariance.radii", &self.covariance.radii),
            ("covariance.q1_radii", &self.covariance.q1_radii),
            ("clt.r_list", &self.clt.r_list),
            ("rate.q1_radii", &self.rate.q1_radii),
            ("rate.tightness_radii", &self.rate.tightness_radii),
        ];
        for (name, list) in radii {
            if list.is_empty() {
                return Err(CliError::Config(format!("{name} must not be empty")));
            }
            if list.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
                return Err(CliError::Config(format!("{name} must hold positive radii")));
            }
        }
        if self.rate.times.len() < 2 {
            return fail("rate.times needs at least two times");
        }
        Ok(())
    }
}
