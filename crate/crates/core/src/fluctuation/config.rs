use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Highest chaos order kept when sampling.
pub const MAX_CHAOS: usize = 3;

/// Settings for the truncated-chaos sampler of the spatial average `F_{R,θ}(t)`.
///
/// The noise is discretized on cells of width `delta`; the time integrals of the
/// kernels are exact, so no time resolution is needed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChaosSampleConfig {
    pub n_chaos: usize,
    pub delta: f64,
    pub n_samples: usize,
    pub r: f64,
    pub t: f64,
    pub theta: f64,
    pub h: f64,
    /// Keep the first chaos in `F_R`; it vanishes only as `R → ∞`.
    pub include_first: bool,
    /// Largest number of stored tensor entries before the build refuses.
    pub entry_budget: usize,
}

impl Default for ChaosSampleConfig {
    fn default() -> Self {
        Self {
            n_chaos: 2,
            delta: 0.025,
            n_samples: 10_000,
            r: 20.0,
            t: 1.0,
            theta: 1.0,
            h: 0.3,
            include_first: true,
            entry_budget: 50_000_000,
        }
    }
}

impl ChaosSampleConfig {
    pub fn validate(&self) -> Result<()> {
        ensure((1..=MAX_CHAOS).contains(&self.n_chaos), "n_chaos", "must lie in 1..=3")?;
        ensure(self.delta > 0.0 && self.delta.is_finite(), "delta", "must be positive")?;
        ensure(self.n_samples > 0, "n_samples", "must be positive")?;
        ensure(self.r >= 0.0 && self.r.is_finite(), "R", "must be nonnegative")?;
        ensure(self.t > 0.0 && self.t.is_finite(), "t", "must be positive")?;
        ensure(self.theta >= 0.0 && self.theta.is_finite(), "theta", "must be nonnegative")?;
        ensure(self.h > 0.25 && self.h < 0.5, "H", "must lie in (1/4, 1/2)")?;
        ensure(self.entry_budget > 0, "entry_budget", "must be positive")?;
        Ok(())
    }

    pub fn with_r(&self, r: f64) -> Self {
        Self { r, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        ChaosSampleConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_fields() {
        let base = ChaosSampleConfig::default();
        for c in [
            ChaosSampleConfig { n_chaos: 4, ..base.clone() },
            ChaosSampleConfig { n_chaos: 0, ..base.clone() },
            ChaosSampleConfig { n_samples: 0, ..base.clone() },
            ChaosSampleConfig { delta: 0.0, ..base.clone() },
            ChaosSampleConfig { h: 0.6, ..base.clone() },
        ] {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}
