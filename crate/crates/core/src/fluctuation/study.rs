use serde::{Deserialize, Serialize};

use super::coefficients::{build_coefficients, DiscretizedChaosCoefficients};
use super::config::ChaosSampleConfig;
use super::diagnostics::{gaussian_diagnostics, GaussianDiagnostics};
use super::sampling::{combine, sample_chaos};
use crate::error::{ensure, Result};
use crate::stats::{linear_fit, student_t975, Estimate, MeanVar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub std_error: f64,
    /// 95% interval; absent with fewer than three radii.
    pub ci: Option<(f64, f64)>,
}

/// Diagnostics at one radius for the full truncated `F_R` and for its chaoses of order ≥ 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltRow {
    pub r: f64,
    pub all_orders: GaussianDiagnostics,
    pub higher_orders: Option<GaussianDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltStudy {
    pub config: ChaosSampleConfig,
    pub seed: u64,
    pub rows: Vec<CltRow>,
    /// Log-log slope of `hist_l1` against `R` with the first chaos kept.
    pub slope_all: Option<SlopeFit>,
    /// The same slope for the chaoses of order ≥ 2.
    pub slope_higher: Option<SlopeFit>,
}

impl CltStudy {
    /// Slope of the variant selected by `config.include_first`.
    pub fn primary_slope(&self) -> Option<SlopeFit> {
        if self.config.include_first { self.slope_all } else { self.slope_higher }
    }

    pub fn primary_row(&self, k: usize) -> Option<GaussianDiagnostics> {
        let row = self.rows.get(k)?;
        if self.config.include_first { Some(row.all_orders) } else { row.higher_orders }
    }
}

pub fn hist_slope(rs: &[f64], l1: &[f64]) -> Option<SlopeFit> {
    let mut pairs: Vec<(f64, f64)> = rs.iter().zip(l1).map(|(&a, &b)| (a.ln(), b.ln())).collect();
    pairs.dedup_by(|a, b| a.0 == b.0);
    if pairs.len() < 2 || pairs.iter().any(|p| !p.1.is_finite()) {
        return None;
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let (_, b, se) = linear_fit(&x, &y);
    let ci = (x.len() > 2).then(|| {
        let q = student_t975(x.len() - 2);
        (b - q * se, b + q * se)
    });
    Some(SlopeFit { slope: b, std_error: se, ci })
}

/// Gaussianity diagnostics of studentized `F_R` samples over `r_list`.
///
/// Every radius uses the same seed, so the cell noise of overlapping windows is shared.
pub fn clt_rate_study(r_list: &[f64], template: &ChaosSampleConfig, seed: u64) -> Result<CltStudy> {
    ensure(!r_list.is_empty(), "R_list", "must not be empty")?;
    ensure(r_list.windows(2).all(|w| w[0] <= w[1]), "R_list", "must be nondecreasing")?;
    template.validate()?;
    let mut rows = Vec::with_capacity(r_list.len());
    for &r in r_list {
        ensure(r > 0.0, "R", "must be positive")?;
        let coeffs = build_coefficients(&template.with_r(r))?;
        let draws = sample_chaos(&coeffs, template.n_samples, seed)?;
        let all_orders = gaussian_diagnostics(&combine(&draws, true), true)?;
        let higher_orders =
            if template.n_chaos >= 2 { Some(gaussian_diagnostics(&combine(&draws, false), true)?) } else { None };
        rows.push(CltRow { r, all_orders, higher_orders });
    }
    let rs: Vec<f64> = rows.iter().map(|x| x.r).collect();
    let slope_all = hist_slope(&rs, &rows.iter().map(|x| x.all_orders.hist_l1).collect::<Vec<_>>());
    let slope_higher = rows
        .iter()
        .map(|x| x.higher_orders.map(|d| d.hist_l1))
        .collect::<Option<Vec<_>>>()
        .and_then(|l| hist_slope(&rs, &l));
    Ok(CltStudy { config: template.clone(), seed, rows, slope_all, slope_higher })
}

/// `‖I_n‖_4` against `3^{n/2}‖I_n‖_2` for each stored order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypercontractivityRow {
    pub n: usize,
    pub l2: Estimate,
    pub l4: Estimate,
    pub bound: f64,
    pub holds: bool,
}

/// `slack` is relative; three standard errors of `‖I_n‖_4` are allowed on top.
pub fn hypercontractivity_check(
    coeffs: &DiscretizedChaosCoefficients,
    n_samples: usize,
    slack: f64,
    seed: u64,
) -> Result<Vec<HypercontractivityRow>> {
    let draws = sample_chaos(coeffs, n_samples, seed)?;
    Ok((1..=coeffs.n_chaos())
        .map(|n| {
            let mut m2 = MeanVar::default();
            let mut m4 = MeanVar::default();
            for d in &draws {
                let x = d[n - 1] * d[n - 1];
                m2.push(x);
                m4.push(x * x);
            }
            let l2 = root(m2.estimate(), 2.0);
            let l4 = root(m4.estimate(), 4.0);
            let bound = 3f64.powf(0.5 * n as f64) * l2.value * (1.0 + slack);
            HypercontractivityRow { n, l2, l4, bound, holds: l4.value <= bound + 3.0 * l4.std_error }
        })
        .collect())
}

/// `m^{1/p}` with a delta-method standard error.
fn root(m: Estimate, p: f64) -> Estimate {
    let v = m.value.max(0.0).powf(1.0 / p);
    let se = if m.value > 0.0 { m.std_error * v / (p * m.value) } else { 0.0 };
    Estimate { value: v, std_error: se, samples: m.samples }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template() -> ChaosSampleConfig {
        ChaosSampleConfig { n_samples: 2000, delta: 0.1, ..Default::default() }
    }

    #[test]
    fn single_radius_has_no_slope() {
        let s = clt_rate_study(&[5.0], &template(), 1).unwrap();
        assert_eq!(s.rows.len(), 1);
        assert!(s.slope_all.is_none() && s.slope_higher.is_none());
    }

    #[test]
    fn duplicate_radii_identical() {
        let s = clt_rate_study(&[4.0, 4.0], &template(), 2).unwrap();
        assert_eq!(s.rows[0], s.rows[1]);
    }

    #[test]
    fn rejects_decreasing() {
        assert!(clt_rate_study(&[5.0, 4.0], &template(), 1).is_err());
    }

    #[test]
    fn hypercontractive_orders() {
        let c = build_coefficients(&ChaosSampleConfig { r: 3.0, delta: 0.1, ..Default::default() }).unwrap();
        for row in hypercontractivity_check(&c, 20_000, 0.0, 4).unwrap() {
            assert!(row.holds, "{row:?}");
        }
    }

    #[test]
    fn slope_fit_recovers_power() {
        let rs = [25.0, 50.0, 100.0, 200.0];
        let y: Vec<f64> = rs.iter().map(|r: &f64| 2.0 * r.powf(-0.5)).collect();
        let f = hist_slope(&rs, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!(f.ci.is_some());
    }
}
