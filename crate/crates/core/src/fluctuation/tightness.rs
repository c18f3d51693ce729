use serde::{Deserialize, Serialize};

use super::coefficients::{band_for, build_with_band, CellGrid, KernelTarget};
use super::config::ChaosSampleConfig;
use super::sampling::exact_second_moments;
use crate::chaos_kernels::qn_majorant;
use crate::error::{ensure, Result};

/// Frozen bound on `‖F_R(t) − F_R(s)‖_2 / (R^{1/2}|t − s|)` over `t, s ∈ [0.2, 1]`, `θ = 1`, `H = 0.3`.
pub const TIGHTNESS_CONSTANT: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightnessRow {
    pub r: f64,
    pub t: f64,
    pub s: f64,
    /// `‖F_R(t) − F_R(s)‖_2` of the chaoses of order `≤ 2`.
    pub norm: f64,
    pub ratio: f64,
    /// Bound on the squared norm of the neglected third chaos.
    pub next_order_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessReport {
    pub rows: Vec<TightnessRow>,
    pub max_ratio: f64,
    pub constant: f64,
    pub holds: bool,
}

/// Exact discrete chaos norms of `F_R(t) − F_R(s)` for all pairs `t > s` in `times`.
pub fn tightness_check(r_list: &[f64], times: &[f64], theta: f64, h: f64, delta: f64) -> Result<TightnessReport> {
    ensure(times.iter().all(|&t| t > 0.0), "times", "must be positive")?;
    ensure(r_list.iter().all(|&r| r > 0.0), "R", "must be positive")?;
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    let mut rows = Vec::new();
    for &r in r_list {
        let target = KernelTarget::Average { r };
        let grid = CellGrid::covering(target, t_max, delta);
        let band = band_for(t_max, grid);
        let builds = times
            .iter()
            .map(|&t| {
                let cfg = ChaosSampleConfig { n_chaos: 2, delta, t, theta, h, r, ..Default::default() };
                build_with_band(&cfg, target, grid, band)
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, &t) in times.iter().enumerate() {
            for (j, &s) in times.iter().enumerate() {
                if t <= s {
                    continue;
                }
                let diff = builds[i].difference(&builds[j])?;
                let norm = exact_second_moments(&diff)?.iter().sum::<f64>().sqrt();
                let m3 = (qn_majorant(3, t, h)?.sqrt() + qn_majorant(3, s, h)?.sqrt()).powi(2);
                rows.push(TightnessRow {
                    r,
                    t,
                    s,
                    norm,
                    ratio: norm / (r.sqrt() * (t - s)),
                    next_order_bound: theta.powi(3) * r * m3,
                });
            }
        }
    }
    let max_ratio = rows.iter().map(|x| x.ratio).fold(0.0, f64::max);
    Ok(TightnessReport { rows, max_ratio, constant: TIGHTNESS_CONSTANT, holds: max_ratio <= TIGHTNESS_CONSTANT })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coincident_times_skipped() {
        let rep = tightness_check(&[5.0], &[0.5, 0.5], 1.0, 0.3, 0.1).unwrap();
        assert!(rep.rows.is_empty());
    }

    #[test]
    fn small_window_bounded() {
        let rep = tightness_check(&[10.0], &[0.4, 0.7, 1.0], 1.0, 0.3, 0.1).unwrap();
        assert_eq!(rep.rows.len(), 3);
        assert!(rep.holds, "{rep:?}");
    }
}
