use serde::{Deserialize, Serialize};

use super::coefficients::{build_on_grid, CellGrid, KernelTarget};
use super::config::ChaosSampleConfig;
use super::sampling::{exact_second_moments, sample_chaos};
use crate::chaos_kernels::{fn_increment_norm_sq, moment_bound};
use crate::error::{ensure, Result};
use crate::rng::derive_seed;
use crate::stats::{loglog_slope, Estimate, MeanVar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub p: u32,
    /// Monte Carlo `‖u_θ(t,x)‖_p` of the truncated chaos.
    pub estimate: Estimate,
    /// `(1 + Σ_n E[I_n²])^{1/2}` from the discrete tensors.
    pub l2_exact: f64,
    /// `c_1 exp(c_2 θ^{1/(2H+1)} p^{1/(2H+1)} t^{(2H+2)/(2H+1)})`.
    pub bound: f64,
    pub holds: bool,
}

/// `‖u_θ(t,x)‖_p` from `1 + Σ_{n ≤ N} I_n(f_n(·,x;t))` against the moment bound.
pub fn u_moment_check(t: f64, x: f64, p: u32, theta: f64, config: &ChaosSampleConfig, seed: u64) -> Result<MomentCheck> {
    ensure(matches!(p, 2 | 4 | 6), "p", "supported moments are 2, 4 and 6")?;
    let cfg = ChaosSampleConfig { t, theta, ..config.clone() };
    cfg.validate()?;
    let target = KernelTarget::Point { x };
    let coeffs = build_on_grid(&cfg, target, CellGrid::covering(target, t, cfg.delta))?;
    let l2_exact = (1.0 + exact_second_moments(&coeffs)?.iter().sum::<f64>()).sqrt();
    let draws = sample_chaos(&coeffs, cfg.n_samples, seed)?;
    let mut acc = MeanVar::default();
    for d in &draws {
        acc.push((1.0 + d.iter().sum::<f64>()).abs().powi(p as i32));
    }
    let m = acc.estimate();
    let v = m.value.powf(1.0 / p as f64);
    let se = if m.value > 0.0 { m.std_error * v / (p as f64 * m.value) } else { 0.0 };
    let estimate = Estimate { value: v, std_error: se, samples: m.samples };
    let bound = moment_bound(p as f64, theta, t, cfg.h)?;
    Ok(MomentCheck { p, estimate, l2_exact, bound, holds: estimate.value <= bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncrementRow {
    pub h: f64,
    /// `‖u_θ(t,0) − u_θ(t,h)‖_2`.
    pub norm: Estimate,
    /// `norm / (|h|^{1/2} + |h|^H)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementStudy {
    pub rows: Vec<IncrementRow>,
    pub max_ratio: f64,
    /// Log-log slope of the norm over the shifts `≤ 0.1`, when there are at least two.
    pub small_h_slope: Option<f64>,
}

/// `‖u_θ(t,0) − u_θ(t,h)‖_2² = Σ_{n ≤ N} θ^n n!‖f̃_n(·,0;t) − f̃_n(·,h;t)‖²`.
///
/// Every shift reuses the same frequency samples, so the table is a smooth function of `h`.
pub fn u_increment_scaling(
    t: f64,
    h_list: &[f64],
    theta: f64,
    hurst: f64,
    n_max: usize,
    budget: usize,
    seed: u64,
) -> Result<IncrementStudy> {
    ensure(h_list.iter().all(|&h| (0.0..=1.0).contains(&h)), "h", "shifts must lie in [0, 1]")?;
    ensure((1..=3).contains(&n_max), "n_max", "must lie in 1..=3")?;
    let mut sq = vec![Estimate::exact(0.0); h_list.len()];
    if theta > 0.0 {
        for n in 1..=n_max {
            let e = fn_increment_norm_sq(n, t, hurst, h_list, budget, derive_seed(seed, n as u64))?;
            for (a, b) in sq.iter_mut().zip(e) {
                *a = a.add(b.scale(theta.powi(n as i32)));
            }
        }
    }
    let rows: Vec<IncrementRow> = h_list
        .iter()
        .zip(&sq)
        .map(|(&h, e)| {
            let v = e.value.max(0.0).sqrt();
            let se = if v > 0.0 { e.std_error / (2.0 * v) } else { 0.0 };
            let ratio = if h > 0.0 { v / (h.sqrt() + h.powf(hurst)) } else { 0.0 };
            IncrementRow { h, norm: Estimate { value: v, std_error: se, samples: e.samples }, ratio }
        })
        .collect();
    let small: Vec<&IncrementRow> = rows.iter().filter(|r| r.h > 0.0 && r.h <= 0.1).collect();
    let small_h_slope = (small.len() >= 2).then(|| {
        let x: Vec<f64> = small.iter().map(|r| r.h).collect();
        let y: Vec<f64> = small.iter().map(|r| r.norm.value).collect();
        loglog_slope(&x, &y)
    });
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(IncrementStudy { rows, max_ratio, small_h_slope })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ChaosSampleConfig {
        ChaosSampleConfig { n_chaos: 3, delta: 0.1, n_samples: 40_000, ..Default::default() }
    }

    #[test]
    fn theta_zero_is_one() {
        let m = u_moment_check(1.0, 0.0, 4, 0.0, &cfg(), 1).unwrap();
        assert_eq!(m.estimate.value, 1.0);
        assert_eq!(m.l2_exact, 1.0);
    }

    #[test]
    fn second_moment_matches_tensor_norms() {
        let m = u_moment_check(1.0, 0.0, 2, 1.0, &cfg(), 2).unwrap();
        assert!((m.estimate.value - m.l2_exact).abs() < 3.0 * m.estimate.std_error, "{m:?}");
    }

    #[test]
    fn fourth_moment_below_bound() {
        let m = u_moment_check(1.0, 0.0, 4, 1.0, &cfg(), 3).unwrap();
        assert!(m.holds, "{m:?}");
    }

    #[test]
    fn increments_grow_and_scale() {
        let hs = [0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5];
        let s = u_increment_scaling(1.0, &hs, 1.0, 0.3, 2, 60_000, 4).unwrap();
        assert_eq!(s.rows[0].norm.value, 0.0);
        for w in s.rows.windows(2) {
            assert!(w[1].norm.value >= w[0].norm.value, "{w:?}");
        }
        assert!(s.small_h_slope.unwrap() >= 0.3 - 0.05);
        assert!(s.max_ratio.is_finite() && s.max_ratio < 1.0);
    }
}
