use serde::{Deserialize, Serialize};

use super::q1::q1_r;
use super::qn::{qn_r_multi, MAX_QN_ORDER};
use crate::chaos_kernels::{Majorants, BOUND_SCAN_ORDER};
use crate::error::{ensure, Error, Result};
use crate::rng::derive_seed;
use crate::stats::Estimate;

/// Radii used for the `a + b/R` extrapolation of `Q_{n,R}`.
pub const DEFAULT_RADII: [f64; 3] = [250.0, 500.0, 1000.0];

/// One order of the covariance series, stored without its `θ^n` factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub n: usize,
    /// Extrapolated `Q_n(t,s)`.
    pub q: Estimate,
    /// `Q_{n,R}` at the largest radius.
    pub q_largest_r: Estimate,
    pub largest_r: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSeriesResult {
    pub t: f64,
    pub s: f64,
    pub h: f64,
    pub terms: Vec<SeriesTerm>,
    pub theta: f64,
    pub truncation: usize,
    /// `Σ_{n>N} θ^n (M_n(t) M_n(s))^{1/2}` with `M_n` the `Q_n` majorant.
    pub tail_bound: f64,
    /// `Σ_{n=2..N} θ^n Q_n`.
    pub total: Estimate,
}

impl CovarianceSeriesResult {
    /// Same terms at another `θ`; the terms carry no `θ` so only the sums change.
    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        ensure(theta >= 0.0, "theta", "must be nonnegative")?;
        let mut out = self.clone();
        out.theta = theta;
        out.total = weighted_total(&self.terms, theta);
        out.tail_bound = tail_bound(self.t, self.s, self.h, theta, self.truncation)?;
        Ok(out)
    }

    pub fn term(&self, n: usize) -> Option<&SeriesTerm> {
        self.terms.iter().find(|x| x.n == n)
    }
}

fn weighted_total(terms: &[SeriesTerm], theta: f64) -> Estimate {
    terms.iter().fold(Estimate::exact(0.0), |acc, x| acc.add(x.q.scale(theta.powi(x.n as i32))))
}

/// Remainder bound of the dominating series beyond order `n_max`.
pub fn tail_bound(t: f64, s: f64, h: f64, theta: f64, n_max: usize) -> Result<f64> {
    let m = Majorants::new(h)?;
    if theta == 0.0 {
        return Ok(0.0);
    }
    Ok(((n_max + 1)..=BOUND_SCAN_ORDER)
        .map(|n| (n as f64 * theta.ln() + 0.5 * (m.qn(n, t).ln() + m.qn(n, s).ln())).exp())
        .sum())
}

/// `K_θ(t,s)` truncated at `n_max`, with `Q_n` extrapolated from [`DEFAULT_RADII`].
///
/// Fails with [`Error::Property`] when `θ³Q_3 ≥ θ²Q_2`, since truncation is then not trustworthy.
pub fn k_theta(t: f64, s: f64, theta: f64, n_max: usize, h: f64, budget: usize, seed: u64) -> Result<CovarianceSeriesResult> {
    k_theta_with_radii(t, s, theta, n_max, h, budget, seed, &DEFAULT_RADII)
}

#[allow(clippy::too_many_arguments)]
pub fn k_theta_with_radii(
    t: f64,
    s: f64,
    theta: f64,
    n_max: usize,
    h: f64,
    budget: usize,
    seed: u64,
    radii: &[f64],
) -> Result<CovarianceSeriesResult> {
    ensure(theta >= 0.0, "theta", "must be nonnegative")?;
    ensure((2..=MAX_QN_ORDER).contains(&n_max), "N_max", "supported truncations are 2..=4")?;
    ensure(radii.len() >= 2, "R", "extrapolation needs at least two radii")?;
    let largest = radii.iter().cloned().fold(0.0, f64::max);
    let mut terms = Vec::with_capacity(n_max - 1);
    for n in 2..=n_max {
        let sd = derive_seed(seed, n as u64);
        let multi = qn_r_multi(n, t, s, radii, h, budget, sd)?;
        let k = multi.radii.iter().position(|&r| r == largest).unwrap_or(0);
        terms.push(SeriesTerm {
            n,
            q: multi.extrapolated.expect("at least two radii"),
            q_largest_r: multi.per_radius[k],
            largest_r: largest,
            seed: sd,
        });
    }
    if n_max >= 3 && theta > 0.0 {
        let a = theta * theta * terms[0].q.value;
        let b = theta.powi(3) * terms[1].q.value;
        if b >= a {
            return Err(Error::Property(format!(
                "third-order term {b:.4e} is not below second-order term {a:.4e}; the truncated series is unreliable"
            )));
        }
    }
    Ok(CovarianceSeriesResult {
        t,
        s,
        h,
        total: weighted_total(&terms, theta),
        terms,
        theta,
        truncation: n_max,
        tail_bound: tail_bound(t, s, h, theta, n_max)?,
    })
}

/// `σ²_{R,θ}(t) = R Σ_{n=1..N} θ^n Q_{n,R}(t,t)`; the first chaos is by quadrature.
pub fn sigma_r_sq(t: f64, theta: f64, r: f64, n_max: usize, h: f64, budget: usize, seed: u64) -> Result<Estimate> {
    Ok(sigma_r_sq_multi(t, theta, &[r], n_max, h, budget, seed)?[0])
}

/// [`sigma_r_sq`] at several radii with common random numbers per order.
pub fn sigma_r_sq_multi(
    t: f64,
    theta: f64,
    radii: &[f64],
    n_max: usize,
    h: f64,
    budget: usize,
    seed: u64,
) -> Result<Vec<Estimate>> {
    ensure((1..=MAX_QN_ORDER).contains(&n_max), "N_max", "supported truncations are 1..=4")?;
    ensure(theta >= 0.0, "theta", "must be nonnegative")?;
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        out.push(Estimate::exact(theta * q1_r(t, t, r, h)?));
    }
    for n in 2..=n_max {
        let multi = qn_r_multi(n, t, t, radii, h, budget, derive_seed(seed, n as u64))?;
        for (o, e) in out.iter_mut().zip(&multi.per_radius) {
            *o = o.add(e.scale(theta.powi(n as i32)));
        }
    }
    Ok(out.into_iter().zip(radii).map(|(e, &r)| e.scale(r)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit_covariance::q2::q2_tt;

    #[test]
    fn theta_zero_is_zero() {
        let k = k_theta(1.0, 1.0, 0.0, 2, 0.3, 20_000, 1).unwrap();
        assert_eq!(k.total.value, 0.0);
        assert_eq!(k.tail_bound, 0.0);
        assert_eq!(sigma_r_sq(1.0, 0.0, 50.0, 2, 0.3, 1000, 1).unwrap().value, 0.0);
    }

    #[test]
    fn doubling_theta_scales_terms() {
        let k = k_theta(1.0, 1.0, 0.5, 3, 0.3, 20_000, 3).unwrap();
        let k2 = k.with_theta(1.0).unwrap();
        let contrib = |r: &CovarianceSeriesResult, n: usize| r.theta.powi(n as i32) * r.term(n).unwrap().q.value;
        for n in 2..=3 {
            assert_eq!(contrib(&k2, n), contrib(&k, n) * 2f64.powi(n as i32));
        }
    }

    #[test]
    fn tail_bound_decreases_with_truncation() {
        let b: Vec<f64> = (2..=4).map(|n| tail_bound(1.0, 1.0, 0.3, 1.0, n).unwrap()).collect();
        assert!(b.iter().all(|x| x.is_finite()));
        assert!(b[0] > b[1] && b[1] > b[2]);
    }

    #[test]
    fn covariance_dominates_second_chaos() {
        let k = k_theta(1.0, 1.0, 1.0, 3, 0.3, 100_000, 5).unwrap();
        let floor = q2_tt(1.0, 0.3).unwrap();
        assert!(k.total.value >= floor - 3.0 * k.total.std_error, "{:?} vs {floor}", k.total);
    }
}
