use serde::{Deserialize, Serialize};

use super::fejer::sample_fejer_unit;
use crate::chaos_kernels::{time_integrated_chain, ParetoSampler};
use crate::error::{ensure, Result};
use crate::rng::{self, Stream};
use crate::rough_noise::SpectralMeasureParams;
use crate::special::permutations;
use crate::stats::{Estimate, MeanVar};

pub const MAX_QN_ORDER: usize = 4;
/// Permutations drawn per sample at order 4 (the remaining orders sum all of them).
const SAMPLED_PERMUTATIONS: usize = 6;
const BLOCK: usize = 2048;

/// `Q_{n,R}` at several radii from one set of samples, plus the `a + b/R` fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QnMulti {
    pub n: usize,
    pub radii: Vec<f64>,
    pub per_radius: Vec<Estimate>,
    /// Intercept of the least-squares fit in `1/R`, formed per sample so its
    /// standard error accounts for the correlation between radii.
    pub extrapolated: Option<Estimate>,
}

/// Monte Carlo estimate of
/// `Q_{n,R}(t,s) = 4π c_H^n Σ_σ ∫ ℓ_R(Σξ) h_t(ξ) h_s(ξ_σ) Π|ξ_j|^{1−2H} dξ`,
/// where `h_t` is the time-integrated chain over `T_n(t)`.
pub fn qn_r(n: usize, t: f64, s: f64, r: f64, h: f64, budget: usize, seed: u64) -> Result<Estimate> {
    Ok(qn_r_multi(n, t, s, &[r], h, budget, seed)?.per_radius[0])
}

/// Common-random-number version of [`qn_r`] over `radii`.
///
/// `Σξ = u/R` with `u ~ sin²u/(πu²)` absorbs the Fejér kernel; `ξ_1..ξ_{n−1}` are
/// Pareto with tail `|ξ|^{−2}` and scale `1/max(t,s)`; time integrals are exact.
pub fn qn_r_multi(n: usize, t: f64, s: f64, radii: &[f64], h: f64, budget: usize, seed: u64) -> Result<QnMulti> {
    ensure((1..=MAX_QN_ORDER).contains(&n), "n", "supported orders are 1..=4")?;
    ensure(budget > 0, "budget", "must be positive")?;
    ensure(t > 0.0 && s > 0.0, "t", "times must be positive")?;
    ensure(!radii.is_empty() && radii.iter().all(|&r| r > 0.0), "R", "radii must be positive")?;
    let p = SpectralMeasureParams::new(h)?;
    let beta = p.beta();
    let pareto = ParetoSampler::new(2.0, 1.0 / t.max(s));
    let prefactor = 4.0 * std::f64::consts::PI * p.c_h.powi(n as i32);
    let perms = permutations(n);
    let m = radii.len();
    let fit = fit_weights(radii);

    let blocks = rng::par_blocks(seed, budget, BLOCK, |rng: &mut Stream, len| {
        let mut acc = vec![MeanVar::default(); m + 1];
        let mut xi = [0.0f64; MAX_QN_ORDER];
        let mut vals = vec![0.0; m];
        let mut chosen: Vec<usize> = Vec::with_capacity(SAMPLED_PERMUTATIONS);
        for _ in 0..len {
            let u = sample_fejer_unit(rng);
            let mut w_head = 1.0;
            let mut head = 0.0;
            for v in xi.iter_mut().take(n - 1) {
                *v = pareto.sample(rng);
                w_head *= v.abs().powf(beta) / pareto.pdf(*v);
                head += *v;
            }
            chosen.clear();
            if perms.len() > 24 || n == MAX_QN_ORDER {
                for _ in 0..SAMPLED_PERMUTATIONS {
                    chosen.push((rng::uniform(rng) * perms.len() as f64) as usize % perms.len());
                }
            } else {
                chosen.extend(0..perms.len());
            }
            let perm_scale = perms.len() as f64 / chosen.len() as f64;
            for (k, &r) in radii.iter().enumerate() {
                xi[n - 1] = u / r - head;
                let w = w_head * xi[n - 1].abs().powf(beta);
                let ht = chain(t, &xi[..n]);
                let mut sum = 0.0;
                for &ci in &chosen {
                    let sigma = &perms[ci];
                    let mut y = [0.0f64; MAX_QN_ORDER];
                    for (slot, &j) in y.iter_mut().zip(sigma) {
                        *slot = xi[j];
                    }
                    sum += chain(s, &y[..n]);
                }
                vals[k] = prefactor * w * ht * sum * perm_scale;
                acc[k].push(vals[k]);
            }
            if let Some(fw) = &fit {
                acc[m].push(fw.iter().zip(&vals).map(|(a, b)| a * b).sum());
            }
        }
        acc
    });
    let mut total = vec![MeanVar::default(); m + 1];
    for b in &blocks {
        for (t, x) in total.iter_mut().zip(b) {
            t.merge(x);
        }
    }
    Ok(QnMulti {
        n,
        radii: radii.to_vec(),
        per_radius: total[..m].iter().map(|a| a.estimate()).collect(),
        extrapolated: fit.map(|_| total[m].estimate()),
    })
}

fn chain(t: f64, xi: &[f64]) -> f64 {
    let mut eta = [0.0f64; MAX_QN_ORDER];
    let mut acc = 0.0;
    for (e, v) in eta.iter_mut().zip(xi) {
        acc += v;
        *e = acc;
    }
    time_integrated_chain(t, &eta[..xi.len()])
}

/// Weights `c_k` with intercept `a = Σ c_k y_k` for the least-squares line in `x = 1/R`.
/// Needs at least two distinct radii.
pub fn fit_weights(radii: &[f64]) -> Option<Vec<f64>> {
    let m = radii.len();
    if m < 2 {
        return None;
    }
    let x: Vec<f64> = radii.iter().map(|r| 1.0 / r).collect();
    let mean = x.iter().sum::<f64>() / m as f64;
    let sxx: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    Some(x.iter().map(|v| 1.0 / m as f64 - mean * (v - mean) / sxx).collect())
}
