//! Chaos series of `E|V^{(r,z)}_θ(t,x)|²` and the domination of the
//! time-independent-noise series by it.

use serde::{Deserialize, Serialize};

use crate::chaos_kernels::{chain_kernel_ft, f1_norm_sq, wave_kernel, ChainKernelSpec, ChainTarget, ParetoSampler};
use crate::error::{ensure, Result};
use crate::quadrature::quad;
use crate::rng::{self, Stream};
use crate::rough_noise::SpectralMeasureParams;
use crate::special::{factorial, permutations};
use crate::stats::{Estimate, MeanVar};

pub const MAX_SERIES_ORDER: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VSeriesTerm {
    pub n: usize,
    /// `‖g_n‖²_{ℋ₀^{⊗n}}`.
    pub norm_sq: Estimate,
    /// `θⁿ ‖g_n‖²`.
    pub contribution: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VSecondMoment {
    pub r: f64,
    pub z: f64,
    pub t: f64,
    pub x: f64,
    pub theta: f64,
    pub h: f64,
    /// `G_{t−r}(x−z)²`.
    pub g0_sq: f64,
    pub terms: Vec<VSeriesTerm>,
    pub total: Estimate,
}

/// `‖g_1‖² = (1/16)∫_r^t L(s)^{2H} ds`, `L(s)` the overlap of the two light-cone intervals.
pub fn g1_norm_sq(r: f64, z: f64, t: f64, x: f64, h: f64) -> Result<f64> {
    SpectralMeasureParams::new(h)?;
    ensure(r < t, "r", "need r < t")?;
    let overlap = |s: f64| {
        let lo = (x - (t - s)).max(z - (s - r));
        let hi = (x + (t - s)).min(z + (s - r));
        (hi - lo).max(0.0)
    };
    // the overlap has kinks where the cone edges cross
    let c = 0.5 * (r + t);
    let d = 0.5 * (x - z).abs();
    let mut knots = vec![r, t, (c - d).clamp(r, t), (c + d).clamp(r, t)];
    knots.sort_by(f64::total_cmp);
    Ok(knots.windows(2).map(|w| quad(|s| overlap(s).powf(2.0 * h), w[0], w[1])).sum::<f64>() / 16.0)
}

fn simplex_times(rng: &mut Stream, r: f64, t: f64, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = r + (t - r) * rng::uniform(rng);
    }
    out.sort_by(f64::total_cmp);
}

struct Frequencies {
    xi: ParetoSampler,
    anchor: ParetoSampler,
    beta: f64,
    c_h: f64,
}

impl Frequencies {
    fn new(h: f64, span: f64) -> Result<Self> {
        let p = SpectralMeasureParams::new(h)?;
        Ok(Self { xi: ParetoSampler::new(1.0 + 2.0 * h, 1.0 / span), anchor: ParetoSampler::new(2.0, 1.0 / span), beta: p.beta(), c_h: p.c_h })
    }

    /// Draws `ξ_1..ξ_n` into `buf[1..]`; returns the weight `c_Hⁿ Π|ξ|^β / p(ξ)`.
    fn draw_xi(&self, rng: &mut Stream, buf: &mut [f64]) -> f64 {
        let mut w = 1.0;
        for v in buf[1..].iter_mut() {
            *v = self.xi.sample(rng);
            w *= self.c_h * v.abs().powf(self.beta) / self.xi.pdf(*v);
        }
        w
    }

    /// Draws the anchor into `buf[0]`; returns `1/(2π q(η))`.
    fn draw_anchor(&self, rng: &mut Stream, buf: &mut [f64]) -> f64 {
        buf[0] = self.anchor.sample(rng);
        1.0 / (std::f64::consts::TAU * self.anchor.pdf(buf[0]))
    }
}

/// Monte Carlo `‖g_n(·, r, z, t, x)‖²_{ℋ₀^{⊗n}}` over the simplex and the frequencies.
///
/// `|Fg_n|²` carries one anchor integral per factor; two independent anchors make
/// the product estimator unbiased.
pub fn g_norm_sq_mc(n: usize, r: f64, z: f64, t: f64, x: f64, h: f64, budget: usize, seed: u64) -> Result<Estimate> {
    ensure((1..=MAX_SERIES_ORDER).contains(&n), "n", "supported orders are 1..=3")?;
    ensure(budget > 0, "budget", "must be positive")?;
    let spec = ChainKernelSpec::new(n, t, 1.0, ChainTarget::Delta { r, z, x })?;
    let fr = Frequencies::new(h, t - r)?;
    let vol = (t - r).powi(n as i32) / factorial(n);
    let blocks = rng::par_blocks(seed, budget, 4096, |rng, len| {
        let mut acc = MeanVar::default();
        let mut times = vec![0.0; n];
        let (mut a, mut b) = (vec![0.0; n + 1], vec![0.0; n + 1]);
        for _ in 0..len {
            simplex_times(rng, r, t, &mut times);
            let w = fr.draw_xi(rng, &mut a);
            b[1..].copy_from_slice(&a[1..]);
            let qa = fr.draw_anchor(rng, &mut a);
            let qb = fr.draw_anchor(rng, &mut b);
            let fa = chain_kernel_ft(&spec, &times, &a).unwrap();
            let fb = chain_kernel_ft(&spec, &times, &b).unwrap();
            acc.push(vol * w * qa * qb * (fa * fb.conj()).re);
        }
        acc
    });
    let mut total = MeanVar::default();
    for b in &blocks {
        total.merge(b);
    }
    Ok(total.estimate())
}

/// `E|V(t,x)|² ≈ G_{t−r}(x−z)² + Σ_{n ≤ N} θⁿ‖g_n‖²`, the first order by quadrature.
#[allow(clippy::too_many_arguments)]
pub fn v_second_moment_series(
    r: f64,
    z: f64,
    t: f64,
    x: f64,
    theta: f64,
    n_max: usize,
    h: f64,
    budget: usize,
    seed: u64,
) -> Result<VSecondMoment> {
    ensure(n_max <= MAX_SERIES_ORDER, "N_max", "at most 3")?;
    ensure(theta >= 0.0, "theta", "must be nonnegative")?;
    ensure(r >= 0.0 && r < t, "r", "need 0 ≤ r < t")?;
    SpectralMeasureParams::new(h)?;
    let g0 = wave_kernel(t - r, x - z);
    let mut total = Estimate::exact(g0 * g0);
    let mut terms = Vec::new();
    if theta > 0.0 {
        for n in 1..=n_max {
            let norm_sq = if n == 1 {
                Estimate::exact(g1_norm_sq(r, z, t, x, h)?)
            } else {
                g_norm_sq_mc(n, r, z, t, x, h, budget, rng::derive_seed(seed, n as u64))?
            };
            let contribution = norm_sq.scale(theta.powi(n as i32));
            total = total.add(contribution);
            terms.push(VSeriesTerm { n, norm_sq, contribution });
        }
    }
    Ok(VSecondMoment { r, z, t, x, theta, h, g0_sq: g0 * g0, terms, total })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominationTerm {
    pub n: usize,
    /// `θⁿ n!‖g̃_n‖²_{𝒫₀^{⊗n}}`, the time-independent-noise term.
    pub v_term: Estimate,
    /// `(θ(t−r))ⁿ ‖g_n‖²_{ℋ₀^{⊗n}}`, the white-in-time term at the rescaled parameter.
    pub bound_term: Estimate,
}

impl DominationTerm {
    /// `v_term ≤ bound_term` allowing `k` combined standard errors.
    pub fn holds(&self, k: f64) -> bool {
        self.v_term.value <= self.bound_term.value + k * self.v_term.std_error.hypot(self.bound_term.std_error)
    }
}

/// Monte Carlo `n!‖g̃_n‖²_{𝒫₀^{⊗n}}` with `g̃_n` the time integral of `g_n`.
///
/// The two factors of `Fg̃(ξ) conj Fg̃(ξ∘σ)` use independent times and anchors.
pub fn g_tilde_norm_sq_mc(n: usize, r: f64, z: f64, t: f64, x: f64, h: f64, budget: usize, seed: u64) -> Result<Estimate> {
    ensure((1..=MAX_SERIES_ORDER).contains(&n), "n", "supported orders are 1..=3")?;
    ensure(budget > 0, "budget", "must be positive")?;
    let spec = ChainKernelSpec::new(n, t, 1.0, ChainTarget::Delta { r, z, x })?;
    let fr = Frequencies::new(h, t - r)?;
    let vol = (t - r).powi(n as i32) / factorial(n);
    let perms = permutations(n);
    let blocks = rng::par_blocks(seed, budget, 4096, |rng, len| {
        let mut acc = MeanVar::default();
        let (mut ta, mut tb) = (vec![0.0; n], vec![0.0; n]);
        let (mut a, mut b) = (vec![0.0; n + 1], vec![0.0; n + 1]);
        for _ in 0..len {
            simplex_times(rng, r, t, &mut ta);
            simplex_times(rng, r, t, &mut tb);
            let w = fr.draw_xi(rng, &mut a);
            let qa = fr.draw_anchor(rng, &mut a);
            let qb = fr.draw_anchor(rng, &mut b);
            let fa = chain_kernel_ft(&spec, &ta, &a).unwrap();
            let mut s = 0.0;
            for sigma in &perms {
                for (k, &j) in sigma.iter().enumerate() {
                    b[k + 1] = a[j + 1];
                }
                s += (fa * chain_kernel_ft(&spec, &tb, &b).unwrap().conj()).re;
            }
            acc.push(vol * vol * w * qa * qb * s);
        }
        acc
    });
    let mut total = MeanVar::default();
    for b in &blocks {
        total.merge(b);
    }
    Ok(total.estimate())
}

/// Term-by-term comparison at `n = 1, 2` of the series for `v_θ` against the
/// series for `V` at `θ(t − r)`.
#[allow(clippy::too_many_arguments)]
pub fn v_domination_terms(r: f64, z: f64, t: f64, x: f64, theta: f64, h: f64, budget: usize, seed: u64) -> Result<Vec<DominationTerm>> {
    ensure(theta > 0.0, "theta", "must be positive")?;
    let mut out = Vec::new();
    for n in 1..=2usize {
        let tn = theta.powi(n as i32);
        let v_term = if n == 1 && x == z {
            // g̃_1 = ½((t−r)/2 − |·−x|)₊ whose transform is (1 − cos aξ)/ξ², a = (t−r)/2
            Estimate::exact(f1_norm_sq(0.5 * (t - r), h)?)
        } else {
            g_tilde_norm_sq_mc(n, r, z, t, x, h, budget, rng::derive_seed(seed, 10 + n as u64))?
        };
        let g = if n == 1 {
            Estimate::exact(g1_norm_sq(r, z, t, x, h)?)
        } else {
            g_norm_sq_mc(n, r, z, t, x, h, budget, rng::derive_seed(seed, 20 + n as u64))?
        };
        out.push(DominationTerm { n, v_term: v_term.scale(tn), bound_term: g.scale((theta * (t - r)).powi(n as i32)) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_free_series_is_kernel_squared() {
        let s = v_second_moment_series(0.0, 0.0, 1.0, 0.3, 0.0, 3, 0.3, 10, 1).unwrap();
        assert_eq!(s.total.value, 0.25);
        assert!(s.terms.is_empty());
    }

    #[test]
    fn first_order_golden() {
        // x = z, r = 0: (1/16) t^{2H+1}/(2H+1)
        let v = g1_norm_sq(0.0, 0.0, 1.0, 0.0, 0.3).unwrap();
        assert!((v - 0.0390625).abs() < 1e-10, "{v}");
    }

    #[test]
    fn first_order_monte_carlo_matches_quadrature() {
        for &(r, z, t, x) in &[(0.0, 0.0, 1.0, 0.0), (0.2, 0.5, 1.3, 0.9)] {
            let exact = g1_norm_sq(r, z, t, x, 0.3).unwrap();
            let mc = g_norm_sq_mc(1, r, z, t, x, 0.3, 200_000, 3).unwrap();
            assert!((mc.value - exact).abs() < 4.0 * mc.std_error, "{mc:?} vs {exact}");
        }
    }

    #[test]
    fn time_integrated_monte_carlo_matches_closed_form() {
        let exact = f1_norm_sq(0.5, 0.3).unwrap();
        let mc = g_tilde_norm_sq_mc(1, 0.0, 0.0, 1.0, 0.0, 0.3, 200_000, 5).unwrap();
        assert!((mc.value - exact).abs() < 4.0 * mc.std_error, "{mc:?} vs {exact}");
    }

    #[test]
    fn domination_holds_at_low_orders() {
        for &(x, theta) in &[(0.0, 1.0), (0.3, 2.0)] {
            let terms = v_domination_terms(0.0, 0.0, 1.0, x, theta, 0.3, 100_000, 7).unwrap();
            for d in &terms {
                assert!(d.holds(3.0), "{d:?}");
            }
        }
    }
}
