//! Squared norms of the chaos kernels and the constants that dominate them.

use super::chain::{time_integrated_kernel_ft, ChainKernelSpec, ChainTarget};
use super::kernels::{c_alpha, wave_kernel_ft_integrated};
use super::multiindex::{a_n_prefix_sums, a_n_weighted_sum};
use crate::error::{ensure, invalid, Result};
use crate::quadrature::{cos_power_tail, integrate};
use crate::rng::{self, Stream};
use crate::rough_noise::SpectralMeasureParams;
use crate::special::{gamma, ln_factorial, ln_gamma, permutations};
use crate::stats::{Estimate, MeanVar};

/// Symmetric two-sided Pareto density `(b−1)/(2s) (1 + |ξ|/s)^{−b}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoSampler {
    pub b: f64,
    pub s: f64,
}

impl ParetoSampler {
    pub fn new(b: f64, s: f64) -> Self {
        assert!(b > 1.0 && s > 0.0);
        Self { b, s }
    }

    #[inline]
    pub fn pdf(&self, x: f64) -> f64 {
        (self.b - 1.0) / (2.0 * self.s) * (1.0 + x.abs() / self.s).powf(-self.b)
    }

    #[inline]
    pub fn sample(&self, rng: &mut Stream) -> f64 {
        let u = rng::uniform(rng);
        let m = self.s * (u.powf(-1.0 / (self.b - 1.0)) - 1.0);
        if rng::uniform(rng) < 0.5 { -m } else { m }
    }
}

pub const MAX_NORM_ORDER: usize = 4;

/// Monte Carlo estimate of `n!‖f̃_n(·, x; t)‖²` at `x = 0`.
pub fn fn_norm_sq_estimate(n: usize, t: f64, h: f64, budget: usize, seed: u64) -> Result<Estimate> {
    fn_norm_sq_estimate_at(n, t, 0.0, h, budget, seed)
}

/// As [`fn_norm_sq_estimate`] at an arbitrary evaluation point `x`.
///
/// Times are integrated exactly through the cascade, frequencies are drawn from
/// a Pareto law with tail `|ξ|^{−1−2H}`, and `n!‖f̃‖² = Σ_σ ⟨f, f∘σ⟩`.
pub fn fn_norm_sq_estimate_at(n: usize, t: f64, x: f64, h: f64, budget: usize, seed: u64) -> Result<Estimate> {
    Ok(norm_sq_core(n, t, x, h, budget, seed, None)?[0])
}

/// `n!‖f̃_n(·, 0; t) − f̃_n(·, δ; t)‖²` for each shift `δ`, from one set of samples.
///
/// The shift multiplies the Fourier kernel by `e^{−iηδ}` with `η = Σξ_j`, which is
/// permutation invariant, so the estimator is the norm estimator weighted by `2(1 − cos ηδ)`.
pub fn fn_increment_norm_sq(n: usize, t: f64, h: f64, shifts: &[f64], budget: usize, seed: u64) -> Result<Vec<Estimate>> {
    norm_sq_core(n, t, 0.0, h, budget, seed, Some(shifts))
}

fn norm_sq_core(
    n: usize,
    t: f64,
    x: f64,
    h: f64,
    budget: usize,
    seed: u64,
    shifts: Option<&[f64]>,
) -> Result<Vec<Estimate>> {
    ensure((1..=MAX_NORM_ORDER).contains(&n), "n", "supported orders are 1..=4")?;
    ensure(budget > 0, "budget", "must be positive")?;
    ensure(t > 0.0, "t", "must be positive")?;
    let p = SpectralMeasureParams::new(h)?;
    let beta = p.beta();
    let spec = ChainKernelSpec::new(n, t, 1.0, ChainTarget::Point { x })?;
    let sampler = ParetoSampler::new(1.0 + 2.0 * h, 1.0 / t);
    let perms = permutations(n);
    let scale = p.c_h.powi(n as i32);
    let m = shifts.map_or(1, |s| s.len());
    let blocks = rng::par_blocks(seed, budget, 4096, |rng, len| {
        let mut acc = vec![MeanVar::default(); m];
        let mut xi = vec![0.0; n];
        let mut perm = vec![0.0; n];
        for _ in 0..len {
            let mut w = 1.0;
            for v in xi.iter_mut() {
                *v = sampler.sample(rng);
                w *= v.abs().powf(beta) / sampler.pdf(*v);
            }
            let f = time_integrated_kernel_ft(&spec, &xi).unwrap();
            let mut s = 0.0;
            for sigma in &perms {
                for (k, &j) in sigma.iter().enumerate() {
                    perm[k] = xi[j];
                }
                let g = time_integrated_kernel_ft(&spec, &perm).unwrap();
                s += (f * g.conj()).re;
            }
            let base = scale * w * s;
            match shifts {
                None => acc[0].push(base),
                Some(sh) => {
                    let eta: f64 = xi.iter().sum();
                    for (a, d) in acc.iter_mut().zip(sh) {
                        a.push(base * 2.0 * (1.0 - (eta * d).cos()));
                    }
                }
            }
        }
        acc
    });
    let mut total = vec![MeanVar::default(); m];
    for b in &blocks {
        for (t, x) in total.iter_mut().zip(b) {
            t.merge(x);
        }
    }
    Ok(total.iter().map(|a| a.estimate()).collect())
}

/// `‖f_1(·, x; t)‖² = c_H ∫ ((1 − cos tξ)/ξ²)² |ξ|^{1−2H} dξ` by quadrature.
pub fn f1_norm_sq(t: f64, h: f64) -> Result<f64> {
    let p = SpectralMeasureParams::new(h)?;
    ensure(t > 0.0, "t", "must be positive")?;
    let beta = p.beta();
    // substitute u = tξ; the value scales as t^{2+2H}
    let f = |u: f64| {
        let g = wave_kernel_ft_integrated(1.0, u);
        g * g * u.powf(beta)
    };
    let panel = std::f64::consts::PI;
    let panels = 200;
    let body: f64 = (0..panels)
        .map(|k| integrate(f, k as f64 * panel, (k + 1) as f64 * panel, 1e-15, 1e-12, 100).value)
        .sum();
    let x = panels as f64 * panel;
    let q = 4.0 - beta;
    // (1 − cos u)² = 3/2 − 2 cos u + ½ cos 2u
    let tail = 1.5 * x.powf(1.0 - q) / (q - 1.0) - 2.0 * cos_power_tail(1.0, x, q) + 0.5 * cos_power_tail(2.0, x, q);
    Ok(2.0 * p.c_h * (body + tail) * t.powf(2.0 + 2.0 * h))
}

/// Constants shared by the dominating bounds: `c_H`, `β = 1−2H`,
/// `w(a) = c_{βa} Γ(2 − βa)` for `a = 0, 1, 2`, and `c_β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Majorants {
    pub h: f64,
    pub c_h: f64,
    pub beta: f64,
    pub w: [f64; 3],
    pub c_beta: f64,
}

impl Majorants {
    pub fn new(h: f64) -> Result<Self> {
        let c_h = SpectralMeasureParams::new(h)?.c_h;
        let beta = 1.0 - 2.0 * h;
        let mut w = [0.0; 3];
        let mut c = [0.0; 3];
        for a in 0..3 {
            let al = beta * a as f64;
            c[a] = c_alpha(al)?;
            w[a] = c[a] * gamma(2.0 - al);
        }
        Ok(Self { h, c_h, beta, w, c_beta: c[1] })
    }

    /// Explicit majorant of `‖f_n(·, x; t)‖²`:
    /// `c_H^n (t^n/n!) Σ_{a∈A_n} Π_j c_{βa_j}Γ(2−βa_j) · t^{(2H+1)n}/Γ((2H+1)n+1)`.
    ///
    /// Cauchy–Schwarz over the time simplex, `|ξ_j|^β ≤ |η_j|^β + |η_{j−1}|^β`,
    /// the `A_n` expansion, the scaling of each frequency integral, and a Dirichlet integral.
    pub fn fn_norm(&self, n: usize, t: f64) -> f64 {
        let e = (2.0 * self.h + 1.0) * n as f64;
        let ln = n as f64 * (self.c_h.ln() + t.ln()) - ln_factorial(n) + a_n_weighted_sum(n, self.w).ln()
            + e * t.ln()
            - ln_gamma(e + 1.0);
        ln.exp()
    }

    /// Dominating bound for `Q_{n,R}(t,t)`, valid for every `R ≥ 1` and in the limit:
    /// `4π t^n c_H^n Σ_a Π_{j<n} c_{βa_j} · m_{a_n} · ∫_{T_n(t)} Π_{j<n} τ_j^{1−βa_j} τ_n² dτ`,
    /// with `m_0 = 1` and `m_1 = c_β/π` bounding `∫ ℓ_R(η)|η|^{β a_n} dη`.
    pub fn qn(&self, n: usize, t: f64) -> f64 {
        let pre = a_n_prefix_sums(n, self.w);
        let m = [1.0, self.c_beta / std::f64::consts::PI];
        let mut total = 0.0;
        for an in 0..2 {
            if pre[an] == 0.0 {
                continue;
            }
            // the τ_n² factor contributes Γ(3); the exponent sum shifts with a_n
            let big = 2.0 * n as f64 + 2.0 - self.beta * (n - an) as f64;
            let ln = (big - 1.0) * t.ln() + 2f64.ln() - ln_gamma(big);
            total += pre[an] * m[an] * ln.exp();
        }
        4.0 * std::f64::consts::PI * (t * self.c_h).powi(n as i32) * total
    }

    /// `[(n!)^{2H+2} B_n(1)]^{1/n}`.
    fn bound_root(&self, n: usize) -> f64 {
        ((2.0 * self.h + 2.0) * ln_factorial(n) / n as f64 + self.fn_norm(n, 1.0).ln() / n as f64).exp()
    }

    /// `C(H) = max_n [(n!)^{2H+2} B_n(1)]^{1/n}`; the root settles to its limit well
    /// before the scan ends, so the maximum covers all larger orders as well.
    pub fn bound_f_constant(&self) -> f64 {
        (1..=BOUND_SCAN_ORDER).map(|n| self.bound_root(n)).fold(0.0, f64::max)
    }
}

pub fn fn_norm_majorant(n: usize, t: f64, h: f64) -> Result<f64> {
    ensure(n >= 1, "n", "order must be at least 1")?;
    Ok(Majorants::new(h)?.fn_norm(n, t))
}

pub fn qn_majorant(n: usize, t: f64, h: f64) -> Result<f64> {
    ensure(n >= 1, "n", "order must be at least 1")?;
    Ok(Majorants::new(h)?.qn(n, t))
}

/// Largest order scanned when fixing the constant in the factorial bound.
pub const BOUND_SCAN_ORDER: usize = 200;

pub fn bound_f_constant(h: f64) -> Result<f64> {
    Ok(Majorants::new(h)?.bound_f_constant())
}

/// `C^n t^{(2H+2)n} / (n!)^{2H+2}`.
pub fn bound_f(n: usize, t: f64, h: f64, c: f64) -> f64 {
    let a = 2.0 * h + 2.0;
    (n as f64 * (c.ln() + a * t.ln()) - a * ln_factorial(n)).exp()
}

/// Constants `(c_1, c_2)` of `‖u_θ(t,x)‖_p ≤ c_1 exp(c_2 θ^{1/(2H+1)} p^{1/(2H+1)} t^{(2H+2)/(2H+1)})`.
///
/// From `‖u‖_p ≤ Σ_n x^n/(n!)^a` with `x = (pθC)^{1/2} t^{H+1}`, `a = H + ½`, and
/// `Σ x^n/(n!)^a ≤ 2^{1−a} exp(a 2^{(1−a)/a} x^{1/a})`.
pub fn moment_bound_constants(h: f64) -> Result<(f64, f64)> {
    let c = bound_f_constant(h)?;
    let a = h + 0.5;
    Ok((2f64.powf(1.0 - a), a * 2f64.powf((1.0 - a) / a) * c.powf(1.0 / (2.0 * h + 1.0))))
}

pub fn moment_bound(p: f64, theta: f64, t: f64, h: f64) -> Result<f64> {
    if p < 2.0 {
        return Err(invalid("p", "must be at least 2"));
    }
    let (c1, c2) = moment_bound_constants(h)?;
    let e = 1.0 / (2.0 * h + 1.0);
    Ok(c1 * (c2 * theta.powf(e) * p.powf(e) * t.powf((2.0 * h + 2.0) * e)).exp())
}
