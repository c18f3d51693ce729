//! Chain-structured Fourier kernels of the chaos coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernels::{wave_kernel_ft, wave_kernel_ft_integrated};
use crate::error::{ensure, invalid, Error, Result};
use crate::expm::{expm, Mat};

/// What the chain is evaluated against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ChainTarget {
    /// `f_n(·, x; t)`.
    Point { x: f64 },
    /// `∫_{−R}^{R} f_n(·, x; t) dx`.
    Average { r: f64 },
    /// `g_n(·, z, x; r, t)`, started by a unit impulse at `(r, z)`.
    Delta { r: f64, z: f64, x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainKernelSpec {
    pub n: usize,
    pub t: f64,
    pub theta: f64,
    pub target: ChainTarget,
}

impl ChainKernelSpec {
    pub fn new(n: usize, t: f64, theta: f64, target: ChainTarget) -> Result<Self> {
        ensure(n >= 1, "n", "chaos order must be at least 1")?;
        ensure(t > 0.0, "t", "must be positive")?;
        ensure(theta > 0.0, "theta", "must be positive")?;
        match target {
            ChainTarget::Average { r } => ensure(r > 0.0, "R", "must be positive")?,
            ChainTarget::Delta { r, .. } => ensure(r >= 0.0 && r < t, "r", "need 0 ≤ r < t")?,
            ChainTarget::Point { .. } => {}
        }
        Ok(Self { n, t, theta, target })
    }

    fn start(&self) -> f64 {
        match self.target {
            ChainTarget::Delta { r, .. } => r,
            _ => 0.0,
        }
    }
}

/// `(ξ_1, ξ_1+ξ_2, …)`.
pub fn partial_sums(xi: &[f64]) -> Vec<f64> {
    xi.iter()
        .scan(0.0, |s, &v| {
            *s += v;
            Some(*s)
        })
        .collect()
}

fn check_times(times: &[f64], lo: f64, hi: f64) -> Result<()> {
    let ok = times.first().is_none_or(|&a| a > lo)
        && times.last().is_none_or(|&b| b < hi)
        && times.windows(2).all(|w| w[0] < w[1]);
    if ok { Ok(()) } else { Err(Error::UnorderedTimes { lo, hi }) }
}

/// Fourier transform in the space variables of the chain kernel at fixed times.
///
/// For `Point` and `Average` targets `xis` holds `ξ_1..ξ_n` and the value is
/// `phase(Σξ) · Π_j FG_{t_{j+1}−t_j}(ξ_1+…+ξ_j)` with `t_{n+1} = t`.
///
/// For the `Delta` target `xis` holds `n + 1` frequencies `(η_0, ξ_1..ξ_n)`; the
/// value is the integrand of `Fg_n = (1/2π) ∫ dη_0 (…)`, namely
/// `e^{iη_0(x−z) − iΣξ·x} Π_{j=0}^{n} FG_{τ_j}(η_0 − ξ_1 − … − ξ_j)` with
/// `τ_0 = t_1 − r`. The anchor frequency appears because the impulse pins the
/// chain at `z` as well as at `x`.
pub fn chain_kernel_ft(spec: &ChainKernelSpec, times: &[f64], xis: &[f64]) -> Result<Complex64> {
    let n = spec.n;
    if times.len() != n {
        return Err(Error::LengthMismatch { expected: n, found: times.len() });
    }
    check_times(times, spec.start(), spec.t)?;
    let gap = |j: usize| if j + 1 < n { times[j + 1] - times[j] } else { spec.t - times[j] };
    match spec.target {
        ChainTarget::Point { .. } | ChainTarget::Average { .. } => {
            if xis.len() != n {
                return Err(Error::LengthMismatch { expected: n, found: xis.len() });
            }
            let eta = partial_sums(xis);
            let amp: f64 = (0..n).map(|j| wave_kernel_ft(gap(j), eta[j])).product();
            let s = eta[n - 1];
            let phase = match spec.target {
                ChainTarget::Point { x } => Complex64::from_polar(1.0, -s * x),
                ChainTarget::Average { r } => Complex64::new(2.0 * wave_kernel_ft(r, s), 0.0),
                ChainTarget::Delta { .. } => unreachable!(),
            };
            Ok(phase * amp)
        }
        ChainTarget::Delta { r, z, x } => {
            if xis.len() != n + 1 {
                return Err(Error::LengthMismatch { expected: n + 1, found: xis.len() });
            }
            let eta0 = xis[0];
            let mut amp = wave_kernel_ft(times[0] - r, eta0);
            let mut acc = eta0;
            for j in 0..n {
                acc -= xis[j + 1];
                amp *= wave_kernel_ft(gap(j), acc);
            }
            let s: f64 = xis[1..].iter().sum();
            Ok(Complex64::from_polar(amp, eta0 * (x - z) - s * x))
        }
    }
}

/// `∫_{0<t_1<…<t_n<t} Π_j FG_{t_{j+1}−t_j}(η_j) dt` for partial sums `η_1..η_n`.
///
/// The integral is `y_n(t)` for the oscillator cascade `y_j'' = −η_j² y_j + y_{j−1}`,
/// `y_0 = 1`, started at rest, which equals `(−1)^n g[0, η_1², …, η_n²]` for
/// `g(x) = cos(t√x)`. The divided differences are evaluated on sorted nodes;
/// clustered nodes fall back to [`time_integrated_chain_expm`].
pub fn time_integrated_chain(t: f64, eta: &[f64]) -> f64 {
    match eta.len() {
        0 => 1.0,
        1 => wave_kernel_ft_integrated(t, eta[0]),
        n => {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            match cos_sqrt_divided_difference(t, eta) {
                Some(v) => sign * v,
                None => time_integrated_chain_expm(t, eta),
            }
        }
    }
}

const MAX_NODES: usize = 8;

#[inline]
fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 { 1.0 - z * z / 6.0 } else { z.sin() / z }
}

/// `g[0, η_1², …, η_n²]` for `g(x) = cos(t√x)`, or `None` when nodes cluster.
fn cos_sqrt_divided_difference(t: f64, eta: &[f64]) -> Option<f64> {
    let n = eta.len();
    if n + 1 > MAX_NODES {
        return None;
    }
    let mut r = [0.0f64; MAX_NODES];
    for (k, e) in eta.iter().enumerate() {
        r[k + 1] = e.abs();
    }
    let r = &mut r[..=n];
    r.sort_unstable_by(f64::total_cmp);
    let rmax = r[n];
    let t2 = t * t;
    if t2 * rmax * rmax < 1e-2 {
        return Some(taylor_divided_difference(t, r));
    }
    let x: Vec<f64> = r.iter().map(|v| v * v).collect();
    // first differences: (cos tq − cos tp)/(q² − p²) = −(t²/2) sinc(t(q+p)/2) sinc(t(q−p)/2)
    let mut d = [0.0f64; MAX_NODES];
    for i in 0..n {
        let (p, q) = (r[i], r[i + 1]);
        d[i] = -0.5 * t2 * sinc(0.5 * t * (q + p)) * sinc(0.5 * t * (q - p));
    }
    let floor = 1e-3 * x[n];
    for k in 2..=n {
        for i in 0..=(n - k) {
            let gap = x[i + k] - x[i];
            if gap < floor {
                return None;
            }
            d[i] = (d[i + 1] - d[i]) / gap;
        }
    }
    Some(d[0])
}

/// Taylor series `Σ_k (−1)^k t^{2k}/(2k)! h_{k−n}(x_0..x_n)` for small nodes.
fn taylor_divided_difference(t: f64, r: &[f64]) -> f64 {
    let n = r.len() - 1;
    const TERMS: usize = 10;
    // complete homogeneous symmetric polynomials h_m of the squared nodes
    let mut hm = [0.0f64; TERMS];
    hm[0] = 1.0;
    for v in r {
        let x = v * v;
        for m in 1..TERMS {
            hm[m] += x * hm[m - 1];
        }
    }
    let t2 = t * t;
    let mut coef = 1.0;
    for k in 1..=n {
        coef *= -t2 / ((2 * k - 1) * (2 * k)) as f64;
    }
    let mut sum = 0.0;
    for (m, h) in hm.iter().enumerate() {
        sum += coef * h;
        let k = n + m + 1;
        coef *= -t2 / ((2 * k - 1) * (2 * k)) as f64;
    }
    sum
}

/// Same integral through a matrix exponential of the cascade in the rescaled
/// variables `(y_j, y_j'/ω_j)`, `ω_j² = η_j² + t^{−2}`.
pub fn time_integrated_chain_expm(t: f64, eta: &[f64]) -> f64 {
    let n = eta.len();
    if n == 0 {
        return 1.0;
    }
    let dim = 2 * n + 1;
    let mut a = Mat::zeros(dim);
    let inv_t2 = 1.0 / (t * t);
    for (j, &e) in eta.iter().enumerate() {
        let y = 2 * j + 1;
        let p = y + 1;
        let w = (e * e + inv_t2).sqrt();
        let prev = if j == 0 { 0 } else { y - 2 };
        a.set(y, p, t * w);
        a.set(p, y, -t * e * e / w);
        a.set(p, prev, t / w);
    }
    expm(&a).get(2 * n - 1, 0)
}

/// Time-integrated chain for the target `phase`: `e^{-iΣξx}`, or `2 sin(RΣξ)/Σξ`.
pub fn time_integrated_kernel_ft(spec: &ChainKernelSpec, xis: &[f64]) -> Result<Complex64> {
    if xis.len() != spec.n {
        return Err(Error::LengthMismatch { expected: spec.n, found: xis.len() });
    }
    let eta = partial_sums(xis);
    let h = time_integrated_chain(spec.t, &eta);
    let s = eta[spec.n - 1];
    match spec.target {
        ChainTarget::Point { x } => Ok(Complex64::from_polar(h, -s * x)),
        ChainTarget::Average { r } => Ok(Complex64::new(2.0 * wave_kernel_ft(r, s) * h, 0.0)),
        ChainTarget::Delta { .. } => Err(invalid("target", "delta chains are not time-integrated")),
    }
}

/// `f_n(x_1..x_n, x; t) = (t − D)_+^n / (2^n n!)`, `D = |x − x_n| + Σ|x_{j+1} − x_j|`.
pub fn chain_kernel_point(t: f64, xs: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let d = path_length(xs) + (x - xs[n - 1]).abs();
    let v = (t - d).max(0.0);
    v.powi(n as i32) / (2f64.powi(n as i32) * crate::special::factorial(n))
}

fn path_length(xs: &[f64]) -> f64 {
    xs.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// `∫_{−R}^{R} f_n(x_1..x_n, x; t) dx` in closed form.
pub fn chain_kernel_average(t: f64, xs: &[f64], r: f64) -> f64 {
    let n = xs.len();
    let tau = t - path_length(xs);
    if tau <= 0.0 {
        return 0.0;
    }
    let xn = xs[n - 1];
    let k = n as i32 + 1;
    // P(y) = ∫_0^y (τ − |u|)_+^n du
    let p = |y: f64| {
        let m = y.abs().min(tau);
        y.signum() * (tau.powi(k) - (tau - m).powi(k)) / k as f64
    };
    (p(r - xn) - p(-r - xn)) / (2f64.powi(n as i32) * crate::special::factorial(n))
}
