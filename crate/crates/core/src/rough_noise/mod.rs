//! The time-independent fractional noise through its spectral measure
//! `c_H |ξ|^{1-2H} dξ`.

mod cells;

pub use cells::{cell_covariance, CellNoise};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, invalid, Error, Result};
use crate::rng;
use crate::scalar::Real;
use crate::special::gamma;

/// `c_H = Γ(2H+1) sin(πH) / (2π)`.
pub fn riesz_constant(h: f64) -> Result<f64> {
    ensure(h > 0.0 && h < 1.0, "H", "must lie in (0, 1)")?;
    Ok(gamma(2.0 * h + 1.0) * (std::f64::consts::PI * h).sin() / (2.0 * std::f64::consts::PI))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasureParams {
    pub h: f64,
    pub c_h: f64,
}

impl SpectralMeasureParams {
    /// Accepts only the rough regime `1/4 < H < 1/2`.
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.25 && h < 0.5) {
            return Err(invalid("H", format!("{h} is outside (1/4, 1/2)")));
        }
        Ok(Self { h, c_h: riesz_constant(h)? })
    }

    /// Exponent `1 − 2H` of the Riesz weight.
    pub fn beta(&self) -> f64 {
        1.0 - 2.0 * self.h
    }

    /// Spectral density `c_H |ξ|^{1-2H}`.
    pub fn density(&self, xi: f64) -> f64 {
        self.c_h * xi.abs().powf(self.beta())
    }
}

/// Positive frequency nodes with Riesz weights; mirror nodes are implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid<T> {
    pub params: SpectralMeasureParams,
    pub nodes: Vec<T>,
    pub step: T,
    pub cutoff: T,
    pub weights: Vec<T>,
}

impl<T: Real> SpectralGrid<T> {
    /// Midpoint grid `ξ_k = (k − ½)Δξ`, `Δξ = Ξ/M`.
    pub fn midpoint(params: SpectralMeasureParams, m: usize, cutoff: f64) -> Result<Self> {
        ensure(m > 0, "M", "need at least one node")?;
        ensure(cutoff > 0.0 && cutoff.is_finite(), "cutoff", "must be positive")?;
        let step = cutoff / m as f64;
        let nodes = (0..m).map(|k| (k as f64 + 0.5) * step).collect();
        Ok(Self::from_nodes(params, nodes, step))
    }

    /// Lattice grid `ξ_k = kΔξ`, `k = 1..M`; the zero mode carries no mass.
    pub fn periodic(params: SpectralMeasureParams, m: usize, step: f64) -> Result<Self> {
        ensure(m > 0, "M", "need at least one node")?;
        ensure(step > 0.0 && step.is_finite(), "step", "must be positive")?;
        let nodes = (1..=m).map(|k| k as f64 * step).collect();
        Ok(Self::from_nodes(params, nodes, step))
    }

    /// Default resolution; keeps the truncated fBm variance within 1%.
    pub fn default_for(params: SpectralMeasureParams) -> Self {
        Self::midpoint(params, 8192, 4096.0).expect("valid default grid")
    }

    fn from_nodes(params: SpectralMeasureParams, nodes: Vec<f64>, step: f64) -> Self {
        let weights = nodes.iter().map(|&x| T::lit(params.density(x) * step)).collect();
        let cutoff = T::lit(*nodes.last().unwrap());
        Self { params, nodes: nodes.into_iter().map(T::lit).collect(), step: T::lit(step), cutoff, weights }
    }

    /// Halves the step and doubles the cutoff (midpoint grids).
    pub fn refined(&self) -> Result<Self> {
        Self::midpoint(self.params, self.len() * 4, 2.0 * self.cutoff.as_f64())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Samples `f` at the positive nodes.
    pub fn sample<F: Fn(T) -> Complex<T>>(&self, f: F) -> Vec<Complex<T>> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }
}

/// Fourier transform of `1_{[a,b]}`, `∫_a^b e^{-iξy} dy`.
pub fn indicator_ft<T: Real>(a: T, b: T, xi: T) -> Complex<T> {
    let len = b - a;
    if (xi * len).abs() < T::lit(1e-6) {
        let mid = T::lit(0.5) * (a + b);
        return Complex::from_polar(len, -xi * mid);
    }
    let i = Complex::new(T::zero(), T::one());
    (Complex::from_polar(T::one(), -xi * a) - Complex::from_polar(T::one(), -xi * b)) / (i * xi)
}

/// `c_H ∫ Fφ conj(Fψ) |ξ|^{1-2H} dξ` on the grid, mirror nodes included.
pub fn inner_product_p0<T: Real>(phi_hat: &[Complex<T>], psi_hat: &[Complex<T>], grid: &SpectralGrid<T>) -> Result<T> {
    check_len(phi_hat.len(), grid.len())?;
    check_len(psi_hat.len(), grid.len())?;
    let two = T::lit(2.0);
    Ok(phi_hat
        .iter()
        .zip(psi_hat)
        .zip(&grid.weights)
        .map(|((p, q), &w)| two * w * (p.re * q.re + p.im * q.im))
        .sum())
}

fn check_len(found: usize, expected: usize) -> Result<()> {
    if found == expected { Ok(()) } else { Err(Error::LengthMismatch { expected, found }) }
}

/// Gaussian coordinates of one noise realisation: a standard `(re, im)` pair per positive node.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSample<T> {
    pub coords: Vec<[T; 2]>,
    pub seed: u64,
}

/// Node `k` always consumes the generator words `4k..4k+4` of stream `(seed, 0)`,
/// so the draw is keyed by `(seed, k)` no matter how it is produced.
pub fn sample_noise<T: Real>(grid: &SpectralGrid<T>, seed: u64) -> NoiseSample<T> {
    let mut r = rng::stream(seed, 0);
    let coords = (0..grid.len())
        .map(|_| {
            let (a, b) = rng::normal_pair(&mut r);
            [T::lit(a), T::lit(b)]
        })
        .collect();
    NoiseSample { coords, seed }
}

/// Random access to the coordinates of node `k`.
pub fn sample_node(seed: u64, k: usize) -> [f64; 2] {
    let mut r = rng::stream(seed, 0);
    r.set_word_pos(4 * k as u128);
    let (a, b) = rng::normal_pair(&mut r);
    [a, b]
}

/// `W(φ) = Σ_k √(2w_k) (Re Fφ(ξ_k)·a_k + Im Fφ(ξ_k)·b_k)`.
pub fn evaluate_w<T: Real>(sample: &NoiseSample<T>, phi_hat: &[Complex<T>], grid: &SpectralGrid<T>) -> Result<T> {
    check_len(phi_hat.len(), grid.len())?;
    check_len(sample.coords.len(), grid.len())?;
    let two = T::lit(2.0);
    Ok(phi_hat
        .iter()
        .zip(&sample.coords)
        .zip(&grid.weights)
        .map(|((p, c), &w)| (two * w).sqrt() * (p.re * c[0] + p.im * c[1]))
        .sum())
}

/// Covariance of fractional Brownian motion, `½(|x|^{2H} + |y|^{2H} − |x−y|^{2H})`.
pub fn fbm_covariance(h: f64, x: f64, y: f64) -> f64 {
    let p = 2.0 * h;
    0.5 * (x.abs().powf(p) + y.abs().powf(p) - (x - y).abs().powf(p))
}
