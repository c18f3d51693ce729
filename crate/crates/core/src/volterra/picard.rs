//! Majorant dynamic for the second moments of the Picard differences.
//!
//! The inequalities bounding `V_{n+1}, W_{n+1}` by `V_n, W_n` are iterated as
//! equalities on a time grid. The output bounds the true moments; it is not them.

use serde::{Deserialize, Serialize};

use super::jfun::{bdg_constant, KernelFamily, KernelKind};
use crate::error::{ensure, Error, Result};
use crate::quadrature::quad;

pub const DIVERGENCE_GUARD: f64 = 1e12;

/// Time grid and parameters of the majorant iteration for `𝒢 = √θ G` (wave).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardGrid {
    pub h: f64,
    pub theta: f64,
    pub horizon: f64,
    pub cells: usize,
}

impl PicardGrid {
    pub fn new(h: f64, theta: f64, horizon: f64, cells: usize) -> Result<Self> {
        ensure(theta >= 0.0, "theta", "must be nonnegative")?;
        ensure(horizon > 0.0, "T", "must be positive")?;
        ensure(cells >= 2, "cells", "need at least two cells")?;
        Ok(Self { h, theta, horizon, cells })
    }
}

/// Initial condition `X_0` through its two majorant profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialCondition {
    Zero,
    /// `X_0(t, x) = G_{t−r}(x − z)`; the profiles do not depend on `z`.
    WaveImpulse,
    /// `V_0, W_0` given on the `cells + 1` grid nodes of `[r, T]`.
    Profiles { v0: Vec<f64>, w0: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardIterate {
    pub n: usize,
    pub v_sup: f64,
    pub w_sup: f64,
    /// `sup √V_n + sup √W_n`, the majorant of `‖X_n − X_{n−1}‖_{𝒳_r}`.
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardReport {
    pub label: String,
    pub r: f64,
    pub bdg_constant: f64,
    pub times: Vec<f64>,
    pub iterates: Vec<PicardIterate>,
}

impl PicardReport {
    pub fn norms(&self) -> Vec<f64> {
        self.iterates.iter().map(|i| i.norm).collect()
    }
}

/// `∫_{−∞}^{y} φ_a` with `φ_a(y) = ∫|G_a(y) − G_a(y+h)|²|h|^{2H−2}dh`, shifted so the
/// antiderivative is odd.
fn phi_antiderivative(a: f64, h: f64, y: f64) -> f64 {
    let k = 1.0 / (4.0 * (1.0 - 2.0 * h) * 2.0 * h);
    let p = 2.0 * h;
    let u = y.abs();
    let v = if u < a {
        (a + u).powf(p) - (a - u).powf(p)
    } else {
        (u - a).powf(p) - (u + a).powf(p) + 2.0 * (2.0 * a).powf(p)
    };
    k * v * y.signum()
}

/// `W_0(t) = θ sup_x ∫_r^t ∫ G²_{t−s}(x−y) φ_{s−r}(y−z) dy ds` with the
/// supremum taken over a uniform scan of `|x − z| ≤ t − r`.
pub fn wave_impulse_w0(tau: f64, h: f64, theta: f64) -> f64 {
    if tau <= 0.0 || theta == 0.0 {
        return 0.0;
    }
    let scan = 48;
    (0..=scan)
        .map(|i| {
            let u = tau * i as f64 / scan as f64;
            let f = |s: f64| {
                let w = tau - s;
                0.25 * (phi_antiderivative(s, h, u + w) - phi_antiderivative(s, h, u - w))
            };
            quad(f, 0.0, tau)
        })
        .fold(0.0, f64::max)
        * theta
}

/// Iterates the majorant maps
/// `V_{n+1} = 2C(∫V_n J_1 + W_n)` and `W_{n+1} = 2C(∫V_n J_2 + ∫W_n J_1)`
/// for the wave propagator scaled by `√θ`, with `C = C_{2,H}`.
pub fn picard_second_moment(r: f64, initial: &InitialCondition, steps: usize, grid: &PicardGrid) -> Result<PicardReport> {
    ensure(r >= 0.0 && r < grid.horizon, "r", "need 0 ≤ r < T")?;
    let fam = KernelFamily::new(KernelKind::Wave, grid.h)?;
    let c = bdg_constant(grid.h)?;
    let m = grid.cells;
    let dt = (grid.horizon - r) / m as f64;
    let times: Vec<f64> = (0..=m).map(|i| r + i as f64 * dt).collect();
    let (mut v, mut w) = match initial {
        InitialCondition::Zero => (vec![0.0; m + 1], vec![0.0; m + 1]),
        InitialCondition::WaveImpulse => {
            let w0 = times.iter().map(|&t| wave_impulse_w0(t - r, grid.h, grid.theta)).collect();
            (vec![0.25; m + 1], w0)
        }
        InitialCondition::Profiles { v0, w0 } => {
            ensure(v0.len() == m + 1 && w0.len() == m + 1, "profiles", "need one value per grid node")?;
            (v0.clone(), w0.clone())
        }
    };
    // exact cell integrals of θ^k c τ^e over lags (d−1)dt..d dt
    let [e1, e2, _, _] = fam.exponents();
    let cell = |coef: f64, e: f64, d: usize| coef / (e + 1.0) * dt.powf(e + 1.0) * ((d as f64).powf(e + 1.0) - ((d - 1) as f64).powf(e + 1.0));
    let k1: Vec<f64> = (0..=m).map(|d| if d == 0 { 0.0 } else { cell(grid.theta * fam.c1, e1, d) }).collect();
    let k2: Vec<f64> = (0..=m).map(|d| if d == 0 { 0.0 } else { cell(grid.theta * grid.theta * fam.c2, e2, d) }).collect();
    let conv = |f: &[f64], k: &[f64], i: usize| (1..=i).map(|d| 0.5 * (f[i - d] + f[i - d + 1]) * k[d]).sum::<f64>();

    let summary = |n: usize, v: &[f64], w: &[f64]| {
        let vs = v.iter().copied().fold(0.0, f64::max);
        let ws = w.iter().copied().fold(0.0, f64::max);
        PicardIterate { n, v_sup: vs, w_sup: ws, norm: vs.sqrt() + ws.sqrt() }
    };
    let mut iterates = vec![summary(0, &v, &w)];
    for n in 1..=steps {
        let nv: Vec<f64> = (0..=m).map(|i| 2.0 * c * (conv(&v, &k1, i) + w[i])).collect();
        let nw: Vec<f64> = (0..=m).map(|i| 2.0 * c * (conv(&v, &k2, i) + conv(&w, &k1, i))).collect();
        v = nv;
        w = nw;
        let it = summary(n, &v, &w);
        if !(it.norm <= DIVERGENCE_GUARD) {
            return Err(Error::Diverged(format!("majorant norm {} at n = {n}", it.norm)));
        }
        iterates.push(it);
    }
    Ok(PicardReport { label: "majorant dynamic".into(), r, bdg_constant: c, times, iterates })
}
