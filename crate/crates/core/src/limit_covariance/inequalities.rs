//! Numerical checks of the two sinc-product integral inequalities used to bound the chaos terms.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, invalid, Result};
use crate::quadrature::integrate;

/// Piecewise constant function, `values[i]` on `[breaks[i], breaks[i+1])`, zero outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 {
            return Err(crate::Error::LengthMismatch { expected: values.len() + 1, found: breaks.len() });
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("breaks", "must be strictly increasing"));
        }
        Ok(Self { breaks, values })
    }

    pub fn l1_norm(&self) -> f64 {
        self.breaks.windows(2).zip(&self.values).map(|(w, v)| (w[1] - w[0]) * v.abs()).sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.breaks.partition_point(|&b| b <= x) {
            0 => 0.0,
            k if k > self.values.len() => 0.0,
            k => self.values[k - 1],
        }
    }
}

fn sin_product_weight(t: f64, s: f64, beta: f64, x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        return 0.0;
    }
    ((t * a).sin() * (s * a).sin()).abs() * a.powf(beta - 2.0)
}

fn panelled<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, w: f64) -> f64 {
    let n = ((b - a) / w).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    (0..n)
        .map(|k| integrate(&f, a + k as f64 * h, a + (k + 1) as f64 * h, 1e-14, 1e-11, 200).value)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl InequalityCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// `∫ |sin(t|x|) sin(s|x|)| |x|^{β−2} |φ(x)| dx` against `(1 + |ts|) ‖φ‖₁`, `β ∈ (0, 2)`.
pub fn weighted_step_inequality(phi: &StepFunction, t: f64, s: f64, beta: f64) -> Result<InequalityCheck> {
    ensure(beta > 0.0 && beta < 2.0, "beta", "must lie in (0, 2)")?;
    let w = std::f64::consts::PI / t.abs().max(s.abs()).max(1.0);
    let lhs = phi
        .breaks
        .windows(2)
        .zip(&phi.values)
        .map(|(iv, v)| {
            let (a, b) = (iv[0], iv[1]);
            let f = |x: f64| sin_product_weight(t, s, beta, x);
            // split at the origin so the kink of |x| sits on a panel edge
            let m = if a < 0.0 && b > 0.0 {
                panelled(f, a, 0.0, w) + panelled(f, 0.0, b, w)
            } else {
                panelled(f, a, b, w)
            };
            v.abs() * m
        })
        .sum();
    Ok(InequalityCheck { lhs, rhs: (1.0 + (t * s).abs()) * phi.l1_norm() })
}

/// `∫_ℝ |sin(t|x|) sin(s|x|)| |x|^{β−2} dx` against `2/(1−β) + 2|ts|/(1+β)`, `β ∈ (0, 1)`.
///
/// `lhs` is the integral over `|x| ≤ X` with `X = max(50, 50π/min(|t|,|s|))`; the neglected tail is
/// at most `2X^{β−1}/(1−β)` and is returned separately.
pub fn sin_product_inequality(t: f64, s: f64, beta: f64) -> Result<(InequalityCheck, f64)> {
    ensure(beta > 0.0 && beta < 1.0, "beta", "must lie in (0, 1)")?;
    ensure(t != 0.0 && s != 0.0, "t", "times must be nonzero")?;
    let tmax = t.abs().max(s.abs());
    let x = 50f64.max(50.0 * std::f64::consts::PI / t.abs().min(s.abs()));
    let body = 2.0 * panelled(|y| sin_product_weight(t, s, beta, y), 0.0, x, std::f64::consts::PI / tmax);
    let tail = 2.0 * x.powf(beta - 1.0) / (1.0 - beta);
    let rhs = 2.0 / (1.0 - beta) + 2.0 * (t * s).abs() / (1.0 + beta);
    Ok((InequalityCheck { lhs: body, rhs }, tail))
}
