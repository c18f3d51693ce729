//! The functionals `J_1..J_4` of a propagator family and the BDG constant at `p = 2`.
//!
//! With `D_H = ∫(1 − cos u)|u|^{2H−2} du`, Plancherel gives
//! `J_1 = (D_H/π) ∫|FG_t|²|ξ|^{1−2H}dξ` and `J_3 = (2D_H²/π) ∫|FG_t|²|ξ|^{2−4H}dξ`.

use serde::{Deserialize, Serialize};

use crate::chaos_kernels::{c_alpha, weighted_g_integral};
use crate::error::{ensure, Result};
use crate::quadrature::integrate;
use crate::rough_noise::{riesz_constant, SpectralMeasureParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Wave,
    Heat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JValues {
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
    pub j4: f64,
}

/// `D_H = ∫_ℝ (1 − cos u)|u|^{2H−2} du = 2^{2H} c_{2H}`.
pub fn difference_constant(h: f64) -> Result<f64> {
    Ok(2f64.powf(2.0 * h) * c_alpha(2.0 * h)?)
}

/// `C_{2,H} = π c_H / D_H`, for which the BDG bound is an equality at `p = 2`.
pub fn bdg_constant(h: f64) -> Result<f64> {
    SpectralMeasureParams::new(h)?;
    Ok(std::f64::consts::PI * riesz_constant(h)? / difference_constant(h)?)
}

/// `∫_ℝ |FG_t(ξ)|² |ξ|^a dξ`.
pub fn spectral_moment(kind: KernelKind, t: f64, a: f64) -> Result<f64> {
    ensure(t > 0.0, "t", "must be positive")?;
    match kind {
        KernelKind::Wave => weighted_g_integral(t, a),
        KernelKind::Heat => {
            ensure(a > -1.0, "a", "must exceed −1")?;
            // |Fg_t|² = e^{−tξ²}; substitute v = √t ξ
            let body = integrate(|v: f64| (-v * v).exp() * v.powf(a), 0.0, 12.0, 1e-15, 1e-12, 400).value;
            Ok(2.0 * body * t.powf(-(a + 1.0) / 2.0))
        }
    }
}

/// `(J1, J3, J4)` exponents of the pure power laws.
pub fn exponents(kind: KernelKind, h: f64) -> [f64; 3] {
    match kind {
        KernelKind::Wave => [2.0 * h, 4.0 * h - 1.0, 1.0],
        KernelKind::Heat => [h - 1.0, 2.0 * h - 1.5, -0.5],
    }
}

fn j4_exact(kind: KernelKind, t: f64) -> f64 {
    match kind {
        KernelKind::Wave => 0.5 * t,
        KernelKind::Heat => 0.5 / (std::f64::consts::PI * t).sqrt(),
    }
}

/// `∫_0^1 u^a (1−u)^b du` by quadrature, with the endpoint powers removed by
/// `u = w^{1/(1+a)}` on `[0, ½]` and the mirror substitution on `[½, 1]`.
fn beta_quadrature(a: f64, b: f64) -> f64 {
    let left = {
        let k = 1.0 / (1.0 + a);
        let top = 0.5f64.powf(1.0 + a);
        integrate(|w: f64| k * (1.0 - w.powf(k)).powf(b), 0.0, top, 1e-15, 1e-12, 200).value
    };
    let right = {
        let k = 1.0 / (1.0 + b);
        let top = 0.5f64.powf(1.0 + b);
        integrate(|w: f64| k * (1.0 - w.powf(k)).powf(a), 0.0, top, 1e-15, 1e-12, 200).value
    };
    left + right
}

/// `J_1..J_4` at time `t` for the unscaled propagator.
///
/// `J_2 = ∫_0^t J_3(s)J_4(t−s)ds` uses the exact scaling `J_3(s) = J_3(t)(s/t)^{e_3}`.
pub fn j_functions(kind: KernelKind, t: f64, h: f64) -> Result<JValues> {
    ensure(t > 0.0, "t", "must be positive")?;
    SpectralMeasureParams::new(h)?;
    let d = difference_constant(h)?;
    let pi = std::f64::consts::PI;
    let j1 = d / pi * spectral_moment(kind, t, 1.0 - 2.0 * h)?;
    let j3 = 2.0 * d * d / pi * spectral_moment(kind, t, 2.0 - 4.0 * h)?;
    let j4 = j4_exact(kind, t);
    let [_, e3, e4] = exponents(kind, h);
    let j2 = j3 * j4_exact(kind, 1.0) * t.powf(e4 + 1.0) * beta_quadrature(e3, e4);
    Ok(JValues { j1, j2, j3, j4 })
}

/// A propagator family reduced to its power laws `J_i(t) = c_i t^{e_i}`,
/// constants taken from [`j_functions`] at `t = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelFamily {
    pub kind: KernelKind,
    pub h: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl KernelFamily {
    pub fn new(kind: KernelKind, h: f64) -> Result<Self> {
        let j = j_functions(kind, 1.0, h)?;
        Ok(Self { kind, h, c1: j.j1, c2: j.j2, c3: j.j3, c4: j.j4 })
    }

    pub fn exponents(&self) -> [f64; 4] {
        let [e1, e3, e4] = exponents(self.kind, self.h);
        [e1, e3 + e4 + 1.0, e3, e4]
    }

    pub fn eval(&self, t: f64) -> JValues {
        let [e1, e2, e3, e4] = self.exponents();
        JValues { j1: self.c1 * t.powf(e1), j2: self.c2 * t.powf(e2), j3: self.c3 * t.powf(e3), j4: self.c4 * t.powf(e4) }
    }

    /// `∫_a^b J(τ)dτ` for `J = J_1 + J_3 + J_4`.
    pub fn j_sum_integral(&self, a: f64, b: f64) -> f64 {
        let [e1, _, e3, e4] = self.exponents();
        [(self.c1, e1), (self.c3, e3), (self.c4, e4)]
            .iter()
            .map(|&(c, e)| c / (e + 1.0) * (b.powf(e + 1.0) - a.powf(e + 1.0)))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;
    use crate::stats::loglog_slope;

    fn slope(kind: KernelKind, h: f64, pick: fn(&JValues) -> f64) -> f64 {
        let ts = [0.5, 1.0, 2.0, 4.0];
        let ys: Vec<f64> = ts.iter().map(|&t| pick(&j_functions(kind, t, h).unwrap())).collect();
        loglog_slope(&ts, &ys)
    }

    #[test]
    fn wave_j4_is_half_width() {
        assert!((j_functions(KernelKind::Wave, 3.0, 0.3).unwrap().j4 - 1.5).abs() < 1e-15);
    }

    #[test]
    fn wave_j1_matches_physical_space() {
        // ∫∫|G_t(x) − G_t(x+h)|²|h|^{2H−2} = (2t)^{2H} / (2H(1 − 2H))
        for &(t, h) in &[(1.0, 0.3), (2.5, 0.4), (0.7, 0.27)] {
            let exact = (2.0f64 * t).powf(2.0 * h) / (2.0 * h * (1.0 - 2.0 * h));
            let j1 = j_functions(KernelKind::Wave, t, h).unwrap().j1;
            assert!((j1 / exact - 1.0).abs() < 1e-8, "{j1} vs {exact}");
        }
    }

    #[test]
    fn heat_moments_match_gamma() {
        for &a in &[0.4, 0.8] {
            let exact = gamma((a + 1.0) / 2.0) * 2f64.powf((a + 1.0) / 2.0);
            let got = spectral_moment(KernelKind::Heat, 0.5, a).unwrap();
            assert!((got / exact - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn j2_matches_beta_function() {
        for kind in [KernelKind::Wave, KernelKind::Heat] {
            let h = 0.3;
            let [_, e3, e4] = exponents(kind, h);
            let b = gamma(e3 + 1.0) * gamma(e4 + 1.0) / gamma(e3 + e4 + 2.0);
            let j = j_functions(kind, 1.0, h).unwrap();
            assert!((j.j2 / (j.j3 * j.j4 * b) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn bdg_constant_closed_form() {
        // π c_H / D_H reduces to H(1 − 2H)/2
        for h in [0.27, 0.3, 0.45] {
            assert!((bdg_constant(h).unwrap() / (h * (1.0 - 2.0 * h) / 2.0) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn wave_scaling_exponents() {
        let h = 0.3;
        assert!((slope(KernelKind::Wave, h, |j| j.j1) - 2.0 * h).abs() < 1e-2);
        assert!((slope(KernelKind::Wave, h, |j| j.j3) - (4.0 * h - 1.0)).abs() < 1e-2);
        assert!((slope(KernelKind::Wave, h, |j| j.j4) - 1.0).abs() < 1e-2);
        assert!((slope(KernelKind::Wave, h, |j| j.j2) - (4.0 * h + 1.0)).abs() < 1e-2);
        let j1 = j_functions(KernelKind::Wave, 1.0, h).unwrap();
        let j2 = j_functions(KernelKind::Wave, 2.0, h).unwrap();
        assert!((j2.j1 / j1.j1 - 2f64.powf(2.0 * h)).abs() < 1e-2);
        assert!((j2.j3 / j1.j3 - 2f64.powf(4.0 * h - 1.0)).abs() < 1e-2);
    }

    #[test]
    fn heat_scaling_exponents() {
        let h = 0.35;
        assert!((slope(KernelKind::Heat, h, |j| j.j1) - (h - 1.0)).abs() < 1e-2);
        assert!((slope(KernelKind::Heat, h, |j| j.j3) - (2.0 * h - 1.5)).abs() < 1e-2);
        assert!((slope(KernelKind::Heat, h, |j| j.j4) + 0.5).abs() < 1e-2);
        assert!((slope(KernelKind::Heat, h, |j| j.j2) - (2.0 * h - 1.0)).abs() < 1e-2);
    }

    #[test]
    fn family_reproduces_direct_values() {
        let f = KernelFamily::new(KernelKind::Wave, 0.3).unwrap();
        let d = j_functions(KernelKind::Wave, 1.7, 0.3).unwrap();
        let p = f.eval(1.7);
        for (a, b) in [(p.j1, d.j1), (p.j2, d.j2), (p.j3, d.j3), (p.j4, d.j4)] {
            assert!((a / b - 1.0).abs() < 1e-7);
        }
    }
}
