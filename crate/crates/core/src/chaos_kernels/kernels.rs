use crate::error::{Error, Result};
use crate::quadrature::{cos_power_tail, integrate};
use crate::scalar::Real;

/// Wave propagator `G_t(x) = ½ 1{|x| < t}`, zero for `t ≤ 0`.
pub fn wave_kernel<T: Real>(t: T, x: T) -> T {
    if t > T::zero() && x.abs() < t { T::lit(0.5) } else { T::zero() }
}

/// `FG_t(ξ) = sin(t|ξ|)/|ξ|`, equal to `t` at the origin.
pub fn wave_kernel_ft<T: Real>(t: T, xi: T) -> T {
    let a = xi.abs();
    let z = t * a;
    if z.abs() < T::lit(1e-4) {
        t * (T::one() - z * z / T::lit(6.0))
    } else {
        z.sin() / a
    }
}

/// `∫_0^t FG_{t-s}(ξ) ds = (1 − cos tξ)/ξ²`.
pub fn wave_kernel_ft_integrated<T: Real>(t: T, xi: T) -> T {
    let z = t * xi;
    if z.abs() < T::lit(1e-3) {
        let z2 = z * z;
        t * t * (T::lit(0.5) - z2 / T::lit(24.0) + z2 * z2 / T::lit(720.0))
    } else {
        let s = (T::lit(0.5) * z).sin();
        T::lit(2.0) * s * s / (xi * xi)
    }
}

/// `∫_ℝ sin²(t|ξ|) |ξ|^{α−2} dξ`, finite exactly for `α ∈ (−1, 1)`.
pub fn weighted_g_integral(t: f64, alpha: f64) -> Result<f64> {
    if !(alpha > -1.0 && alpha < 1.0) {
        return Err(Error::Divergent(format!("alpha = {alpha} must lie in (-1, 1)")));
    }
    if !(t > 0.0) {
        return Err(crate::error::invalid("t", "must be positive"));
    }
    // head: sin²(tξ) ≈ (tξ)² − (tξ)⁴/3 + 2(tξ)⁶/45 on [0, d]
    let d = 0.01 / t;
    let head = t.powi(2) * d.powf(alpha + 1.0) / (alpha + 1.0) - t.powi(4) * d.powf(alpha + 3.0) / (3.0 * (alpha + 3.0))
        + 2.0 * t.powi(6) * d.powf(alpha + 5.0) / (45.0 * (alpha + 5.0));
    let period = std::f64::consts::PI / t;
    let panels = 400;
    let x = d + panels as f64 * period;
    let f = |u: f64| {
        let s = (t * u).sin();
        s * s * u.powf(alpha - 2.0)
    };
    let mut body = 0.0;
    for k in 0..panels {
        let a = d + k as f64 * period;
        body += integrate(f, a, a + period, 1e-15, 1e-12, 100).value;
    }
    // sin² = (1 − cos 2tu)/2 beyond the last panel
    let p = 2.0 - alpha;
    let tail = 0.5 * x.powf(1.0 - p) / (p - 1.0) - 0.5 * cos_power_tail(2.0 * t, x, p);
    Ok(2.0 * (head + body + tail))
}

/// `c_α = ∫ sin²|u| |u|^{α−2} du`.
pub fn c_alpha(alpha: f64) -> Result<f64> {
    weighted_g_integral(1.0, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_values() {
        assert_eq!(wave_kernel(1.0f64, 0.5), 0.5);
        assert_eq!(wave_kernel(-1.0, 0.0), 0.0);
        assert_eq!(wave_kernel(1.0, 2.0), 0.0);
        assert_eq!(wave_kernel(1.0, 1.0), 0.0);
    }

    #[test]
    fn transform_values() {
        assert_eq!(wave_kernel_ft(2.0f64, 0.0), 2.0);
        assert!(wave_kernel_ft(1.0f64, std::f64::consts::PI).abs() < 1e-15);
        assert!((wave_kernel_ft(1.0f64, 1.0) - 0.8414709848078965).abs() < 1e-15);
        // series and direct branches agree at the switch
        let (a, b) = (wave_kernel_ft(1.0f64, 0.99999e-4), wave_kernel_ft(1.0, 1.00001e-4));
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn integrated_transform_branches_agree() {
        for xi in [0.999e-3f64, 1.001e-3, 0.3, 7.0] {
            let direct = (1.0 - (2.0 * xi).cos()) / (xi * xi);
            assert!((wave_kernel_ft_integrated(2.0, xi) - direct).abs() < 1e-8 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn dirichlet_integral() {
        let v = weighted_g_integral(1.0, 0.0).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-9, "{v}");
        let v3 = weighted_g_integral(3.0, 0.0).unwrap();
        assert!((v3 - 3.0 * std::f64::consts::PI).abs() < 1e-8);
    }

    #[test]
    fn divergence_at_unit_exponent() {
        assert!(weighted_g_integral(1.0, 0.99).unwrap().is_finite());
        assert!(matches!(weighted_g_integral(1.0, 1.0), Err(Error::Divergent(_))));
        assert!(weighted_g_integral(1.0, -1.0).is_err());
    }
}
