use crate::scalar::Real;

/// Fejér kernel `ℓ_R(ξ) = sin²(R|ξ|)/(πRξ²)`, equal to `R/π` at the origin.
pub fn fejer_kernel<T: Real>(r: T, xi: T) -> T {
    let z = r * xi;
    if z.abs() < T::lit(1e-4) {
        r / T::PI() * (T::one() - z * z / T::lit(3.0))
    } else {
        let s = z.sin();
        s * s / (T::PI() * r * xi * xi)
    }
}

/// Draws `u` with density `sin²u/(πu²)` by rejection from a Cauchy proposal
/// (acceptance rate ½); `η = u/R` then has density `ℓ_R`.
pub fn sample_fejer_unit(rng: &mut crate::rng::Stream) -> f64 {
    loop {
        let u = (std::f64::consts::PI * (crate::rng::uniform(rng) - 0.5)).tan();
        // sin²u/(πu²) ÷ 1/(π(1+u²)) = sin²u (1 + u²)/u² ≤ 2
        let ratio = if u.abs() < 1e-8 { 1.0 } else { u.sin().powi(2) * (1.0 + u * u) / (u * u) };
        if 2.0 * crate::rng::uniform(rng) <= ratio {
            return u;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use proptest::prelude::*;

    #[test]
    fn origin_value() {
        assert!((fejer_kernel(2.0f64, 0.0) - 2.0 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn unit_mass() {
        for r in [1.0, 10.0] {
            // panels over the lobes, tail ∫_X^∞ ≤ 1/(πR X)
            let x = 2000.0;
            let w = std::f64::consts::PI / r;
            let n = (x / w) as usize;
            let m: f64 = (0..n).map(|k| integrate(|v| fejer_kernel(r, v), k as f64 * w, (k + 1) as f64 * w, 1e-14, 1e-12, 50).value).sum();
            let tail = 0.5 / (std::f64::consts::PI * r * n as f64 * w);
            assert!((2.0 * (m + tail) - 1.0).abs() < 1e-3, "R={r}: {}", 2.0 * m);
        }
    }

    #[test]
    fn sampler_matches_density() {
        let mut rng = crate::rng::stream(4, 0);
        let n = 200_000;
        let inside = (0..n).filter(|_| sample_fejer_unit(&mut rng).abs() < 1.0).count() as f64 / n as f64;
        let exact = 2.0 * integrate(|v: f64| fejer_kernel(1.0, v), 0.0, 1.0, 1e-13, 1e-12, 50).value;
        assert!((inside - exact).abs() < 4.0 * (exact * (1.0 - exact) / n as f64).sqrt());
    }

    proptest! {
        #[test]
        fn nonnegative(r in 0.01f64..1e3, xi in -1e3f64..1e3) {
            prop_assert!(fejer_kernel(r, xi) >= 0.0);
        }
    }
}
