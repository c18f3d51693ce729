//! Thin wrappers over `statrs` special functions plus a few closed forms.

use statrs::function::{erf, gamma};

pub fn gamma(x: f64) -> f64 {
    gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// `ln n!`
pub fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Dirichlet integral over the simplex `{τ_0 + … + τ_m = t, τ_j ≥ 0}` of `Π τ_j^{e_j}`.
pub fn dirichlet_simplex(t: f64, exponents: &[f64]) -> f64 {
    let m = exponents.len() as f64 - 1.0;
    let total: f64 = exponents.iter().sum::<f64>() + m;
    let ln_num: f64 = exponents.iter().map(|&e| ln_gamma(e + 1.0)).sum();
    (ln_num - ln_gamma(total + 1.0)).exp() * t.powf(total)
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_matches_simplex_volume() {
        // all exponents zero gives t^m / m!
        let v = dirichlet_simplex(2.0, &[0.0, 0.0, 0.0]);
        assert!((v - 4.0 / 2.0).abs() < 1e-12);
        // Beta integral: int_0^1 s(1-s) ds = 1/6
        let b = dirichlet_simplex(1.0, &[1.0, 1.0]);
        assert!((b - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn permutations_are_complete() {
        let p = permutations(4);
        assert_eq!(p.len(), 24);
        assert_eq!(p[0], vec![0, 1, 2, 3]);
        assert_eq!(p[23], vec![3, 2, 1, 0]);
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        let p = normal_cdf(1.959963984540054);
        assert!((p - 0.975).abs() < 1e-9, "{p}");
    }

    #[test]
    fn gamma_handles_negative_arguments() {
        // Γ(-0.5) = -2√π
        assert!((gamma(-0.5) + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }
}
