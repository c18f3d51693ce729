//! The index sets `A_n` from expanding `x_1 Π_{j≥2}(x_j + x_{j−1})`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u8>);

impl MultiIndex {
    pub fn order(&self) -> usize {
        self.0.len()
    }

    /// `a_1 ∈ {1,2}`, `a_n ∈ {0,1}`, interior entries in `{0,1,2}`, total `n`.
    pub fn is_admissible(&self) -> bool {
        let a = &self.0;
        let n = a.len();
        if n == 0 || a.iter().map(|&v| v as usize).sum::<usize>() != n {
            return false;
        }
        if n == 1 {
            return a[0] == 1;
        }
        (1..=2).contains(&a[0]) && a[n - 1] <= 1 && a[1..n - 1].iter().all(|&v| v <= 2)
    }

    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&a, &v)| v.powi(a as i32)).product()
    }
}

/// Each of the `2^{n−1}` ways of picking one term from every factor `(x_j + x_{j−1})`.
pub fn enumerate_a_n(n: usize) -> Result<Vec<MultiIndex>> {
    if n == 0 {
        return Err(invalid("n", "order must be at least 1"));
    }
    if n > 24 {
        return Err(invalid("n", "enumeration limited to n ≤ 24"));
    }
    let mut out = Vec::with_capacity(1 << (n - 1));
    for mask in 0u32..(1u32 << (n - 1)) {
        let mut a = vec![0u8; n];
        a[0] = 1;
        for j in 1..n {
            // bit set: factor j contributes x_{j−1}
            if mask >> (j - 1) & 1 == 1 { a[j - 1] += 1 } else { a[j] += 1 }
        }
        out.push(MultiIndex(a));
    }
    out.sort();
    Ok(out)
}

/// The exponent vectors `(1−2H)a` for `a ∈ A_n`.
pub fn enumerate_d_n(n: usize, h: f64) -> Result<Vec<Vec<f64>>> {
    let beta = 1.0 - 2.0 * h;
    Ok(enumerate_a_n(n)?.into_iter().map(|a| a.0.iter().map(|&v| beta * v as f64).collect()).collect())
}

/// `|x_1 Π_{j≥2}(x_j + x_{j−1}) − Σ_{a∈A_n} Π x_j^{a_j}|`.
pub fn multiindex_identity_check(x: &[f64]) -> Result<f64> {
    let n = x.len();
    let lhs = x[0] * (1..n).map(|j| x[j] + x[j - 1]).product::<f64>();
    let rhs: f64 = enumerate_a_n(n)?.iter().map(|a| a.monomial(x)).sum();
    Ok((lhs - rhs).abs())
}

/// `Σ_{a∈A_n} Π_{j<n} w[a_j]`, split by the last entry `a_n ∈ {0, 1}`.
///
/// Runs as a two-state recursion over the factor choices, so `n` can be large.
pub fn a_n_prefix_sums(n: usize, w: [f64; 3]) -> [f64; 2] {
    if n == 1 {
        return [0.0, 1.0];
    }
    // state: whether factor j+1 picks x_j (1) or x_{j+1} (0)
    let mut dp = [w[1], w[2]];
    for _ in 2..n {
        let mut next = [0.0; 2];
        for (c, &v) in dp.iter().enumerate() {
            for (c2, slot) in next.iter_mut().enumerate() {
                let a = (c == 0) as usize + (c2 == 1) as usize;
                *slot += v * w[a];
            }
        }
        dp = next;
    }
    // a_n = 1 when factor n picked x_n
    [dp[1], dp[0]]
}

/// `Σ_{a∈A_n} Π_j w[a_j]`.
pub fn a_n_weighted_sum(n: usize, w: [f64; 3]) -> f64 {
    let s = a_n_prefix_sums(n, w);
    s[0] * w[0] + s[1] * w[1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_orders() {
        assert_eq!(enumerate_a_n(1).unwrap(), vec![MultiIndex(vec![1])]);
        assert_eq!(enumerate_a_n(2).unwrap(), vec![MultiIndex(vec![1, 1]), MultiIndex(vec![2, 0])]);
        assert!(enumerate_a_n(0).is_err());
        assert!(multiindex_identity_check(&[5.0]).unwrap() == 0.0);
        assert!(multiindex_identity_check(&[2.0, 3.0]).unwrap() == 0.0);
    }

    #[test]
    fn indices_are_distinct() {
        for n in 1..=12 {
            let mut v = enumerate_a_n(n).unwrap();
            v.dedup();
            assert_eq!(v.len(), 1 << (n - 1));
        }
    }

    #[test]
    fn recursion_matches_enumeration() {
        let w = [0.7, 1.3, 2.9];
        for n in 1..=10 {
            let brute: f64 = enumerate_a_n(n).unwrap().iter().map(|a| a.0.iter().map(|&v| w[v as usize]).product::<f64>()).sum();
            let fast = a_n_weighted_sum(n, w);
            assert!((brute - fast).abs() < 1e-12 * brute, "n={n}");
        }
    }

    proptest! {
        #[test]
        fn every_index_is_admissible(n in 1usize..=12) {
            for a in enumerate_a_n(n).unwrap() {
                prop_assert!(a.is_admissible(), "{:?}", a);
            }
        }

        #[test]
        fn identity_holds(x in proptest::collection::vec(0.01f64..10.0, 1..=12)) {
            let lhs = x[0] * (1..x.len()).map(|j| x[j] + x[j - 1]).product::<f64>();
            prop_assert!(multiindex_identity_check(&x).unwrap() <= 1e-10 * lhs);
        }
    }
}
