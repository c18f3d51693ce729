//! The Gronwall-type sequence `a_n = Q(T)^n P(S_n ≤ T)`.
//!
//! `S_n` sums i.i.d. draws from the density `J/∫_0^T J` on `[0, T]`, `J = J_1 + J_3 + J_4`
//! for the propagator `√θ G`. The law does not depend on `θ`; `Q(T)` carries it.

use serde::{Deserialize, Serialize};

use super::jfun::{bdg_constant, KernelFamily, KernelKind};
use crate::error::{ensure, invalid, Result};
use crate::rng;
use crate::stats::Estimate;

pub const MAX_GRONWALL_ORDER: usize = 40;
pub const LAW_TABLE_POINTS: usize = 4096;
const BRACKET_CELLS: usize = 1024;

/// Tabulated distribution function of `J/∫J` on a uniform grid of `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LawTable {
    pub horizon: f64,
    pub cdf: Vec<f64>,
}

impl LawTable {
    pub fn new(family: &KernelFamily, horizon: f64, points: usize) -> Self {
        let step = horizon / points as f64;
        let total = family.j_sum_integral(0.0, horizon);
        let cdf = (0..=points).map(|k| family.j_sum_integral(0.0, k as f64 * step) / total).collect();
        Self { horizon, cdf }
    }

    pub fn points(&self) -> usize {
        self.cdf.len() - 1
    }

    /// Inverse distribution function, linear inside each cell.
    pub fn quantile(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c < u).clamp(1, self.points());
        let (lo, hi) = (self.cdf[k - 1], self.cdf[k]);
        let frac = if hi > lo { (u - lo) / (hi - lo) } else { 0.5 };
        (k as f64 - 1.0 + frac) * self.horizon / self.points() as f64
    }

    /// Masses of `cells` equal cells; `cells` must divide the table size.
    fn masses(&self, cells: usize) -> Vec<f64> {
        let per = self.points() / cells;
        (0..cells).map(|i| self.cdf[(i + 1) * per] - self.cdf[i * per]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallSequence {
    pub p: f64,
    pub h: f64,
    pub horizon: f64,
    pub theta: f64,
    pub kind: KernelKind,
    /// `C_{2,H}`.
    pub bdg_constant: f64,
    /// `Q(T) = C_{p,H} θ ∫_0^T J`.
    pub q_t: f64,
    /// `P̂(S_n ≤ T)` for `n = 1..N`.
    pub probabilities: Vec<Estimate>,
    /// Deterministic lower and upper brackets of `P(S_n ≤ T)` from cell convolutions.
    pub brackets: Vec<(f64, f64)>,
    /// `a_n` for `n = 1..N`, from the Monte Carlo probabilities.
    pub a: Vec<f64>,
    pub paths: usize,
    pub table_points: usize,
}

impl GronwallSequence {
    /// `Σ_{k ≤ n} a_k^{1/2}` for every `n`.
    pub fn sqrt_partial_sums(&self) -> Vec<f64> {
        self.a
            .iter()
            .scan(0.0, |s, &a| {
                *s += a.sqrt();
                Some(*s)
            })
            .collect()
    }

    /// `a_n` built from the upper convolution bracket instead of the sampled probability.
    pub fn a_upper(&self) -> Vec<f64> {
        self.brackets.iter().enumerate().map(|(i, b)| self.q_t.powi(i as i32 + 1) * b.1).collect()
    }

    /// `1 + 2 Σ a_n^{1/2}`.
    pub fn growth_constant(&self) -> f64 {
        1.0 + 2.0 * self.sqrt_partial_sums().last().copied().unwrap_or(0.0)
    }
}

/// Probabilities `P(Σ cells ≤ limit)` for `n = 1..n_max` with each draw landing on
/// cell index `i + shift` with mass `masses[i]`.
fn convolved_mass(masses: &[f64], shift: usize, n_max: usize) -> Vec<f64> {
    let m = masses.len();
    let mut kernel = vec![0.0; m + 1];
    for (i, &p) in masses.iter().enumerate() {
        if i + shift <= m {
            kernel[i + shift] += p;
        }
    }
    let mut dist = kernel.clone();
    let mut out = Vec::with_capacity(n_max);
    out.push(dist.iter().sum());
    for _ in 1..n_max {
        let mut next = vec![0.0; m + 1];
        for (a, &pa) in dist.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            for (b, &pb) in kernel[..=m - a].iter().enumerate() {
                next[a + b] += pa * pb;
            }
        }
        dist = next;
        out.push(dist.iter().sum());
    }
    out
}

/// `a_n` for the wave propagator.
pub fn gronwall_sequence(p: f64, h: f64, horizon: f64, theta: f64, n_max: usize, mc_budget: usize, seed: u64) -> Result<GronwallSequence> {
    gronwall_sequence_for(KernelKind::Wave, p, h, horizon, theta, n_max, mc_budget, seed)
}

#[allow(clippy::too_many_arguments)]
pub fn gronwall_sequence_for(
    kind: KernelKind,
    p: f64,
    h: f64,
    horizon: f64,
    theta: f64,
    n_max: usize,
    mc_budget: usize,
    seed: u64,
) -> Result<GronwallSequence> {
    if p != 2.0 {
        return Err(invalid("p", "only p = 2 has an identified BDG constant"));
    }
    ensure((1..=MAX_GRONWALL_ORDER).contains(&n_max), "N", "must lie in 1..=40")?;
    ensure(horizon > 0.0, "T", "must be positive")?;
    ensure(theta > 0.0, "theta", "must be positive")?;
    ensure(mc_budget > 0, "mc_budget", "must be positive")?;
    let family = KernelFamily::new(kind, h)?;
    let c = bdg_constant(h)?;
    let q_t = c * theta * family.j_sum_integral(0.0, horizon);
    let table = LawTable::new(&family, horizon, LAW_TABLE_POINTS);

    let blocks = rng::par_blocks(seed, mc_budget, 16_384, |rng, len| {
        let mut hits = vec![0u64; n_max];
        for _ in 0..len {
            let mut s = 0.0;
            for slot in hits.iter_mut() {
                s += table.quantile(rng::uniform(rng));
                if s > horizon {
                    break;
                }
                *slot += 1;
            }
        }
        hits
    });
    let mut hits = vec![0u64; n_max];
    for b in &blocks {
        for (a, x) in hits.iter_mut().zip(b) {
            *a += x;
        }
    }
    let n = mc_budget as f64;
    let probabilities: Vec<Estimate> = hits
        .iter()
        .map(|&k| {
            let q = k as f64 / n;
            Estimate { value: q, std_error: (q * (1.0 - q) / n).sqrt(), samples: mc_budget }
        })
        .collect();

    let masses = table.masses(BRACKET_CELLS);
    let lower = convolved_mass(&masses, 1, n_max);
    let upper = convolved_mass(&masses, 0, n_max);
    let brackets = lower.into_iter().zip(upper).collect();

    let a = probabilities.iter().enumerate().map(|(i, e)| q_t.powi(i as i32 + 1) * e.value).collect();
    Ok(GronwallSequence {
        p,
        h,
        horizon,
        theta,
        kind,
        bdg_constant: c,
        q_t,
        probabilities,
        brackets,
        a,
        paths: mc_budget,
        table_points: LAW_TABLE_POINTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_term_is_q() {
        let g = gronwall_sequence(2.0, 0.3, 1.0, 1.0, 10, 100_000, 1).unwrap();
        assert_eq!(g.probabilities[0].value, 1.0);
        assert!((g.a[0] - g.q_t).abs() < 1e-15);
        assert!(g.a.iter().all(|&a| a >= 0.0));
        assert!(g.probabilities.windows(2).all(|w| w[1].value <= w[0].value));
    }

    #[test]
    fn monte_carlo_inside_brackets() {
        let g = gronwall_sequence(2.0, 0.3, 1.0, 1.0, 8, 200_000, 2).unwrap();
        for (e, &(lo, hi)) in g.probabilities.iter().zip(&g.brackets) {
            assert!(lo <= hi);
            // binomial error at the bracketed probability, since p̂ may be 0
            let se = (hi / e.samples as f64).sqrt();
            assert!(e.value >= lo - 4.0 * se && e.value <= hi + 4.0 * se, "{e:?} {lo} {hi}");
        }
    }

    #[test]
    fn law_is_theta_free() {
        let a = gronwall_sequence(2.0, 0.3, 1.0, 1.0, 5, 20_000, 3).unwrap();
        let b = gronwall_sequence(2.0, 0.3, 1.0, 3.0, 5, 20_000, 3).unwrap();
        assert_eq!(a.probabilities, b.probabilities);
        assert!((b.q_t / a.q_t - 3.0).abs() < 1e-12);
    }

    #[test]
    fn quantile_inverts_table() {
        let f = KernelFamily::new(KernelKind::Wave, 0.3).unwrap();
        let t = LawTable::new(&f, 2.0, 256);
        for u in [0.01, 0.3, 0.77, 0.999] {
            let x = t.quantile(u);
            let c = f.j_sum_integral(0.0, x) / f.j_sum_integral(0.0, 2.0);
            assert!((c - u).abs() < 1e-4);
        }
    }

    #[test]
    fn square_root_partial_sums_settle() {
        let g = gronwall_sequence(2.0, 0.3, 1.0, 1.0, 40, 1_000_000, 11).unwrap();
        let s = g.sqrt_partial_sums();
        assert!((s[39] - s[29]).abs() < 1e-6);
        let mut acc = 0.0;
        let upper: Vec<f64> = g.a_upper().iter().map(|a| { acc += a.sqrt(); acc }).collect();
        assert!((upper[39] - upper[29]).abs() < 1e-6);
        assert!(g.brackets.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn rejects_other_p() {
        assert!(gronwall_sequence(4.0, 0.3, 1.0, 1.0, 5, 10, 0).is_err());
    }
}
