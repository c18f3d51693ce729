use rayon::prelude::*;

use super::coefficients::{BandTensor, DiscretizedChaosCoefficients};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use crate::rough_noise::CellNoise;
use crate::stats::MeanVar;

/// One draw of the truncated chaos: `I_n(tensor_n)` for `n = 1..=3` (zero past the truncation).
pub type ChaosDraw = [f64; 3];

/// Samples the multiple integrals of a coefficient set in Wick form.
///
/// Cells are correlated (`E[W_i W_j] = Γ_{ij}`), so the Hermite corrections use `Γ`:
/// `I_2 = Σ K_{ij} W_i W_j − tr(KΓ)` and `I_3 = Σ K_{ijk} W_i W_j W_k − 3 Σ_i W_i (Σ_{jk} K_{ijk} Γ_{jk})`.
pub struct ChaosSampler<'a> {
    coeffs: &'a DiscretizedChaosCoefficients,
    noise: CellNoise,
    trace2: f64,
    contraction3: Vec<f64>,
}

impl<'a> ChaosSampler<'a> {
    pub fn new(coeffs: &'a DiscretizedChaosCoefficients) -> Result<Self> {
        let grid = coeffs.grid;
        let noise = CellNoise::new(coeffs.h, grid.delta, grid.cells)?;
        let reach = coeffs.tensors.iter().map(|k| 2 * k.band + 1).max().unwrap_or(1);
        let gamma = grid.covariance_lags(coeffs.h, grid.cells.max(reach));
        let g = |d: isize| gamma[d.unsigned_abs()];
        let trace2 = coeffs.order(2).map_or(0.0, |k| {
            let b = k.band as isize;
            let w = k.width();
            (0..k.cells)
                .map(|i| (-b..=b).map(|d| k.data[i * w + (d + b) as usize] * g(d)).sum::<f64>())
                .sum()
        });
        let contraction3 = coeffs.order(3).map_or_else(Vec::new, |k| {
            let b = k.band as isize;
            let w = k.width();
            (0..k.cells)
                .map(|i| {
                    let row = &k.data[i * w * w..(i + 1) * w * w];
                    let mut s = 0.0;
                    for d1 in -b..=b {
                        for d2 in -b..=b {
                            s += row[(d1 + b) as usize * w + (d2 + b) as usize] * g(d1 - d2);
                        }
                    }
                    s
                })
                .collect()
        });
        Ok(Self { coeffs, noise, trace2, contraction3 })
    }

    /// Chaos components for one noise vector.
    pub fn evaluate(&self, w: &[f64]) -> ChaosDraw {
        let mut out = [0.0; 3];
        for k in &self.coeffs.tensors {
            out[k.order - 1] = match k.order {
                1 => k.data.iter().zip(w).map(|(a, b)| a * b).sum(),
                2 => quadratic(k, w) - self.trace2,
                _ => cubic(k, w) - 3.0 * self.contraction3.iter().zip(w).map(|(a, b)| a * b).sum::<f64>(),
            };
        }
        out
    }

    /// `count` independent draws from one stream.
    pub fn draw(&self, rng: &mut Stream, count: usize) -> Vec<ChaosDraw> {
        let n = self.coeffs.grid.cells;
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            self.noise.sample_pair(rng, &mut a, &mut b);
            out.push(self.evaluate(&a));
            if out.len() < count {
                out.push(self.evaluate(&b));
            }
        }
        out
    }
}

fn quadratic(k: &BandTensor, w: &[f64]) -> f64 {
    let b = k.band as isize;
    let width = k.width();
    let n = k.cells as isize;
    let mut s = 0.0;
    for i in 0..n {
        let row = &k.data[i as usize * width..(i as usize + 1) * width];
        let lo = (-b).max(-i);
        let hi = b.min(n - 1 - i);
        let mut r = 0.0;
        for d in lo..=hi {
            r += row[(d + b) as usize] * w[(i + d) as usize];
        }
        s += w[i as usize] * r;
    }
    s
}

fn cubic(k: &BandTensor, w: &[f64]) -> f64 {
    let b = k.band as isize;
    let width = k.width();
    let n = k.cells as isize;
    let mut s = 0.0;
    for i in 0..n {
        let row = &k.data[i as usize * width * width..(i as usize + 1) * width * width];
        let lo = (-b).max(-i);
        let hi = b.min(n - 1 - i);
        let mut r = 0.0;
        for d1 in lo..=hi {
            let inner = &row[(d1 + b) as usize * width..(d1 + b + 1) as usize * width];
            let mut q = 0.0;
            for d2 in lo..=hi {
                q += inner[(d2 + b) as usize] * w[(i + d2) as usize];
            }
            r += q * w[(i + d1) as usize];
        }
        s += w[i as usize] * r;
    }
    s
}

/// One sample of the truncated `F_{R,θ}(t)` (all stored orders) for `seed`.
pub fn sample_f_r(coeffs: &DiscretizedChaosCoefficients, seed: u64) -> Result<f64> {
    let s = ChaosSampler::new(coeffs)?;
    let mut rng = rng::stream(seed, 0);
    Ok(s.draw(&mut rng, 1)[0].iter().sum())
}

const SAMPLE_BLOCK: usize = 256;

/// `count` draws of the chaos components, independent of the thread count.
pub fn sample_chaos(coeffs: &DiscretizedChaosCoefficients, count: usize, seed: u64) -> Result<Vec<ChaosDraw>> {
    let s = ChaosSampler::new(coeffs)?;
    Ok(rng::par_blocks(seed, count, SAMPLE_BLOCK, |rng, len| s.draw(rng, len)).into_iter().flatten().collect())
}

/// Sums the chaos components, optionally dropping the first order.
pub fn combine(draws: &[ChaosDraw], include_first: bool) -> Vec<f64> {
    let from = if include_first { 0 } else { 1 };
    draws.iter().map(|d| d[from..].iter().sum()).collect()
}

/// Empirical `E[I_m I_n]` over draws.
pub fn empirical_cross_moment(draws: &[ChaosDraw], m: usize, n: usize) -> crate::stats::Estimate {
    let mut acc = MeanVar::default();
    for d in draws {
        acc.push(d[m - 1] * d[n - 1]);
    }
    acc.estimate()
}

/// Largest grid for which the order-3 exact moment is attempted (cost `N^4`).
const EXACT_ORDER3_CELLS: usize = 160;

/// Exact `E[I_n(tensor_n)²]` for every stored order:
/// `c^⊤Γc`, `2 tr(KΓKΓ)` and `6 ⟨K, Γ^{⊗3} K⟩`.
pub fn exact_second_moments(coeffs: &DiscretizedChaosCoefficients) -> Result<Vec<f64>> {
    let gamma = coeffs.grid.covariance_row(coeffs.h);
    coeffs
        .tensors
        .iter()
        .map(|k| match k.order {
            1 => Ok(first_moment(&k.data, &gamma)),
            2 => Ok(2.0 * second_moment(k, &gamma)),
            _ => {
                if k.cells > EXACT_ORDER3_CELLS {
                    return Err(Error::Resource(format!(
                        "exact third-order moment limited to {EXACT_ORDER3_CELLS} cells, grid has {}",
                        k.cells
                    )));
                }
                Ok(6.0 * third_moment(k, &gamma))
            }
        })
        .collect()
}

fn first_moment(c: &[f64], gamma: &[f64]) -> f64 {
    let n = c.len();
    (0..n)
        .into_par_iter()
        .map(|i| c[i] * (0..n).map(|j| gamma[i.abs_diff(j)] * c[j]).sum::<f64>())
        .sum()
}

/// `tr(KΓKΓ) = Σ_{il} (KΓ)_{il} (ΓK)_{il}`, one row at a time.
fn second_moment(k: &BandTensor, gamma: &[f64]) -> f64 {
    let n = k.cells;
    let b = k.band as isize;
    let w = k.width();
    let entry = |i: usize, d: isize| k.data[i * w + (d + b) as usize];
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut kg = vec![0.0; n];
            let mut gk = vec![0.0; n];
            for d in -b..=b {
                let j = i as isize + d;
                if j < 0 || j >= n as isize {
                    continue;
                }
                let kij = entry(i, d);
                if kij == 0.0 {
                    continue;
                }
                for (l, v) in kg.iter_mut().enumerate() {
                    *v += kij * gamma[(j as usize).abs_diff(l)];
                }
            }
            for j in 0..n {
                let gij = gamma[i.abs_diff(j)];
                let lo = (-b).max(-(j as isize));
                let hi = b.min(n as isize - 1 - j as isize);
                for d in lo..=hi {
                    gk[(j as isize + d) as usize] += gij * entry(j, d);
                }
            }
            kg.iter().zip(&gk).map(|(a, c)| a * c).sum::<f64>()
        })
        .sum()
}

/// `⟨K, Γ^{⊗3}K⟩` on the dense expansion of a small tensor.
fn third_moment(k: &BandTensor, gamma: &[f64]) -> f64 {
    let n = k.cells;
    let mut dense = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                dense[(i * n + j) * n + l] = k.get(&[i, j, l]);
            }
        }
    }
    let g = |a: usize, b: usize| gamma[a.abs_diff(b)];
    // apply Γ along each axis in turn
    let mut cur = dense.clone();
    for axis in 0..3 {
        let mut next = vec![0.0; n * n * n];
        next.par_chunks_mut(n * n).enumerate().for_each(|(i, out)| {
            for j in 0..n {
                for l in 0..n {
                    let mut s = 0.0;
                    for m in 0..n {
                        let src = match axis {
                            0 => (m * n + j) * n + l,
                            1 => (i * n + m) * n + l,
                            _ => (i * n + j) * n + m,
                        };
                        let pivot = [i, j, l][axis];
                        s += g(pivot, m) * cur[src];
                    }
                    out[j * n + l] = s;
                }
            }
        });
        cur = next;
    }
    dense.iter().zip(&cur).map(|(a, b)| a * b).sum()
}
