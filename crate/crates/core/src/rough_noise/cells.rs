//! Exact sampling of the noise on a row of equal cells by circulant embedding.
//!
//! `W_i = W(1_{[iδ,(i+1)δ)})` is a stationary Gaussian sequence (fractional
//! Gaussian noise) with covariance `γ(k) = ½δ^{2H}(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H})`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::rng::{self, Stream};

/// `⟨1_{cell_i}, 1_{cell_{i+k}}⟩_{P0}` for cells of width `delta`.
pub fn cell_covariance(h: f64, delta: f64, k: i64) -> f64 {
    let p = 2.0 * h;
    let k = k.unsigned_abs() as f64;
    0.5 * delta.powf(p) * ((k + 1.0).powf(p) - 2.0 * k.powf(p) + (k - 1.0).abs().powf(p))
}

pub struct CellNoise {
    pub h: f64,
    pub delta: f64,
    pub cells: usize,
    sqrt_eig: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CellNoise {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CellNoise")
            .field("h", &self.h)
            .field("delta", &self.delta)
            .field("cells", &self.cells)
            .field("embedding", &self.sqrt_eig.len())
            .finish()
    }
}

impl CellNoise {
    pub fn new(h: f64, delta: f64, cells: usize) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(invalid("H", "must lie in (0, 1)"));
        }
        if !(delta > 0.0) || cells == 0 {
            return Err(invalid("cells", "need a positive width and at least one cell"));
        }
        let m = 2 * cells.next_power_of_two().max(2);
        let mut row: Vec<Complex64> = (0..m)
            .map(|j| {
                let k = if j <= m / 2 { j } else { m - j } as i64;
                Complex64::new(cell_covariance(h, delta, k), 0.0)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);
        let top = row.iter().map(|z| z.re).fold(0.0, f64::max);
        let mut sqrt_eig = Vec::with_capacity(m);
        for z in &row {
            if z.re < -1e-10 * top {
                return Err(Error::Degenerate(format!("circulant embedding not nonnegative: {}", z.re)));
            }
            sqrt_eig.push((z.re.max(0.0) / m as f64).sqrt());
        }
        Ok(Self { h, delta, cells, sqrt_eig, fft })
    }

    pub fn covariance(&self, k: i64) -> f64 {
        cell_covariance(self.h, self.delta, k)
    }

    /// Two independent draws of the cell vector, written into `a` and `b`.
    pub fn sample_pair(&self, rng: &mut Stream, a: &mut [f64], b: &mut [f64]) {
        let m = self.sqrt_eig.len();
        let mut buf: Vec<Complex64> = Vec::with_capacity(m);
        for &s in &self.sqrt_eig {
            let (x, y) = rng::normal_pair(rng);
            buf.push(Complex64::new(s * x, s * y));
        }
        self.fft.process(&mut buf);
        for i in 0..self.cells.min(a.len()) {
            a[i] = buf[i].re;
        }
        for i in 0..self.cells.min(b.len()) {
            b[i] = buf[i].im;
        }
    }

    /// One draw of the cell vector.
    pub fn sample(&self, rng: &mut Stream) -> Vec<f64> {
        let mut a = vec![0.0; self.cells];
        let mut b = Vec::new();
        self.sample_pair(rng, &mut a, &mut b);
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_sums_reproduce_fbm_variance() {
        // ⟨Σ cells, Σ cells⟩ over n cells equals (nδ)^{2H}
        let (h, d, n) = (0.3, 0.1, 25);
        let s: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| cell_covariance(h, d, i - j)).sum();
        assert!((s - (n as f64 * d).powf(2.0 * h)).abs() < 1e-12);
    }

    #[test]
    fn empirical_covariance_matches() {
        let noise = CellNoise::new(0.3, 0.05, 100).unwrap();
        let mut r = rng::stream(3, 0);
        let (mut a, mut b) = (vec![0.0; 100], vec![0.0; 100]);
        let reps = 20_000;
        let mut acc = [0.0; 3];
        for _ in 0..reps {
            noise.sample_pair(&mut r, &mut a, &mut b);
            for v in [&a, &b] {
                acc[0] += v[10] * v[10];
                acc[1] += v[10] * v[11];
                acc[2] += v[10] * v[40];
            }
        }
        let n = 2.0 * reps as f64;
        for (k, lag) in [(0usize, 0i64), (1, 1), (2, 30)] {
            let emp = acc[k] / n;
            let exact = noise.covariance(lag);
            let se = noise.covariance(0) * (2.0 / n).sqrt();
            assert!((emp - exact).abs() < 4.0 * se, "lag {lag}: {emp} vs {exact}");
        }
    }
}
