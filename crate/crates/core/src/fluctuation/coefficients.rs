use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ChaosSampleConfig, MAX_CHAOS};
use crate::chaos_kernels::{chain_kernel_average, chain_kernel_point};
use crate::error::{ensure, Error, Result};
use crate::rough_noise::cell_covariance;
use crate::special::permutations;

/// What the chaos kernels integrate against: the window `[−R, R]` or a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelTarget {
    Average { r: f64 },
    Point { x: f64 },
}

/// A row of equal cells `[origin + iδ, origin + (i+1)δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellGrid {
    pub origin: f64,
    pub delta: f64,
    pub cells: usize,
}

impl CellGrid {
    /// Cells covering the support of the kernels of `target` at time `t`, centred on it.
    pub fn covering(target: KernelTarget, t: f64, delta: f64) -> Self {
        let (mid, half) = match target {
            KernelTarget::Average { r } => (0.0, r + t),
            KernelTarget::Point { x } => (x, t),
        };
        let cells = ((2.0 * half / delta).ceil() as usize).max(1);
        Self { origin: mid - 0.5 * cells as f64 * delta, delta, cells }
    }

    pub fn center(&self, i: usize) -> f64 {
        self.origin + (i as f64 + 0.5) * self.delta
    }

    /// `Γ_{ij} = γ(i − j)` for `|i − j| < cells`.
    pub fn covariance_row(&self, h: f64) -> Vec<f64> {
        self.covariance_lags(h, self.cells)
    }

    /// `γ(0), .., γ(len − 1)`.
    pub fn covariance_lags(&self, h: f64, len: usize) -> Vec<f64> {
        (0..len).map(|k| cell_covariance(h, self.delta, k as i64)).collect()
    }
}

/// Symmetric order-`n` tensor over cells, stored along the band `|i_k − i_1| ≤ band`.
///
/// Entry `(i, i+d_2, .., i+d_n)` lives at `i·w^{n−1} + Σ (d_k + band)·w^{n−k}`, `w = 2·band + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandTensor {
    pub order: usize,
    pub cells: usize,
    pub band: usize,
    pub data: Vec<f64>,
}

impl BandTensor {
    pub fn width(&self) -> usize {
        2 * self.band + 1
    }

    fn row_len(order: usize, band: usize) -> usize {
        (2 * band + 1).pow(order as u32 - 1)
    }

    /// Entry at cell indices `idx` (any order), zero off the band or the grid.
    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.order);
        let i = idx[0];
        let b = self.band as isize;
        let mut pos = i * Self::row_len(self.order, self.band);
        let w = self.width();
        let mut stride = Self::row_len(self.order, self.band);
        for &j in &idx[1..] {
            if j >= self.cells {
                return 0.0;
            }
            let d = j as isize - i as isize;
            if d.abs() > b {
                return 0.0;
            }
            stride /= w;
            pos += (d + b) as usize * stride;
        }
        self.data[pos]
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }

    /// `self − other` on a common grid and band.
    pub fn sub(&self, other: &BandTensor) -> Result<BandTensor> {
        if self.order != other.order || self.cells != other.cells || self.band != other.band {
            return Err(Error::LengthMismatch { expected: self.data.len(), found: other.data.len() });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(BandTensor { data, ..self.clone() })
    }
}

/// The truncated chaos of `F_{R,θ}(t)` (or of `u_θ(t,x) − 1`) in the cell basis.
///
/// Order `n` holds `θ^{n/2}` times the symmetrized kernel at the cell centres, so
/// `Σ_n I_n(tensor_n)` is the truncated variable itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedChaosCoefficients {
    pub h: f64,
    pub t: f64,
    pub theta: f64,
    pub target: KernelTarget,
    pub grid: CellGrid,
    pub tensors: Vec<BandTensor>,
}

impl DiscretizedChaosCoefficients {
    pub fn order(&self, n: usize) -> Option<&BandTensor> {
        self.tensors.get(n.wrapping_sub(1))
    }

    pub fn n_chaos(&self) -> usize {
        self.tensors.len()
    }

    /// Difference of two builds on the same grid, e.g. `F_R(t) − F_R(s)`.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        ensure(self.grid == other.grid, "grid", "differences need a common grid")?;
        let tensors = self.tensors.iter().zip(&other.tensors).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?;
        Ok(Self { tensors, ..self.clone() })
    }
}

/// Symmetrized chain kernel at the points `ys`.
pub fn symmetric_kernel(t: f64, target: KernelTarget, ys: &[f64]) -> f64 {
    let perms = permutations(ys.len());
    let mut buf = [0.0f64; MAX_CHAOS];
    let mut s = 0.0;
    for sigma in &perms {
        for (k, &j) in sigma.iter().enumerate() {
            buf[k] = ys[j];
        }
        let y = &buf[..ys.len()];
        s += match target {
            KernelTarget::Average { r } => chain_kernel_average(t, y, r),
            KernelTarget::Point { x } => chain_kernel_point(t, y, x),
        };
    }
    s / perms.len() as f64
}

/// Builds the cell-basis chaos tensors of `F_{R,θ}(t)` for `config`.
pub fn build_coefficients(config: &ChaosSampleConfig) -> Result<DiscretizedChaosCoefficients> {
    config.validate()?;
    let target = KernelTarget::Average { r: config.r };
    let grid = CellGrid::covering(target, config.t, config.delta);
    build_on_grid(config, target, grid)
}

/// Builds the tensors for `target` on a given grid; the band follows from `t` and `δ`.
pub fn build_on_grid(config: &ChaosSampleConfig, target: KernelTarget, grid: CellGrid) -> Result<DiscretizedChaosCoefficients> {
    build_with_band(config, target, grid, band_for(config.t, grid))
}

/// Band wide enough for every kernel up to time `t`.
pub fn band_for(t: f64, grid: CellGrid) -> usize {
    ((t / grid.delta).ceil() as usize + 1).min(grid.cells.saturating_sub(1))
}

/// As [`build_on_grid`] with an explicit band, so builds at different times can be subtracted.
pub fn build_with_band(
    config: &ChaosSampleConfig,
    target: KernelTarget,
    grid: CellGrid,
    band: usize,
) -> Result<DiscretizedChaosCoefficients> {
    config.validate()?;
    ensure(band >= band_for(config.t, grid), "band", "narrower than the kernel support")?;
    let n_chaos = config.n_chaos;
    let w = 2 * band + 1;
    let entries = grid.cells.saturating_mul(w.saturating_pow(n_chaos as u32 - 1));
    if entries > config.entry_budget {
        return Err(Error::Resource(format!(
            "order-{n_chaos} tensor needs {entries} entries, budget is {}",
            config.entry_budget
        )));
    }
    let t = config.t;
    let mut tensors = Vec::with_capacity(n_chaos);
    for n in 1..=n_chaos {
        let row = BandTensor::row_len(n, band);
        let mut data = vec![0.0; grid.cells * row];
        let amp = config.theta.powf(0.5 * n as f64);
        let b = band as isize;
        data.par_chunks_mut(row).enumerate().for_each(|(i, out)| {
            let yi = grid.center(i);
            let inside = |d: isize| {
                let j = i as isize + d;
                (j >= 0 && (j as usize) < grid.cells).then(|| grid.center(j as usize))
            };
            match n {
                1 => out[0] = amp * symmetric_kernel(t, target, &[yi]),
                2 => {
                    for d in -b..=b {
                        if let Some(yj) = inside(d) {
                            out[(d + b) as usize] = amp * symmetric_kernel(t, target, &[yi, yj]);
                        }
                    }
                }
                _ => {
                    for d1 in -b..=b {
                        let Some(yj) = inside(d1) else { continue };
                        for d2 in -b..=b {
                            // all three points share the band only if they are within it pairwise
                            if (d1 - d2).abs() > b {
                                continue;
                            }
                            if let Some(yk) = inside(d2) {
                                out[((d1 + b) as usize) * w + (d2 + b) as usize] =
                                    amp * symmetric_kernel(t, target, &[yi, yj, yk]);
                            }
                        }
                    }
                }
            }
        });
        tensors.push(BandTensor { order: n, cells: grid.cells, band, data });
    }
    Ok(DiscretizedChaosCoefficients { h: config.h, t, theta: config.theta, target, grid, tensors })
}

/// Ornstein–Uhlenbeck rescaling `T_τ`: the order-`n` tensor is multiplied by `e^{−nτ}`,
/// which is the same as rebuilding with `θ e^{−2τ}`.
pub fn ou_rescale(coeffs: &DiscretizedChaosCoefficients, tau: f64) -> Result<DiscretizedChaosCoefficients> {
    ensure(tau >= 0.0 && tau.is_finite(), "tau", "must be nonnegative")?;
    let mut out = coeffs.clone();
    for t in out.tensors.iter_mut() {
        t.scale((-(t.order as f64) * tau).exp());
    }
    out.theta = coeffs.theta * (-2.0 * tau).exp();
    Ok(out)
}
