//! Explicit Itô-point time stepping of the Volterra equation for `V` with an
//! impulse start, on a space-time lattice with `dx = dt`.
//!
//! With unit Courant number the leapfrog update `V^{m+1}_j = V^m_{j+1} + V^m_{j−1} − V^{m−1}_j`
//! propagates the wave kernel exactly on lattice nodes, so the noise-free run
//! reproduces `G` and every field stays inside the light cone. The noise enters
//! as a velocity kick `√θ V^m_j ΔX_j` on `[t_m, t_{m+1})`, where `ΔX_j` is the
//! white-in-time increment of the cell `j`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, invalid, Result};
use crate::rng::{self, Stream};
use crate::rough_noise::{CellNoise, SpectralMeasureParams};
use crate::stats::Estimate;

pub const DEFAULT_STEPS: usize = 512;
const REPLICA_BLOCK: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalshGrid {
    pub horizon: f64,
    pub dt: f64,
    pub dx: f64,
    pub h: f64,
    /// Zero cells kept beyond the light cone on each side.
    pub margin: usize,
    /// Slices are retained every `record_every` steps, plus the final one.
    pub record_every: usize,
}

impl WalshGrid {
    /// `steps` steps over `[0, horizon]`, `dx = dt`.
    pub fn new(horizon: f64, steps: usize, h: f64) -> Result<Self> {
        ensure(horizon > 0.0, "T", "must be positive")?;
        ensure(steps >= 2, "steps", "need at least two steps")?;
        let dt = horizon / steps as f64;
        Self::with_spacing(horizon, dt, dt, h)
    }

    /// Rejects `dt > dx` (CFL) and any Courant number other than one, which the
    /// lattice propagator needs to stay exact.
    pub fn with_spacing(horizon: f64, dt: f64, dx: f64, h: f64) -> Result<Self> {
        SpectralMeasureParams::new(h)?;
        ensure(horizon > 0.0, "T", "must be positive")?;
        ensure(dt > 0.0 && dx > 0.0, "dt", "steps must be positive")?;
        if dt > dx * (1.0 + 1e-12) {
            return Err(invalid("dt", format!("CFL violated: dt = {dt} exceeds dx = {dx}")));
        }
        if (dt / dx - 1.0).abs() > 1e-12 {
            return Err(invalid("dx", "the lattice scheme needs dx = dt"));
        }
        let steps = (horizon / dt).round() as usize;
        Ok(Self { horizon, dt, dx, h, margin: 4, record_every: (steps / 16).max(1) })
    }

    pub fn default_for(horizon: f64, h: f64) -> Result<Self> {
        Self::new(horizon, DEFAULT_STEPS, h)
    }

    fn steps_between(&self, r: f64, t: f64) -> Result<usize> {
        ensure(r >= 0.0 && r < t, "r", "need 0 ≤ r < t")?;
        ensure(t <= self.horizon * (1.0 + 1e-12), "t", "exceeds the grid horizon")?;
        let m = ((t - r) / self.dt).round() as usize;
        ensure(m >= 1, "t", "shorter than one step")?;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSlice {
    pub step: usize,
    pub time: f64,
    pub values: Vec<f64>,
}

/// Retained slices of one replica; cell `j` sits at `z + (j − center)·dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolterraField {
    pub r: f64,
    pub z: f64,
    pub theta: f64,
    pub dx: f64,
    pub center: usize,
    pub slices: Vec<FieldSlice>,
}

impl VolterraField {
    pub fn position(&self, j: usize) -> f64 {
        self.z + (j as f64 - self.center as f64) * self.dx
    }

    /// `V(s_k, x)` from the cell containing `x`; zero off the lattice.
    pub fn value(&self, k: usize, x: f64) -> f64 {
        let off = ((x - self.z) / self.dx).round();
        let j = self.center as f64 + off;
        let s = &self.slices[k];
        if j < 0.0 || j >= s.values.len() as f64 { 0.0 } else { s.values[j as usize] }
    }

    pub fn last(&self) -> &FieldSlice {
        self.slices.last().expect("at least one slice")
    }

    /// Nonzero cells farther than one cell outside `|x − z| ≤ t − r`.
    pub fn light_cone_violations(&self) -> usize {
        self.slices
            .iter()
            .map(|s| {
                s.values
                    .iter()
                    .enumerate()
                    .filter(|&(j, &v)| v != 0.0 && j.abs_diff(self.center) > s.step)
                    .count()
            })
            .sum()
    }

    /// `(x, V)` pairs of slice `k`.
    pub fn points(&self, k: usize) -> Vec<(f64, f64)> {
        self.slices[k].values.iter().enumerate().map(|(j, &v)| (self.position(j), v)).collect()
    }
}

struct Lattice {
    cells: usize,
    center: usize,
    steps: usize,
    noise: Option<CellNoise>,
    kick: f64,
}

impl Lattice {
    fn new(grid: &WalshGrid, r: f64, t: f64, theta: f64) -> Result<Self> {
        ensure(theta >= 0.0, "theta", "must be nonnegative")?;
        let steps = grid.steps_between(r, t)?;
        let cells = 2 * (steps + grid.margin) + 1;
        let noise = if theta > 0.0 { Some(CellNoise::new(grid.h, grid.dx, cells)?) } else { None };
        Ok(Self { cells, center: steps + grid.margin, steps, noise, kick: (theta * grid.dt).sqrt() })
    }

    /// Runs one replica; `visit(m, V^m)` is called for `m = 1..=steps`.
    fn run(&self, rng: &mut Stream, mut visit: impl FnMut(usize, &[f64])) {
        let n = self.cells;
        let (mut prev, mut cur, mut next) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        cur[self.center] = 0.5;
        prev[self.center] = -0.5;
        let (mut da, mut db) = (vec![0.0; n], vec![0.0; n]);
        let mut spare = false;
        for m in 1..=self.steps {
            visit(m, &cur);
            if m == self.steps {
                break;
            }
            let live = m.min(self.center);
            let (lo, hi) = (self.center - live, self.center + live);
            for j in lo.saturating_sub(1).max(1)..(hi + 2).min(n - 1) {
                next[j] = cur[j + 1] + cur[j - 1] - prev[j];
            }
            if let Some(noise) = &self.noise {
                if !spare {
                    noise.sample_pair(rng, &mut da, &mut db);
                }
                let dw = if spare { &db } else { &da };
                spare = !spare;
                for j in lo..=hi {
                    let f = self.kick * cur[j] * dw[j];
                    next[j] += 0.5 * f;
                    cur[j] -= 0.5 * f;
                }
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
    }

    fn is_recorded(&self, grid: &WalshGrid, m: usize) -> bool {
        m % grid.record_every == 0 || m == self.steps || m == 1
    }
}

/// One replica of `V^{(r,z)}_θ` on `[r, t_eval]`.
pub fn simulate_v(r: f64, z: f64, t_eval: f64, theta: f64, grid: &WalshGrid, seed: u64) -> Result<VolterraField> {
    let lat = Lattice::new(grid, r, t_eval, theta)?;
    let mut rng = rng::stream(seed, 0);
    let mut slices = Vec::new();
    lat.run(&mut rng, |m, v| {
        if lat.is_recorded(grid, m) {
            slices.push(FieldSlice { step: m, time: r + m as f64 * grid.dt, values: v.to_vec() });
        }
    });
    Ok(VolterraField { r, z, theta, dx: grid.dx, center: lat.center, slices })
}

/// Per-cell sums across replicas for one retained slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceMoments {
    pub step: usize,
    pub time: f64,
    /// `E V²`.
    pub m2: Vec<f64>,
    /// Standard error of `m2`.
    pub m2_se: Vec<f64>,
    /// `E ∫|V(y) − V(y+h)|²|h|^{2H−2}dh`.
    pub increment: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolterraEnsemble {
    pub r: f64,
    pub z: f64,
    pub theta: f64,
    pub h: f64,
    pub dt: f64,
    pub dx: f64,
    pub center: usize,
    pub replicas: usize,
    pub slices: Vec<SliceMoments>,
}

impl VolterraEnsemble {
    /// `E|V(t_eval, x)|²` from the last slice.
    pub fn mean_square(&self, x: f64) -> Estimate {
        let s = self.slices.last().expect("at least one slice");
        let j = self.center as f64 + ((x - self.z) / self.dx).round();
        if j < 0.0 || j >= s.m2.len() as f64 {
            return Estimate { value: 0.0, std_error: 0.0, samples: self.replicas };
        }
        let j = j as usize;
        Estimate { value: s.m2[j], std_error: s.m2_se[j], samples: self.replicas }
    }

    /// `(∫ E|V(t,x)|² dx, 2(t − r) sup_x E|V(t,x)|²)` per retained slice.
    pub fn support_integrals(&self) -> Vec<(f64, f64)> {
        self.slices
            .iter()
            .map(|s| {
                let total: f64 = s.m2.iter().sum::<f64>() * self.dx;
                let sup = s.m2.iter().copied().fold(0.0, f64::max);
                (total, 2.0 * (s.time - self.r) * sup)
            })
            .collect()
    }
}

/// Lattice weights `w_k = ∫_{cell k} |h|^{2H−2} dh` and their full sum over `k ≠ 0`.
fn increment_weights(h: f64, dx: f64, len: usize) -> (Vec<f64>, f64) {
    let e = 2.0 * h - 1.0;
    let w = (0..len)
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                let k = k as f64;
                (((k + 0.5) * dx).powf(e) - ((k - 0.5) * dx).powf(e)) / e
            }
        })
        .collect();
    (w, 2.0 * (0.5 * dx).powf(e) / -e)
}

struct IncrementOp {
    size: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    w_hat: Vec<Complex64>,
    total: f64,
}

impl IncrementOp {
    fn new(h: f64, dx: f64, cells: usize) -> Self {
        let size = (2 * cells).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        let (w, total) = increment_weights(h, dx, cells);
        let mut w_hat = vec![Complex64::new(0.0, 0.0); size];
        for (k, &v) in w.iter().enumerate().skip(1) {
            w_hat[k].re = v;
            w_hat[size - k].re = v;
        }
        fwd.process(&mut w_hat);
        Self { size, fwd, inv, w_hat, total }
    }

    /// `I_y = Σ_{k≠0} w_k (V_y − V_{y+k})²` with `V = 0` off the lattice, added into `out`.
    fn accumulate(&self, v: &[f64], out: &mut [f64]) {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for (b, &x) in buf.iter_mut().zip(v) {
            *b = Complex64::new(x, x * x);
        }
        self.fwd.process(&mut buf);
        for (b, w) in buf.iter_mut().zip(&self.w_hat) {
            *b *= w;
        }
        self.inv.process(&mut buf);
        let norm = 1.0 / self.size as f64;
        for (j, &x) in v.iter().enumerate() {
            let c = buf[j] * norm;
            out[j] += x * x * self.total - 2.0 * x * c.re + c.im;
        }
    }
}

/// Moments of `V^{(r,z)}_θ` over `replicas` independent runs, parallel over replicas.
pub fn simulate_ensemble(r: f64, z: f64, t_eval: f64, theta: f64, grid: &WalshGrid, replicas: usize, seed: u64) -> Result<VolterraEnsemble> {
    ensure(replicas >= 2, "replicas", "need at least two")?;
    let lat = Lattice::new(grid, r, t_eval, theta)?;
    let op = IncrementOp::new(grid.h, grid.dx, lat.cells);
    let recorded: Vec<usize> = (1..=lat.steps).filter(|&m| lat.is_recorded(grid, m)).collect();
    let nslices = recorded.len();
    let cells = lat.cells;
    let blocks = rng::par_blocks(seed, replicas, REPLICA_BLOCK, |rng, len| {
        let mut s2 = vec![vec![0.0; cells]; nslices];
        let mut s4 = vec![vec![0.0; cells]; nslices];
        let mut inc = vec![vec![0.0; cells]; nslices];
        for _ in 0..len {
            let mut k = 0;
            lat.run(rng, |m, v| {
                if k < nslices && recorded[k] == m {
                    for (j, &x) in v.iter().enumerate() {
                        let q = x * x;
                        s2[k][j] += q;
                        s4[k][j] += q * q;
                    }
                    op.accumulate(v, &mut inc[k]);
                    k += 1;
                }
            });
        }
        (s2, s4, inc)
    });
    let n = replicas as f64;
    let mut slices = Vec::with_capacity(nslices);
    for (k, &m) in recorded.iter().enumerate() {
        let mut m2 = vec![0.0; cells];
        let mut m4 = vec![0.0; cells];
        let mut inc = vec![0.0; cells];
        for (a, b, c) in &blocks {
            for j in 0..cells {
                m2[j] += a[k][j];
                m4[j] += b[k][j];
                inc[j] += c[k][j];
            }
        }
        let mut se = vec![0.0; cells];
        for j in 0..cells {
            m2[j] /= n;
            inc[j] /= n;
            let var = (m4[j] / n - m2[j] * m2[j]).max(0.0) * n / (n - 1.0);
            se[j] = (var / n).sqrt();
        }
        slices.push(SliceMoments { step: m, time: r + m as f64 * grid.dt, m2, m2_se: se, increment: inc });
    }
    Ok(VolterraEnsemble { r, z, theta, h: grid.h, dt: grid.dt, dx: grid.dx, center: lat.center, replicas, slices })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentNorm {
    /// `sup_{(t,x)} ‖X(t,x)‖₂` over retained slices and cells.
    pub sup_part: f64,
    /// `sup_{(t,x)} (∫_r^t∫ 𝒢²_{t−s}(x−y) ‖X(s,y) − X(s,y+h)‖₂² |h|^{2H−2} dh dy ds)^{1/2}` with `𝒢 = √θ G`.
    pub increment_part: f64,
}

impl MomentNorm {
    pub fn total(&self) -> f64 {
        self.sup_part + self.increment_part
    }
}

/// The two parts of `‖X‖_{𝒳_r}` at `p = 2`; time integrals use the retained
/// slices as right endpoints of their recording intervals.
pub fn moment_norm_x(ens: &VolterraEnsemble, p: f64) -> Result<MomentNorm> {
    if p != 2.0 {
        return Err(invalid("p", "only p = 2 is estimable from second moments"));
    }
    let sup2 = ens.slices.iter().flat_map(|s| s.m2.iter().copied()).fold(0.0, f64::max);
    let cells = ens.slices.first().map_or(0, |s| s.m2.len());
    // prefix sums of the increment functional per slice
    let prefix: Vec<Vec<f64>> = ens
        .slices
        .iter()
        .map(|s| {
            let mut acc = vec![0.0; cells + 1];
            for j in 0..cells {
                acc[j + 1] = acc[j] + s.increment[j];
            }
            acc
        })
        .collect();
    let weight = 0.25 * ens.theta * ens.dx;
    let mut best: f64 = 0.0;
    for (k, sk) in ens.slices.iter().enumerate() {
        for x in 0..cells {
            let mut total = 0.0;
            let mut prev_step = 0;
            for (q, sq) in ens.slices[..k].iter().enumerate() {
                let ds = (sq.step - prev_step) as f64 * ens.dt;
                prev_step = sq.step;
                // |x − y| < t − s on the lattice: |Δj| ≤ m_t − m_s − 1
                let reach = sk.step - sq.step;
                if reach == 0 {
                    continue;
                }
                let lo = x.saturating_sub(reach - 1);
                let hi = (x + reach).min(cells);
                total += ds * weight * (prefix[q][hi] - prefix[q][lo]);
            }
            best = best.max(total);
        }
    }
    Ok(MomentNorm { sup_part: sup2.sqrt(), increment_part: best.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos_kernels::wave_kernel;

    fn grid() -> WalshGrid {
        WalshGrid::new(1.0, 128, 0.3).unwrap()
    }

    #[test]
    fn noise_free_run_is_the_wave_kernel() {
        let g = grid();
        let f = simulate_v(0.0, 0.7, 1.0, 0.0, &g, 1).unwrap();
        for s in &f.slices {
            for (j, &v) in s.values.iter().enumerate() {
                let x = f.position(j);
                assert_eq!(v, wave_kernel(s.time, x - 0.7), "step {} cell {j}", s.step);
            }
        }
        // onset: a single cell of height ½
        let first = &f.slices[0];
        assert_eq!(first.step, 1);
        assert_eq!(first.values.iter().filter(|&&v| v != 0.0).count(), 1);
        assert_eq!(first.values[f.center], 0.5);
    }

    #[test]
    fn light_cone_and_determinism() {
        let g = grid();
        let a = simulate_v(0.25, -1.0, 1.0, 2.0, &g, 9).unwrap();
        let b = simulate_v(0.25, -1.0, 1.0, 2.0, &g, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.light_cone_violations(), 0);
        assert!(a.last().values.iter().any(|&v| v != 0.5 && v != 0.0));
    }

    #[test]
    fn cfl_guard() {
        assert!(WalshGrid::with_spacing(1.0, 0.02, 0.01, 0.3).is_err());
        assert!(WalshGrid::with_spacing(1.0, 0.01, 0.02, 0.3).is_err());
        assert!(WalshGrid::with_spacing(1.0, 0.01, 0.01, 0.3).is_ok());
    }

    #[test]
    fn increment_functional_matches_direct_sum() {
        let (h, dx) = (0.3, 0.1);
        let v = [0.0, 0.3, -0.2, 0.5, 0.1, 0.0, 0.0];
        let op = IncrementOp::new(h, dx, v.len());
        let mut out = vec![0.0; v.len()];
        op.accumulate(&v, &mut out);
        let (w, total) = increment_weights(h, dx, 10_000);
        for y in 0..v.len() {
            let mut direct = 0.0;
            for k in 1..10_000i64 {
                for s in [-1i64, 1] {
                    let j = y as i64 + s * k;
                    let other = if j >= 0 && (j as usize) < v.len() { v[j as usize] } else { 0.0 };
                    direct += w[k as usize] * (v[y] - other).powi(2);
                }
            }
            // the remaining far tail only sees V_y
            let seen: f64 = 2.0 * w[1..].iter().sum::<f64>();
            direct += v[y] * v[y] * (total - seen);
            assert!((out[y] - direct).abs() < 1e-10 * (1.0 + direct), "{y}: {} vs {direct}", out[y]);
        }
    }

    #[test]
    fn noise_free_norms() {
        let g = grid();
        let e = simulate_ensemble(0.0, 0.0, 1.0, 0.0, &g, 2, 1).unwrap();
        let n = moment_norm_x(&e, 2.0).unwrap();
        assert_eq!(n.sup_part, 0.5);
        assert_eq!(n.increment_part, 0.0);
        assert!(moment_norm_x(&e, 4.0).is_err());
    }

    #[test]
    fn support_bound_on_ensemble() {
        let g = grid();
        let e = simulate_ensemble(0.0, 0.0, 1.0, 1.0, &g, 16, 4).unwrap();
        for (lhs, rhs) in e.support_integrals() {
            assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
        }
    }
}
