use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::normal_cdf;

pub const MIN_DIAGNOSTIC_SAMPLES: usize = 1000;

/// Distance of a sample to the standard normal.
///
/// `hist_l1` is half the L¹ distance between a Freedman–Diaconis histogram and the
/// binned normal law; it is only a proxy (and a lower bound in spirit) for total variation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianDiagnostics {
    pub n: usize,
    pub ks_stat: f64,
    pub hist_l1: f64,
    pub bins: usize,
    pub sample_mean: f64,
    pub sample_var: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// How samples are standardized before comparison with `N(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Normalization {
    None,
    /// Sample mean and standard deviation.
    Studentize,
    /// Divide by a known standard deviation (e.g. `σ_R` from the covariance series).
    KnownScale(f64),
}

pub fn gaussian_diagnostics(samples: &[f64], normalize: bool) -> Result<GaussianDiagnostics> {
    gaussian_diagnostics_with(samples, if normalize { Normalization::Studentize } else { Normalization::None })
}

pub fn gaussian_diagnostics_with(samples: &[f64], norm: Normalization) -> Result<GaussianDiagnostics> {
    let n = samples.len();
    if n < MIN_DIAGNOSTIC_SAMPLES {
        return Err(crate::error::invalid("samples", format!("need at least {MIN_DIAGNOSTIC_SAMPLES}, got {n}")));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(crate::error::invalid("samples", "non-finite value"));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let m2 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
    if m2 <= 0.0 {
        return Err(Error::Degenerate("zero-variance sample".into()));
    }
    let m3 = samples.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / nf;
    let m4 = samples.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
    let var = m2 * nf / (nf - 1.0);

    let mut z: Vec<f64> = match norm {
        Normalization::None => samples.to_vec(),
        Normalization::Studentize => samples.iter().map(|x| (x - mean) / var.sqrt()).collect(),
        Normalization::KnownScale(s) => {
            if !(s > 0.0) {
                return Err(crate::error::invalid("scale", "must be positive"));
            }
            samples.iter().map(|x| x / s).collect()
        }
    };
    z.sort_by(|a, b| a.total_cmp(b));

    let mut ks: f64 = 0.0;
    for (i, &x) in z.iter().enumerate() {
        let f = normal_cdf(x);
        ks = ks.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
    }

    let q = |p: f64| z[((p * (nf - 1.0)).round() as usize).min(n - 1)];
    let iqr = q(0.75) - q(0.25);
    let (lo, hi) = (z[0], z[n - 1]);
    let width = if iqr > 0.0 { 2.0 * iqr / nf.cbrt() } else { (hi - lo) / nf.sqrt() };
    let bins = (((hi - lo) / width).ceil() as usize).clamp(1, n);
    let bw = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in &z {
        let k = (((x - lo) / bw) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let mut l1 = normal_cdf(lo) + (1.0 - normal_cdf(hi));
    for (k, &c) in counts.iter().enumerate() {
        let a = lo + k as f64 * bw;
        let p = normal_cdf(a + bw) - normal_cdf(a);
        l1 += (c as f64 / nf - p).abs();
    }

    Ok(GaussianDiagnostics {
        n,
        ks_stat: ks.clamp(0.0, 1.0),
        hist_l1: (0.5 * l1).clamp(0.0, 1.0),
        bins,
        sample_mean: mean,
        sample_var: var,
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut r = rng::stream(seed, 0);
        let mut v = vec![0.0; n];
        rng::fill_normal(&mut r, &mut v);
        v
    }

    #[test]
    fn null_distribution() {
        let n = 100_000;
        let d = gaussian_diagnostics(&normals(n, 1), false).unwrap();
        assert!(d.ks_stat < 2.0 * 1.36 / (n as f64).sqrt(), "{d:?}");
        assert!(d.hist_l1 < 0.05);
        assert!(d.skewness.abs() < 0.05 && d.excess_kurtosis.abs() < 0.1);
    }

    #[test]
    fn degenerate_and_short() {
        assert!(matches!(gaussian_diagnostics(&vec![0.0; 2000], true), Err(Error::Degenerate(_))));
        assert!(gaussian_diagnostics(&[1.0, 2.0], true).is_err());
    }

    #[test]
    fn detects_skew() {
        let v: Vec<f64> = normals(20_000, 2).iter().map(|x| x * x).collect();
        let d = gaussian_diagnostics(&v, true).unwrap();
        assert!(d.ks_stat > 0.1 && d.hist_l1 > 0.1 && d.skewness > 2.0);
    }

    #[test]
    fn known_scale() {
        let v: Vec<f64> = normals(5000, 3).iter().map(|x| 3.0 * x).collect();
        let a = gaussian_diagnostics_with(&v, Normalization::KnownScale(3.0)).unwrap();
        let b = gaussian_diagnostics(&v, false).unwrap();
        assert!(a.ks_stat < 0.03 && b.ks_stat > 0.2);
    }
}
