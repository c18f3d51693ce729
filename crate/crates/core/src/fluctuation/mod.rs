//! Truncated-chaos sampling of the spatial average `F_{R,θ}(t)`, normality diagnostics,
//! and the moment, regularity and tightness checks for `u_θ`.
//!
//! The noise is represented by its values on equal cells, a stationary Gaussian
//! sequence sampled exactly by circulant embedding; kernels are evaluated at cell centres.

mod coefficients;
mod config;
mod diagnostics;
mod moments;
mod sampling;
mod study;
mod tightness;

pub use coefficients::{
    band_for, build_coefficients, build_on_grid, build_with_band, ou_rescale, symmetric_kernel, BandTensor, CellGrid,
    DiscretizedChaosCoefficients, KernelTarget,
};
pub use config::{ChaosSampleConfig, MAX_CHAOS};
pub use diagnostics::{gaussian_diagnostics, gaussian_diagnostics_with, GaussianDiagnostics, Normalization, MIN_DIAGNOSTIC_SAMPLES};
pub use moments::{u_increment_scaling, u_moment_check, IncrementRow, IncrementStudy, MomentCheck};
pub use sampling::{combine, empirical_cross_moment, exact_second_moments, sample_chaos, sample_f_r, ChaosDraw, ChaosSampler};
pub use study::{clt_rate_study, hist_slope, hypercontractivity_check, CltRow, CltStudy, HypercontractivityRow, SlopeFit};
pub use tightness::{tightness_check, TightnessReport, TightnessRow, TIGHTNESS_CONSTANT};
