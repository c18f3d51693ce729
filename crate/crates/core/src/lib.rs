//! Numerics for spatial averages of the hyperbolic Anderson model driven by a
//! time-independent Gaussian noise that is rough in space (Hurst index in `(1/4, 1/2)`),
//! and for the companion equation whose noise is white in time.
//!
//! The spectral grid, kernels and quadrature are generic over [`Real`]; the aliases
//! below fix the scalar to `f64`, which is what the Monte Carlo layers use.

pub mod error;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod stats;

pub mod chaos_kernels;
pub mod expm;
pub mod fluctuation;
pub mod limit_covariance;
pub mod rough_noise;
pub mod volterra;

pub use error::{Error, Result};
pub use scalar::Real;
pub use stats::Estimate;

pub type Grid = rough_noise::SpectralGrid<f64>;
pub type Noise = rough_noise::NoiseSample<f64>;
pub type Quad = quadrature::QuadResult<f64>;
