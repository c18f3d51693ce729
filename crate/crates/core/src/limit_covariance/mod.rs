//! The limiting covariance `K_θ(t,s)` through the chaos terms `Q_{n,R}` and their large-`R` limits.

mod fejer;
mod inequalities;
mod q1;
mod q2;
mod qn;
mod series;

pub use fejer::{fejer_kernel, sample_fejer_unit};
pub use inequalities::{sin_product_inequality, weighted_step_inequality, InequalityCheck, StepFunction};
pub use q1::{q1_r, q1_r_resolution};
pub use q2::{calibrate_q2, q2_sinc_shape, q2_tt, second_chaos_diagonal, second_chaos_integral, Q2Calibration};
pub use qn::{fit_weights, qn_r, qn_r_multi, QnMulti, MAX_QN_ORDER};
pub use series::{
    k_theta, k_theta_with_radii, sigma_r_sq, sigma_r_sq_multi, tail_bound, CovarianceSeriesResult, SeriesTerm,
    DEFAULT_RADII,
};
