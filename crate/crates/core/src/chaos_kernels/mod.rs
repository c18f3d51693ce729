//! Wave kernel, chain-form chaos kernels, the `A_n` index sets and the
//! weighted sinc integrals behind the norm bounds.

mod chain;
mod kernels;
mod multiindex;
mod norm;

pub use chain::{
    chain_kernel_average, chain_kernel_ft, chain_kernel_point, partial_sums, time_integrated_chain, time_integrated_chain_expm,
    time_integrated_kernel_ft, ChainKernelSpec, ChainTarget,
};
pub use kernels::{c_alpha, wave_kernel, wave_kernel_ft, wave_kernel_ft_integrated, weighted_g_integral};
pub use multiindex::{
    a_n_prefix_sums, a_n_weighted_sum, enumerate_a_n, enumerate_d_n, multiindex_identity_check, MultiIndex,
};
pub use norm::{
    bound_f, bound_f_constant, f1_norm_sq, fn_increment_norm_sq, fn_norm_majorant, fn_norm_sq_estimate, fn_norm_sq_estimate_at,
    moment_bound, moment_bound_constants, qn_majorant, Majorants, ParetoSampler, BOUND_SCAN_ORDER, MAX_NORM_ORDER,
};
