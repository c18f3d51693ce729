//! Stochastic Volterra equations driven by noise that is white in time and
//! fractional in space: the `J` functionals, the Gronwall sequence, the Picard
//! majorant, a Walsh lattice scheme for `V^{(r,z)}_θ` and its chaos series.
//!
//! Everything here is `f64`.

mod gronwall;
mod jfun;
mod picard;
mod series;
mod walsh;

pub use gronwall::{gronwall_sequence, gronwall_sequence_for, GronwallSequence, LawTable, LAW_TABLE_POINTS, MAX_GRONWALL_ORDER};
pub use jfun::{bdg_constant, difference_constant, exponents, j_functions, spectral_moment, JValues, KernelFamily, KernelKind};
pub use picard::{picard_second_moment, wave_impulse_w0, InitialCondition, PicardGrid, PicardIterate, PicardReport, DIVERGENCE_GUARD};
pub use series::{
    g1_norm_sq, g_norm_sq_mc, g_tilde_norm_sq_mc, v_domination_terms, v_second_moment_series, DominationTerm, VSecondMoment, VSeriesTerm,
    MAX_SERIES_ORDER,
};
pub use walsh::{
    moment_norm_x, simulate_ensemble, simulate_v, FieldSlice, MomentNorm, SliceMoments, VolterraEnsemble, VolterraField, WalshGrid,
    DEFAULT_STEPS,
};
