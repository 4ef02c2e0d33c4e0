//! The informed-receiver upper bound and the four achievable lower bounds
//! (non-decoding transmission, quantized and truncated channel inversion,
//! MMSE estimate), with their limiting values.

mod asymptote;
mod mmse;
mod ndt;
mod qci;
mod tci;
mod ub;
mod waterfill;

pub use asymptote::{asymptote, Limit, LimitScheme};
pub use mmse::{mean_mmse_gain, mmse_bound};
pub use ndt::{ndt_bound, ndt_min_distortion, ndt_rate};
pub use qci::{qci_allocation, qci_bound_quantile, qci_rate};
pub use tci::{
    tci_bound, tci_bound_with_samples, tci_closed_form_zero_threshold, tci_rate, tci_sandwich,
    tci_threshold_ceiling, tci_threshold_grid,
};
pub use ub::upper_bound;
pub use waterfill::{waterfill_constraint, waterfill_continuous, waterfill_rate, WaterfillSolution};
