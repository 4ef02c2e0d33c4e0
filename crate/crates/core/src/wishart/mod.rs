//! Distributional machinery for `M x K` i.i.d. `CN(0,1)` channels: the
//! unordered eigenvalue density, the zero-forcing noise-level law and its
//! quantization grids, truncation statistics, and channel sampling.

mod density;
mod noise;
mod sampling;
mod trunc;

pub use density::{eig_cdf_sorted, eig_expect, eig_pdf, EigDensity};
pub use noise::{
    ceil_to_grid, noise_cdf, noise_expect, noise_grid_pmf, noise_pdf, noise_quantile,
    noise_quantile_grid, QuantGrid,
};
pub use sampling::{sample_channel, sample_channel_matrix, sample_noise_levels, GramSampler};
pub use trunc::{
    trunc_prob, trunc_prob_determinant, trunc_stats, trunc_stats_from_samples, TruncStats,
    TruncStdErrors,
};
pub(crate) use trunc::divergent;
