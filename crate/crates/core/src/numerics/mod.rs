//! Numerical substrate: semi-infinite quadrature, monotone root finding,
//! bounded scalar maximization and the special functions the eigenvalue
//! laws are built from.

mod optimize;
mod quadrature;
mod roots;
mod special;

pub use optimize::{golden_section_max, maximize_scalar, Maximum};
pub use quadrature::{integrate, integrate_decaying, QuadratureSpec};
pub(crate) use quadrature::gk21;
pub use roots::{brent, solve_monotone, Root};
pub use special::{
    laguerre_assoc, ln_factorial, ln_upper_incomplete_gamma, log_gamma, regularized_upper_gamma,
    upper_incomplete_gamma,
};
pub(crate) use special::for_each_laguerre;
