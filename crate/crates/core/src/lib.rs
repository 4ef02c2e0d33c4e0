//! Bounds on the information-bottleneck rate of an i.i.d. Rayleigh-fading
//! MIMO channel observed through an oblivious relay with a rate-limited
//! link to the destination.

pub mod bounds;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod par;
pub mod sweep;
pub mod wishart;

pub use error::{Error, Result};
pub use model::{
    binary_entropy, capacity, db_to_linear, scalar_ib_rate, Aux, BoundResult, Method, Scheme,
    SchemeSpec, SweepAxis, SweepSpec, SystemParams,
};
pub use montecarlo::{McConfig, McEstimate};
pub use numerics::QuadratureSpec;
pub use sweep::{evaluate, run_sweep, SweepRow};
