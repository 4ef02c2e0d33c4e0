use crate::error::Result;
use crate::model::{Aux, BoundResult, Method, Scheme, SystemParams};
use crate::numerics::QuadratureSpec;

use super::waterfill::waterfill_continuous;

/// Informed-receiver upper bound: `T` parallel water-filling problems over
/// the eigenvalue law with gain `rho` and budget `C/T` each.
pub fn upper_bound(params: &SystemParams, quad: &QuadratureSpec) -> Result<BoundResult> {
    let t = params.t() as f64;
    let budget = params.c() / t;
    let aux = Aux::Waterfill {
        budget_per_dim: budget,
    };
    if params.c() == 0.0 {
        return Ok(BoundResult::zero(Scheme::Ub, Method::Quadrature, aux));
    }
    let w = waterfill_continuous(&params.density(quad), params.rho(), budget)?;
    Ok(BoundResult {
        scheme: Scheme::Ub,
        value: t * w.rate,
        water_level: Some(w.nu),
        aux,
        residual: t * w.residual,
        method: Method::Quadrature,
        std_error: None,
    })
}
