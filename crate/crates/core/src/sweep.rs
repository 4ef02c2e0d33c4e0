//! Evaluation of single bounds and one-dimensional sweeps.

use crate::bounds::{mmse_bound, ndt_bound, ndt_rate, qci_bound_quantile, tci_bound, upper_bound};
use crate::error::{Error, Result};
use crate::model::{capacity, Aux, BoundResult, Method, Scheme, SchemeSpec, SweepSpec, SystemParams};
use crate::montecarlo::McConfig;
use crate::numerics::QuadratureSpec;
use crate::par;

/// Evaluates one scheme at one parameter point.
pub fn evaluate(
    params: &SystemParams,
    scheme: &SchemeSpec,
    mc: &McConfig,
    quad: &QuadratureSpec,
) -> Result<BoundResult> {
    match *scheme {
        SchemeSpec::Capacity => Ok(BoundResult {
            scheme: Scheme::Capacity,
            value: capacity(params, quad)?,
            water_level: None,
            aux: Aux::None {},
            residual: 0.0,
            method: Method::Quadrature,
            std_error: None,
        }),
        SchemeSpec::Ub => upper_bound(params, quad),
        SchemeSpec::Ndt { distortion: None } => ndt_bound(params, quad),
        SchemeSpec::Ndt { distortion: Some(d) } => ndt_rate(params, d, quad),
        SchemeSpec::Qci { bits } => qci_bound_quantile(params, bits),
        SchemeSpec::Tci { lambda_th } => tci_bound(params, lambda_th, mc, quad),
        SchemeSpec::Mmse => mmse_bound(params, quad),
    }
}

/// One cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub params: SystemParams,
    pub scheme: SchemeSpec,
    pub outcome: std::result::Result<BoundResult, Error>,
}

/// Evaluates every `(axis value, scheme)` cell, rows ordered by axis value
/// then by scheme as listed. Cell failures are kept in place; the sweep
/// itself only fails on invalid parameters.
pub fn run_sweep(spec: &SweepSpec, mc: &McConfig, quad: &QuadratureSpec) -> Result<Vec<SweepRow>> {
    let points = spec
        .values
        .iter()
        .map(|&v| Ok((v, spec.params_at(v)?)))
        .collect::<Result<Vec<_>>>()?;
    let per_point = spec.schemes.len();
    let rows = par::map_indexed(points.len() * per_point, |i| {
        let (axis_value, params) = points[i / per_point];
        let scheme = spec.schemes[i % per_point];
        SweepRow {
            axis_value,
            params,
            scheme,
            outcome: evaluate(&params, &scheme, mc, quad),
        }
    });
    Ok(rows)
}
