use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{binary_entropy, capacity, SystemParams};
use crate::numerics::QuadratureSpec;
use crate::wishart::{noise_expect, trunc_prob};

use super::mmse::mean_mmse_gain;
use super::ndt::NdtProblem;

/// Which parameter is sent to infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Limit {
    MInfinity,
    RhoInfinity,
    CInfinity,
}

/// The scheme whose limit is requested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitScheme {
    Ub,
    Ndt,
    Qci,
    Tci { lambda_th: f64 },
    Mmse,
}

fn unsupported(scheme: &str, limit: Limit, why: &str) -> Error {
    Error::UnsupportedLimit(format!("{scheme} has no {limit:?} limit here: {why}"))
}

/// Limiting value (bits) of a bound as `M`, `rho` or `C` grows without bound,
/// the other parameters taken from `params`.
pub fn asymptote(
    params: &SystemParams,
    scheme: LimitScheme,
    limit: Limit,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let c = params.c();
    let (k, m) = (params.k(), params.m());
    let kf = k as f64;
    match (scheme, limit) {
        (LimitScheme::Ub, Limit::MInfinity | Limit::RhoInfinity) => Ok(c),
        (LimitScheme::Ub | LimitScheme::Ndt, Limit::CInfinity) => capacity(params, quad),
        (LimitScheme::Ndt, Limit::RhoInfinity) => {
            let problem = NdtProblem {
                sigma2: 0.0,
                ..NdtProblem::from_params(params)
            };
            Ok(problem.optimize(&params.density(quad))?.value)
        }
        (LimitScheme::Ndt, Limit::MInfinity) => Err(unsupported(
            "ndt",
            limit,
            "the limit depends on a distortion that itself tends to 1",
        )),
        (LimitScheme::Qci, Limit::CInfinity) => {
            let s = noise_expect(params, |a| (1.0 / a).ln_1p())?;
            Ok(kf * s / LN_2)
        }
        (LimitScheme::Qci, Limit::MInfinity | Limit::RhoInfinity) => {
            params.require_k_le_m("quantized channel inversion")?;
            Ok(c)
        }
        (LimitScheme::Tci { .. }, Limit::MInfinity) => Ok(c),
        (LimitScheme::Tci { lambda_th }, Limit::RhoInfinity) => {
            let h = binary_entropy(trunc_prob(params, lambda_th)?)?;
            Ok((c - h).max(0.0))
        }
        (LimitScheme::Tci { lambda_th }, Limit::CInfinity) => {
            if lambda_th != 0.0 || k >= m {
                return Err(unsupported(
                    "tci",
                    limit,
                    "a closed form exists only for K < M at threshold 0",
                ));
            }
            let s2 = params.sigma2();
            let e = params.density(quad).expect(|l| (s2 / l).ln_1p(), 0.0)? / LN_2;
            Ok(kf * e - kf * (s2 / (m - k) as f64).log2())
        }
        (LimitScheme::Mmse, Limit::MInfinity) => Ok(c),
        (LimitScheme::Mmse, Limit::RhoInfinity) => {
            params.require_k_le_m("the high-SNR MMSE limit")?;
            Ok(c)
        }
        (LimitScheme::Mmse, Limit::CInfinity) => {
            params.require_k_le_m("the large-C MMSE limit")?;
            let s2 = params.sigma2();
            let mu = mean_mmse_gain(params, quad)?;
            let e = params.density(quad).expect(|l| (l / (l + s2)).ln(), 0.0)? / LN_2;
            Ok(kf * e - kf * (mu - mu * mu).log2())
        }
    }
}
