use std::f64::consts::LN_2;

use crate::error::Result;
use crate::model::{Aux, BoundResult, Method, Scheme, SystemParams};
use crate::numerics::QuadratureSpec;

/// `E[lambda / (lambda + sigma^2)]`.
pub fn mean_mmse_gain(params: &SystemParams, quad: &QuadratureSpec) -> Result<f64> {
    let s2 = params.sigma2();
    params.density(quad).expect(|l| l / (l + s2), 0.0)
}

/// MMSE-estimate lower bound; valid for any `K`, `M`. The reported value is
/// clamped at zero (the formula goes negative for some `K > M` settings).
///
/// With `mu = E[lambda/(lambda+sigma^2)]` and
/// `D = (T/K) mu / (2^(C/K) - 1)`:
/// `R = T E[log2(lambda/(lambda+sigma^2) + D)] + (K-T) log2 D
///      - K log2((T/K) mu - (T/K)^2 mu^2 + D)`.
pub fn mmse_bound(params: &SystemParams, quad: &QuadratureSpec) -> Result<BoundResult> {
    let (k, t) = (params.k() as f64, params.t() as f64);
    let s2 = params.sigma2();
    let mu = mean_mmse_gain(params, quad)?;
    if params.c() == 0.0 {
        return Ok(BoundResult::zero(
            Scheme::Mmse,
            Method::Quadrature,
            Aux::Mmse {
                distortion: f64::INFINITY,
                mean_mmse_gain: mu,
                unclamped_rate: 0.0,
            },
        ));
    }
    let tk = t / k;
    let d = tk * mu / (params.c() / k * LN_2).exp_m1();
    let log_term = params
        .density(quad)
        .expect(|l| (l / (l + s2) + d).ln(), 0.0)?
        / LN_2;
    let value = t * log_term + (k - t) * d.log2() - k * (tk * mu - tk * tk * mu * mu + d).log2();
    Ok(BoundResult {
        scheme: Scheme::Mmse,
        value: value.max(0.0),
        water_level: None,
        aux: Aux::Mmse {
            distortion: d,
            mean_mmse_gain: mu,
            unclamped_rate: value,
        },
        residual: 0.0,
        method: Method::Quadrature,
        std_error: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fewer_antennas_than_inputs() {
        let p = SystemParams::from_snr_db(4, 2, 10.0, 16.0).unwrap();
        let r = mmse_bound(&p, &QuadratureSpec::default()).unwrap();
        assert!(r.value.is_finite() && r.value <= 16.0);
        let Aux::Mmse { unclamped_rate, .. } = r.aux else { panic!() };
        assert!(unclamped_rate.is_finite());
        assert_eq!(r.value, unclamped_rate.max(0.0));
    }

    #[test]
    fn zero_link() {
        let p = SystemParams::from_snr_db(2, 2, 10.0, 0.0).unwrap();
        assert_eq!(mmse_bound(&p, &QuadratureSpec::default()).unwrap().value, 0.0);
    }
}
