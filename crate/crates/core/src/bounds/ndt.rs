use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::model::{Aux, BoundResult, Method, Scheme, SystemParams};
use crate::numerics::{maximize_scalar, QuadratureSpec};
use crate::wishart::EigDensity;

use super::waterfill::waterfill_continuous;

const COARSE_POINTS: usize = 128;
const EDGE: f64 = 1e-6;
const REFINE_TOL: f64 = 1e-7;

/// Smallest feasible distortion is strictly above `2^(-C/(KM))`.
pub fn ndt_min_distortion(params: &SystemParams) -> f64 {
    (-params.c() / (params.k() * params.m()) as f64 * LN_2).exp()
}

/// The pieces of the NDT rate that do not depend on the density.
pub(crate) struct NdtProblem {
    pub k: usize,
    pub m: usize,
    /// May be zero for the high-SNR limit.
    pub sigma2: f64,
    pub c: f64,
}

impl NdtProblem {
    pub(crate) fn from_params(params: &SystemParams) -> Self {
        Self {
            k: params.k(),
            m: params.m(),
            sigma2: params.sigma2(),
            c: params.c(),
        }
    }

    fn km(&self) -> f64 {
        (self.k * self.m) as f64
    }

    pub(crate) fn rate(&self, density: &EigDensity, d: f64) -> Result<BoundResult> {
        if !(d > 0.0 && d <= 1.0) {
            return Err(Error::Domain(format!("distortion must lie in (0, 1] (got {d})")));
        }
        let t = density.t() as f64;
        let gain = (1.0 - d) / (self.k as f64 * d + self.sigma2);
        let spent = self.km() * -d.log2();
        let budget = (self.c - spent) / t;
        let aux = Aux::Ndt {
            distortion: d,
            gain,
            budget_per_dim: budget.max(0.0),
        };
        if d == 1.0 {
            return Ok(BoundResult::zero(Scheme::Ndt, Method::Quadrature, aux));
        }
        let d_min = (-self.c / self.km() * LN_2).exp();
        if d <= d_min {
            return Err(Error::InfeasibleDistortion { d, d_min });
        }
        let w = waterfill_continuous(density, gain, budget)?;
        Ok(BoundResult {
            scheme: Scheme::Ndt,
            value: t * w.rate,
            water_level: Some(w.nu),
            aux,
            residual: t * w.residual,
            method: Method::Quadrature,
            std_error: None,
        })
    }

    pub(crate) fn optimize(&self, density: &EigDensity) -> Result<BoundResult> {
        if self.c == 0.0 {
            return self.rate(density, 1.0);
        }
        let ln_d_min = -self.c / self.km() * LN_2 + EDGE.ln_1p();
        if ln_d_min >= 0.0 {
            return self.rate(density, 1.0);
        }
        let best = maximize_scalar(
            |x| Ok(self.rate(density, x.exp())?.value),
            (ln_d_min, 0.0),
            COARSE_POINTS,
            REFINE_TOL,
        )?;
        self.rate(density, best.x.exp().min(1.0))
    }
}

/// NDT lower bound at a fixed distortion `d`, feasible for
/// `2^(-C/(KM)) < d <= 1`.
pub fn ndt_rate(params: &SystemParams, d: f64, quad: &QuadratureSpec) -> Result<BoundResult> {
    NdtProblem::from_params(params).rate(&params.density(quad), d)
}

/// NDT lower bound maximized over the distortion: a 128-point grid uniform
/// in `ln D` followed by golden-section refinement.
pub fn ndt_bound(params: &SystemParams, quad: &QuadratureSpec) -> Result<BoundResult> {
    NdtProblem::from_params(params).optimize(&params.density(quad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_distortion_is_zero() {
        let p = SystemParams::from_snr_db(2, 2, 10.0, 8.0).unwrap();
        let q = QuadratureSpec::default();
        assert_eq!(ndt_rate(&p, 1.0, &q).unwrap().value, 0.0);
    }

    #[test]
    fn infeasible_distortion() {
        let p = SystemParams::from_snr_db(2, 2, 10.0, 8.0).unwrap();
        let d = ndt_min_distortion(&p) * 0.99;
        assert!(matches!(
            ndt_rate(&p, d, &QuadratureSpec::default()),
            Err(Error::InfeasibleDistortion { .. })
        ));
    }

    #[test]
    fn optimum_beats_probes() {
        let p = SystemParams::from_snr_db(2, 2, 10.0, 12.0).unwrap();
        let q = QuadratureSpec::default();
        let best = ndt_bound(&p, &q).unwrap();
        for d in [0.2, 0.4, 0.6, 0.9] {
            assert!(best.value >= ndt_rate(&p, d, &q).unwrap().value);
        }
    }
}
