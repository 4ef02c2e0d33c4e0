//! Parameter and result types shared by every bound, plus the two scalar
//! building blocks all schemes reduce to: the ergodic capacity of the
//! fading channel and the Gaussian scalar bottleneck rate.
//!
//! All rates are in bits per complex dimension.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::QuadratureSpec;
use crate::wishart::EigDensity;

/// System tuple `(K, M, sigma^2, C)`.
///
/// `K` is the channel-input dimension, `M` the relay antenna count, `sigma2`
/// the noise variance and `c` the relay-destination link capacity in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    k: usize,
    m: usize,
    sigma2: f64,
    /// The SNR as given when built from dB, so it reads back exactly.
    rho_db: f64,
    c: f64,
}

impl SystemParams {
    pub fn new(k: usize, m: usize, sigma2: f64, c: f64) -> Result<Self> {
        if k == 0 || m == 0 {
            return Err(Error::InvalidParams(format!(
                "K and M must be positive (got K={k}, M={m})"
            )));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "noise variance must be positive and finite (got {sigma2})"
            )));
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "bottleneck capacity must be non-negative and finite (got {c})"
            )));
        }
        Ok(Self {
            k,
            m,
            sigma2,
            rho_db: -10.0 * sigma2.log10() + 0.0,
            c,
        })
    }

    /// Builds the tuple from an SNR in dB, `rho = 1/sigma^2`.
    pub fn from_snr_db(k: usize, m: usize, snr_db: f64, c: f64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::InvalidParams(format!("SNR must be finite (got {snr_db} dB)")));
        }
        let mut p = Self::new(k, m, db_to_linear(-snr_db), c)?;
        p.rho_db = snr_db + 0.0;
        Ok(p)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `min(K, M)`, the number of positive eigenvalues of `HH^H`.
    pub fn t(&self) -> usize {
        self.k.min(self.m)
    }

    /// `max(K, M)`.
    pub fn s(&self) -> usize {
        self.k.max(self.m)
    }

    pub fn rho(&self) -> f64 {
        1.0 / self.sigma2
    }

    pub fn rho_db(&self) -> f64 {
        self.rho_db
    }

    pub fn with_c(&self, c: f64) -> Result<Self> {
        Ok(Self::new(self.k, self.m, self.sigma2, c)?.keep_db(self))
    }

    pub fn with_sigma2(&self, sigma2: f64) -> Result<Self> {
        Self::new(self.k, self.m, sigma2, c_or_zero(self.c))
    }

    pub fn with_dims(&self, k: usize, m: usize) -> Result<Self> {
        Ok(Self::new(k, m, self.sigma2, self.c)?.keep_db(self))
    }

    fn keep_db(mut self, from: &SystemParams) -> Self {
        self.rho_db = from.rho_db;
        self
    }

    pub(crate) fn require_k_le_m(&self, what: &str) -> Result<()> {
        if self.k > self.m {
            Err(Error::Domain(format!(
                "{what} requires K <= M (got K={}, M={})",
                self.k, self.m
            )))
        } else {
            Ok(())
        }
    }

    pub(crate) fn density(&self, quad: &QuadratureSpec) -> EigDensity {
        EigDensity::new(self.t(), self.s(), *quad)
    }
}

fn c_or_zero(c: f64) -> f64 {
    if c.is_finite() {
        c
    } else {
        0.0
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// The schemes a [`BoundResult`] can come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Capacity,
    Ub,
    Ndt,
    Qci,
    Tci,
    Mmse,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Capacity => "capacity",
            Scheme::Ub => "ub",
            Scheme::Ndt => "ndt",
            Scheme::Qci => "qci",
            Scheme::Tci => "tci",
            Scheme::Mmse => "mmse",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    MonteCarlo,
    ClosedForm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte_carlo",
            Method::ClosedForm => "closed_form",
        }
    }
}

/// Scheme-specific parameters attached to a result.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Aux {
    None {},
    Waterfill {
        budget_per_dim: f64,
    },
    Ndt {
        distortion: f64,
        gain: f64,
        budget_per_dim: f64,
    },
    Qci {
        bits: Option<u32>,
        /// Finite quantization levels; the `+inf` sentinel is implied.
        levels: Vec<f64>,
        pmf: Vec<f64>,
        entropy_h0: f64,
        active_levels: usize,
    },
    Tci {
        lambda_th: f64,
        p_th: f64,
        h_th: f64,
        distortion: f64,
        e_inv_lambda: f64,
        e_lambda: f64,
        /// Formula value before clamping at zero.
        unclamped_rate: f64,
        r_lower: f64,
        r_upper: f64,
    },
    Mmse {
        distortion: f64,
        mean_mmse_gain: f64,
        /// Formula value before clamping at zero.
        unclamped_rate: f64,
    },
}

/// A computed rate with its solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub scheme: Scheme,
    pub value: f64,
    pub water_level: Option<f64>,
    pub aux: Aux,
    /// Absolute violation of the bottleneck constraint at the returned solution.
    pub residual: f64,
    pub method: Method,
    /// Monte Carlo standard error, when the value is a simulation estimate.
    pub std_error: Option<f64>,
}

impl BoundResult {
    pub(crate) fn zero(scheme: Scheme, method: Method, aux: Aux) -> Self {
        Self {
            scheme,
            value: 0.0,
            water_level: None,
            aux,
            residual: 0.0,
            method,
            std_error: None,
        }
    }
}

/// Axis of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    C,
    RhoDb,
    M,
    KEqualsM,
}

/// A scheme requested in a sweep, with its options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeSpec {
    Capacity,
    Ub,
    /// NDT; a fixed distortion or `None` to optimize it.
    Ndt { distortion: Option<f64> },
    /// QCI with a quantile grid of `2^bits` levels.
    Qci { bits: u32 },
    /// TCI; a fixed threshold or `None` for the default threshold policy.
    Tci { lambda_th: Option<f64> },
    Mmse,
}

impl SchemeSpec {
    pub fn scheme(&self) -> Scheme {
        match self {
            SchemeSpec::Capacity => Scheme::Capacity,
            SchemeSpec::Ub => Scheme::Ub,
            SchemeSpec::Ndt { .. } => Scheme::Ndt,
            SchemeSpec::Qci { .. } => Scheme::Qci,
            SchemeSpec::Tci { .. } => Scheme::Tci,
            SchemeSpec::Mmse => Scheme::Mmse,
        }
    }
}

/// A one-dimensional parameter sweep over a fixed template.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub fixed: SystemParams,
    pub schemes: Vec<SchemeSpec>,
    /// On the `KEqualsM` axis, couple `C = c_per_k * K` when set.
    pub c_per_k: Option<f64>,
}

impl SweepSpec {
    pub fn new(
        axis: SweepAxis,
        values: Vec<f64>,
        fixed: SystemParams,
        schemes: Vec<SchemeSpec>,
    ) -> Result<Self> {
        let spec = Self {
            axis,
            values,
            fixed,
            schemes,
            c_per_k: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_c_per_k(mut self, c_per_k: f64) -> Result<Self> {
        self.c_per_k = Some(c_per_k);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidParams("sweep has no values".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidParams("sweep has no schemes".into()));
        }
        let ascending = self.values.windows(2).all(|w| w[0] < w[1]);
        let descending = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(ascending || descending) {
            return Err(Error::InvalidParams(
                "sweep values must be strictly ordered".into(),
            ));
        }
        for &v in &self.values {
            self.params_at(v)?;
        }
        Ok(())
    }

    /// The system parameters at one axis value.
    pub fn params_at(&self, value: f64) -> Result<SystemParams> {
        let f = &self.fixed;
        match self.axis {
            SweepAxis::C => f.with_c(value),
            SweepAxis::RhoDb => SystemParams::from_snr_db(f.k(), f.m(), value, f.c()),
            SweepAxis::M => f.with_dims(f.k(), as_dim(value)?),
            SweepAxis::KEqualsM => {
                let n = as_dim(value)?;
                let p = f.with_dims(n, n)?;
                match self.c_per_k {
                    Some(per_k) => p.with_c(per_k * n as f64),
                    None => Ok(p),
                }
            }
        }
    }
}

fn as_dim(value: f64) -> Result<usize> {
    if value >= 1.0 && value.fract() == 0.0 && value < 1e6 {
        Ok(value as usize)
    } else {
        Err(Error::InvalidParams(format!(
            "dimension axis value must be a positive integer (got {value})"
        )))
    }
}

/// Ergodic capacity `T * E[log2(1 + rho * lambda)]` of the fading channel.
pub fn capacity(params: &SystemParams, quad: &QuadratureSpec) -> Result<f64> {
    let rho = params.rho();
    let density = params.density(quad);
    let mean = density.expect(|l| (rho * l).ln_1p(), 0.0)?;
    Ok(params.t() as f64 * mean / std::f64::consts::LN_2)
}

/// Optimal bottleneck rate of a scalar Gaussian channel with SNR `snr` under
/// a compression budget of `c` bits: `log2(1+snr) - log2(1+snr*2^-c)`.
pub fn scalar_ib_rate(snr: f64, c: f64) -> f64 {
    if snr <= 0.0 || c <= 0.0 {
        return 0.0;
    }
    // ln(1+s) - ln(1+s*2^-c) = ln((1+s)/(1+s*2^-c)), computed without cancellation.
    let shrunk = snr * (-c * std::f64::consts::LN_2).exp();
    let num = (snr - shrunk) / (1.0 + shrunk);
    num.ln_1p() / std::f64::consts::LN_2
}

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn params_reject_invalid() {
        assert!(SystemParams::new(0, 2, 1.0, 1.0).is_err());
        assert!(SystemParams::new(2, 0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(2, 2, 0.0, 1.0).is_err());
        assert!(SystemParams::new(2, 2, 1.0, -1.0).is_err());
        assert!(SystemParams::new(2, 2, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn derived_accessors() {
        let p = SystemParams::new(2, 5, 0.25, 3.0).unwrap();
        assert_eq!(p.t(), 2);
        assert_eq!(p.s(), 5);
        assert_eq!(p.rho(), 4.0);
        assert_eq!(p.rho() * p.sigma2(), 1.0);
        let q = SystemParams::from_snr_db(1, 1, 10.0, 1.0).unwrap();
        assert_relative_eq!(q.sigma2(), 0.1, epsilon = 1e-15);
        assert_relative_eq!(q.rho_db(), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn scalar_ib_examples() {
        assert_relative_eq!(scalar_ib_rate(1.0, 1.0), 1.0 - 1.5f64.log2(), epsilon = 1e-14);
        assert_relative_eq!(scalar_ib_rate(1.0, 1.0), 0.41504, epsilon = 1e-5);
        assert_eq!(scalar_ib_rate(7.3, 0.0), 0.0);
        assert_relative_eq!(scalar_ib_rate(1.0, 60.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(scalar_ib_rate(1.0, f64::INFINITY), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        let p = (-0.2f64).exp();
        assert_relative_eq!(binary_entropy(p).unwrap(), 0.682_845_825_773_719, epsilon = 1e-12);
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(-0.1).is_err());
    }

    #[test]
    fn sweep_validation() {
        let p = SystemParams::new(2, 2, 1.0, 10.0).unwrap();
        assert!(SweepSpec::new(SweepAxis::C, vec![], p, vec![SchemeSpec::Ub]).is_err());
        assert!(SweepSpec::new(SweepAxis::C, vec![1.0, 3.0, 2.0], p, vec![SchemeSpec::Ub]).is_err());
        assert!(SweepSpec::new(SweepAxis::M, vec![1.5], p, vec![SchemeSpec::Ub]).is_err());
        let s = SweepSpec::new(SweepAxis::KEqualsM, vec![1.0, 2.0, 4.0], p, vec![SchemeSpec::Ub])
            .unwrap()
            .with_c_per_k(8.0)
            .unwrap();
        let q = s.params_at(4.0).unwrap();
        assert_eq!((q.k(), q.m(), q.c()), (4, 4, 32.0));
    }
}
