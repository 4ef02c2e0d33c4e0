//! Truncation event `{lambda_min >= lambda_th}` and the statistics conditioned
//! on it.

use log::warn;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{binary_entropy, Method, SystemParams};
use crate::montecarlo::{EigenSamples, McConfig};
use crate::numerics::{ln_factorial, ln_upper_incomplete_gamma, regularized_upper_gamma};

/// Pivot spread beyond which the determinant has lost about half of the
/// working precision.
const CONDITION_WARN: f64 = 1e8;

fn check_threshold(lambda_th: f64) -> Result<()> {
    if !(lambda_th >= 0.0 && lambda_th.is_finite()) {
        return Err(Error::Domain(format!(
            "threshold must be finite and non-negative (got {lambda_th})"
        )));
    }
    Ok(())
}

/// `P(lambda_min >= lambda_th)` for the `K x K` Wishart matrix `H^H H`.
///
/// Uses `e^(-lambda_th K)` when `K = M`, the regularized incomplete gamma
/// when `K = 1`, and the incomplete-gamma determinant otherwise.
pub fn trunc_prob(params: &SystemParams, lambda_th: f64) -> Result<f64> {
    params.require_k_le_m("truncation probability")?;
    check_threshold(lambda_th)?;
    let (k, m) = (params.k(), params.m());
    if k == m {
        return Ok((-lambda_th * k as f64).exp());
    }
    if k == 1 {
        return regularized_upper_gamma(m, lambda_th);
    }
    trunc_prob_determinant(params, lambda_th)
}

/// The determinant form `det[Gamma(M-K+i+j+1, lambda_th)]_(i,j<K) /
/// prod_k (M-k)!(K-k)!`, valid for every `K <= M`.
///
/// Entry `(i, j)` is scaled by `1/sqrt((M-K+2i)! (M-K+2j)!)`, which makes the
/// matrix unit-diagonal at `lambda_th = 0`, and the determinant is taken by
/// partially pivoted LU. Logs a warning when the pivots spread by more than
/// `1e8`.
pub fn trunc_prob_determinant(params: &SystemParams, lambda_th: f64) -> Result<f64> {
    params.require_k_le_m("truncation probability")?;
    check_threshold(lambda_th)?;
    let (k, m) = (params.k(), params.m());
    let alpha = m - k;
    let half_ln_diag: Vec<f64> = (0..k).map(|i| 0.5 * ln_factorial(alpha + 2 * i)).collect();
    let mut entries = Vec::with_capacity(k * k);
    for j in 0..k {
        for i in 0..k {
            let ln_psi = ln_upper_incomplete_gamma(alpha + i + j + 1, lambda_th)?;
            entries.push((ln_psi - half_ln_diag[i] - half_ln_diag[j]).exp());
        }
    }
    let psi = DMatrix::from_vec(k, k, entries);
    let lu = psi.lu();
    let u = lu.u();
    let pivots: Vec<f64> = u.diagonal().iter().map(|v| v.abs()).collect();
    let (lo, hi) = pivots
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo == 0.0 || hi / lo > CONDITION_WARN {
        warn!(
            "truncation determinant poorly conditioned (K={k}, M={m}, threshold {lambda_th}, pivot ratio {:.3e})",
            hi / lo
        );
    }
    let det = lu.determinant();
    if !(det > 0.0) {
        return Ok(0.0);
    }
    let ln_scale: f64 = 2.0 * half_ln_diag.iter().sum::<f64>();
    let ln_norm: f64 = (1..=k).map(|i| ln_factorial(m - i) + ln_factorial(k - i)).sum();
    Ok((det.ln() + ln_scale - ln_norm).exp().min(1.0))
}

/// Monte Carlo standard errors of the fields of [`TruncStats`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncStdErrors {
    /// Zero when `p_th` comes from the analytic formula.
    pub p_th: f64,
    pub e_inv_lambda: f64,
    pub e_lambda: f64,
}

/// Statistics of the truncation event `Delta = {lambda_min >= lambda_th}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncStats {
    pub lambda_th: f64,
    pub p_th: f64,
    /// Binary entropy of `p_th`, bits.
    pub h_th: f64,
    /// `E[1/lambda | Delta]`.
    pub e_inv_lambda: f64,
    /// `E[lambda | Delta]`.
    pub e_lambda: f64,
    pub method: Method,
    pub std_errors: Option<TruncStdErrors>,
    /// Accepted channel draws (0 for the closed form).
    pub accepted: usize,
}

impl TruncStats {
    /// The exact statistics at `lambda_th = 0` for `K < M`.
    pub fn zero_threshold(params: &SystemParams) -> Result<Self> {
        let (k, m) = (params.k(), params.m());
        if k >= m {
            return Err(if k == m {
                divergent(k)
            } else {
                Error::Domain(format!("truncated inversion requires K <= M (got K={k}, M={m})"))
            });
        }
        Ok(Self {
            lambda_th: 0.0,
            p_th: 1.0,
            h_th: 0.0,
            e_inv_lambda: 1.0 / (m - k) as f64,
            e_lambda: m as f64,
            method: Method::ClosedForm,
            std_errors: None,
            accepted: 0,
        })
    }
}

pub(crate) fn divergent(k: usize) -> Error {
    Error::DivergentStatistic(format!(
        "E[1/lambda] does not exist for K = M = {k} at threshold 0; use a positive threshold"
    ))
}

/// Truncation statistics: closed form at `lambda_th = 0` when `K < M`,
/// otherwise the analytic `P_th` with conditional moments from rejection
/// sampling.
pub fn trunc_stats(params: &SystemParams, lambda_th: f64, mc: &McConfig) -> Result<TruncStats> {
    params.require_k_le_m("truncated inversion")?;
    check_threshold(lambda_th)?;
    if lambda_th == 0.0 {
        return TruncStats::zero_threshold(params);
    }
    let samples = EigenSamples::draw(params, mc);
    trunc_stats_from_samples(params, lambda_th, &samples, mc.min_accepted)
}

/// Analytic `P_th` plus conditional moments estimated from `samples`.
pub fn trunc_stats_from_samples(
    params: &SystemParams,
    lambda_th: f64,
    samples: &EigenSamples,
    min_accepted: usize,
) -> Result<TruncStats> {
    let mut stats = samples.trunc_moments(params, lambda_th, min_accepted)?;
    stats.p_th = trunc_prob(params, lambda_th)?;
    stats.h_th = binary_entropy(stats.p_th)?;
    if let Some(se) = stats.std_errors.as_mut() {
        se.p_th = 0.0;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(k: usize, m: usize) -> SystemParams {
        SystemParams::new(k, m, 1.0, 10.0).unwrap()
    }

    #[test]
    fn zero_threshold_is_one() {
        for (k, m) in [(1, 1), (2, 2), (2, 4), (3, 7), (4, 4), (8, 8), (5, 8)] {
            let v = trunc_prob_determinant(&p(k, m), 0.0).unwrap();
            assert!((v - 1.0).abs() < 1e-10, "K={k} M={m}: {v}");
        }
    }

    #[test]
    fn determinant_matches_closed_forms() {
        for k in 1..=6 {
            for th in [0.01, 0.1, 0.5, 2.0] {
                let det = trunc_prob_determinant(&p(k, k), th).unwrap();
                assert!((det - (-th * k as f64).exp()).abs() < 1e-10);
            }
        }
        assert_relative_eq!(trunc_prob(&p(1, 3), 2.0).unwrap(), 5.0 * (-2.0f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(trunc_prob_determinant(&p(1, 3), 2.0).unwrap(), 0.676_676_416_183_063_9, epsilon = 1e-13);
    }

    #[test]
    fn decreasing_in_threshold() {
        let q = p(2, 4);
        let mut last = 1.0;
        for i in 1..40 {
            let v = trunc_prob(&q, 0.05 * i as f64).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn zero_threshold_stats() {
        let s = TruncStats::zero_threshold(&p(2, 4)).unwrap();
        assert_eq!((s.p_th, s.e_inv_lambda, s.e_lambda), (1.0, 0.5, 4.0));
        assert!(matches!(
            TruncStats::zero_threshold(&p(2, 2)),
            Err(Error::DivergentStatistic(_))
        ));
        let mc = McConfig::new(2000, 1).unwrap();
        assert!(matches!(trunc_stats(&p(2, 2), 0.0, &mc), Err(Error::DivergentStatistic(_))));
    }
}
