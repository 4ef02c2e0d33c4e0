use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::model::{Aux, BoundResult, Method, Scheme, SystemParams};
use crate::montecarlo::{EigenSamples, McConfig, Moments};
use crate::numerics::{solve_monotone, QuadratureSpec};
use crate::wishart::{divergent, trunc_prob, trunc_stats_from_samples, TruncStats};

/// Geometric threshold grid size for the default policy.
const GRID_POINTS: usize = 16;
const GRID_LOW: f64 = 1e-3;
/// The grid stops where the acceptance probability falls to this level.
const MIN_ACCEPTANCE: f64 = 0.01;
/// A positive threshold must beat the exact zero-threshold value by this
/// many standard errors to be preferred.
const SELECTION_SIGMAS: f64 = 3.0;

/// `D = (1 + sigma^2 m) / (2^x - 1)` with `x = (C - H_th)/(P_th K)`; `None`
/// when the link is fully spent on the truncation flag.
fn distortion(params: &SystemParams, stats: &TruncStats) -> Result<Option<f64>> {
    let pk = stats.p_th * params.k() as f64;
    let spare = params.c() - stats.h_th;
    if spare <= 0.0 || pk == 0.0 {
        if params.c() == 0.0 {
            return Ok(None);
        }
        return Err(Error::InsufficientBottleneck(format!(
            "C = {} does not exceed the truncation flag cost H_th = {}",
            params.c(),
            stats.h_th
        )));
    }
    let x = spare / pk;
    Ok(Some(
        (1.0 + params.sigma2() * stats.e_inv_lambda) / (x * LN_2).exp_m1(),
    ))
}

struct Terms {
    /// `E[log2(1 + D + sigma^2/lambda) | Delta]`.
    log_mean: f64,
    std_error: Option<f64>,
}

fn assemble(
    params: &SystemParams,
    stats: &TruncStats,
    d: f64,
    terms: Terms,
    method: Method,
) -> BoundResult {
    let s2 = params.sigma2();
    let pk = stats.p_th * params.k() as f64;
    let m = stats.e_inv_lambda;
    let tail = (d + s2 * m).log2();
    let value = pk * (terms.log_mean - tail);
    let r_lower = pk * ((1.0 + d + s2 / stats.e_lambda).log2() - tail);
    let r_upper = pk * ((1.0 + d + s2 * m).log2() - tail);
    BoundResult {
        scheme: Scheme::Tci,
        value: value.max(0.0),
        water_level: None,
        aux: aux(stats, d, value, r_lower, r_upper),
        residual: 0.0,
        method,
        std_error: terms.std_error,
    }
}

fn aux(stats: &TruncStats, d: f64, rate: f64, r_lower: f64, r_upper: f64) -> Aux {
    Aux::Tci {
        lambda_th: stats.lambda_th,
        p_th: stats.p_th,
        h_th: stats.h_th,
        distortion: d,
        e_inv_lambda: stats.e_inv_lambda,
        e_lambda: stats.e_lambda,
        unclamped_rate: rate,
        r_lower,
        r_upper,
    }
}

fn zero(stats: &TruncStats, method: Method) -> BoundResult {
    BoundResult::zero(Scheme::Tci, method, aux(stats, f64::INFINITY, 0.0, 0.0, 0.0))
}

/// The `(R, R_lower, R_upper)` triple of a TCI result, before clamping.
pub fn tci_sandwich(r: &BoundResult) -> Option<(f64, f64, f64)> {
    match r.aux {
        Aux::Tci {
            unclamped_rate,
            r_lower,
            r_upper,
            ..
        } => Some((unclamped_rate, r_lower, r_upper)),
        _ => None,
    }
}

/// TCI lower bound at threshold `lambda_th > 0` (or `0` when `K < M`),
/// with `P_th` analytic and the conditional expectations averaged over the
/// accepted draws of `samples`. `aux` carries the Jensen bounds
/// `R_lower <= R <= R_upper`, which hold exactly on the empirical law, and
/// the formula value; the reported value is clamped at zero.
///
/// The standard error is a delta-method estimate that accounts for `D`
/// depending on the estimated `E[1/lambda | Delta]`.
pub fn tci_rate(
    params: &SystemParams,
    lambda_th: f64,
    samples: &EigenSamples,
    min_accepted: usize,
) -> Result<BoundResult> {
    let stats = trunc_stats_from_samples(params, lambda_th, samples, min_accepted)?;
    let Some(d) = distortion(params, &stats)? else {
        return Ok(zero(&stats, Method::MonteCarlo));
    };
    let s2 = params.sigma2();
    let m = stats.e_inv_lambda;
    let mut g = Vec::with_capacity(stats.accepted);
    let mut u = Vec::with_capacity(stats.accepted);
    let mut q = 0.0;
    for row in samples.accepted(lambda_th) {
        let n = row.len() as f64;
        let (mut gs, mut qs, mut us) = (0.0, 0.0, 0.0);
        for &l in row {
            let arg = 1.0 + d + s2 / l;
            gs += arg.log2();
            qs += 1.0 / arg;
            us += 1.0 / l;
        }
        g.push(gs / n);
        u.push(us / n);
        q += qs / n;
    }
    let n = g.len() as f64;
    let log_mean = g.iter().sum::<f64>() / n;
    let q = q / (n * LN_2);
    // dR/dm through D: dD/dm = sigma^2 / (2^x - 1) = sigma^2 D / (1 + sigma^2 m).
    let dd_dm = s2 * d / (1.0 + s2 * m);
    let slope = q * dd_dm - (dd_dm + s2) / ((d + s2 * m) * LN_2);
    let influence: Moments = g.iter().zip(&u).map(|(gs, us)| gs + slope * us).collect();
    let pk = stats.p_th * params.k() as f64;
    let terms = Terms {
        log_mean,
        std_error: Some(pk * influence.std_error()),
    };
    Ok(assemble(params, &stats, d, terms, Method::MonteCarlo))
}

/// Exact TCI bound at `lambda_th = 0` for `K < M`: `P_th = 1`, `H_th = 0`,
/// `E[1/lambda] = 1/(M-K)`, `E[lambda] = M`; one quadrature for the
/// logarithmic term.
pub fn tci_closed_form_zero_threshold(params: &SystemParams, quad: &QuadratureSpec) -> Result<BoundResult> {
    let (k, m) = (params.k(), params.m());
    if k == m {
        return Err(divergent(k));
    }
    if k > m {
        return Err(Error::Domain(format!(
            "the zero-threshold closed form requires K < M (got K={k}, M={m})"
        )));
    }
    let stats = TruncStats::zero_threshold(params)?;
    let Some(d) = distortion(params, &stats)? else {
        return Ok(zero(&stats, Method::ClosedForm));
    };
    let s2 = params.sigma2();
    let log_mean = params.density(quad).expect(|l| (1.0 + d + s2 / l).ln(), 0.0)? / LN_2;
    let terms = Terms {
        log_mean,
        std_error: None,
    };
    Ok(assemble(params, &stats, d, terms, Method::ClosedForm))
}

/// Largest threshold with `P_th >= 0.01`.
pub fn tci_threshold_ceiling(params: &SystemParams) -> Result<f64> {
    params.require_k_le_m("truncated inversion")?;
    let (k, m) = (params.k(), params.m());
    if k == m {
        return Ok((1.0 / MIN_ACCEPTANCE).ln() / k as f64);
    }
    let guess = (m as f64).ln();
    let root = solve_monotone(
        |u: f64| trunc_prob(params, u.exp()),
        MIN_ACCEPTANCE,
        (guess - 1.0, guess),
    )?;
    Ok(root.x.exp())
}

/// The thresholds scanned by the default policy: `16` points spaced
/// geometrically on `[1e-3, ceiling]`.
pub fn tci_threshold_grid(params: &SystemParams) -> Result<Vec<f64>> {
    let hi = tci_threshold_ceiling(params)?.max(2.0 * GRID_LOW);
    let ratio = (hi / GRID_LOW).ln() / (GRID_POINTS - 1) as f64;
    Ok((0..GRID_POINTS)
        .map(|i| {
            if i == GRID_POINTS - 1 {
                hi
            } else {
                GRID_LOW * (ratio * i as f64).exp()
            }
        })
        .collect())
}

/// TCI bound with a fixed threshold, or (`None`) the default policy: for
/// `K < M` the exact zero-threshold value unless a positive grid threshold
/// beats it by more than three standard errors; for `K = M` the best point
/// of the positive grid. All thresholds share one set of channel draws.
pub fn tci_bound(
    params: &SystemParams,
    lambda_th: Option<f64>,
    mc: &McConfig,
    quad: &QuadratureSpec,
) -> Result<BoundResult> {
    params.require_k_le_m("truncated inversion")?;
    match lambda_th {
        Some(th) if th == 0.0 => tci_closed_form_zero_threshold(params, quad),
        Some(th) => {
            let samples = EigenSamples::draw(params, mc);
            tci_rate(params, th, &samples, mc.min_accepted)
        }
        None => {
            let samples = EigenSamples::draw(params, mc);
            tci_bound_with_samples(params, &samples, mc.min_accepted, quad)
        }
    }
}

/// Default-policy TCI bound over pre-drawn channel samples.
pub fn tci_bound_with_samples(
    params: &SystemParams,
    samples: &EigenSamples,
    min_accepted: usize,
    quad: &QuadratureSpec,
) -> Result<BoundResult> {
    params.require_k_le_m("truncated inversion")?;
    let mut best: Option<BoundResult> = None;
    let mut last_err = None;
    for th in tci_threshold_grid(params)? {
        match tci_rate(params, th, samples, min_accepted) {
            Ok(r) => {
                if best.as_ref().is_none_or(|b| r.value > b.value) {
                    best = Some(r);
                }
            }
            Err(e @ (Error::InsufficientAcceptance { .. } | Error::InsufficientBottleneck(_))) => {
                last_err = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    if params.k() < params.m() {
        let exact = tci_closed_form_zero_threshold(params, quad)?;
        return Ok(match best {
            Some(b) if b.value > exact.value + SELECTION_SIGMAS * b.std_error.unwrap_or(0.0) => b,
            _ => exact,
        });
    }
    best.ok_or_else(|| {
        last_err.unwrap_or_else(|| Error::InsufficientBottleneck("no feasible threshold".into()))
    })
}
