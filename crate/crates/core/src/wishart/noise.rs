//! Law of the zero-forcing noise level `a = sigma^2 [(H^H H)^-1]_kk`.
//!
//! For a complex Gaussian `M x K` channel, `sigma^2 / a ~ Gamma(M-K+1, 1)`,
//! so every quantity here has a closed form in the incomplete gamma function.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::numerics::{integrate_decaying, log_gamma, regularized_upper_gamma, solve_monotone};

fn shape(params: &SystemParams) -> Result<usize> {
    params.require_k_le_m("the zero-forcing noise law")?;
    Ok(params.m() - params.k() + 1)
}

/// Density of `a` at `a > 0`.
pub fn noise_pdf(params: &SystemParams, a: f64) -> Result<f64> {
    let n = shape(params)? as f64;
    if !(a > 0.0) || a.is_infinite() {
        return Ok(0.0);
    }
    let s2 = params.sigma2();
    let ln = n * s2.ln() - log_gamma(n)? - (n + 1.0) * a.ln() - s2 / a;
    Ok(ln.exp())
}

/// `P(a <= x) = Q(M-K+1, sigma^2/x)`.
pub fn noise_cdf(params: &SystemParams, x: f64) -> Result<f64> {
    let n = shape(params)?;
    if x.is_nan() {
        return Err(Error::Domain("noise cdf at NaN".into()));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    regularized_upper_gamma(n, params.sigma2() / x)
}

/// The `p`-quantile of `a`, `0 < p < 1`.
pub fn noise_quantile(params: &SystemParams, p: f64) -> Result<f64> {
    let n = shape(params)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("quantile level must lie in (0, 1) (got {p})")));
    }
    // Solve Q(n, g) = p for g = sigma^2/a in log space; Q decreases in g.
    let root = solve_monotone(
        |u: f64| regularized_upper_gamma(n, u.exp()),
        p,
        ((n as f64).ln() - 1.0, (n as f64).ln() + 1.0),
    )?;
    Ok(params.sigma2() / root.x.exp())
}

/// `E[h(a)]`, integrating over `G = sigma^2/a ~ Gamma(M-K+1, 1)`.
pub fn noise_expect<H: FnMut(f64) -> f64>(params: &SystemParams, mut h: H) -> Result<f64> {
    let n = shape(params)?;
    let s2 = params.sigma2();
    let ln_norm = log_gamma(n as f64)?;
    let nm1 = (n - 1) as f64;
    let quad = crate::numerics::QuadratureSpec::default();
    integrate_decaying(
        |g| {
            if g == 0.0 {
                return 0.0;
            }
            let w = (nm1 * g.ln() - g - ln_norm).exp();
            if w == 0.0 {
                0.0
            } else {
                h(s2 / g) * w
            }
        },
        0.0,
        &quad,
    )
}

/// A quantization grid `b_1 < ... < b_(J-1) < b_J = +inf` of noise levels
/// with the probabilities of each ceiling cell.
///
/// Only the finite levels are stored; the `+inf` sentinel is implied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantGrid {
    points: Vec<f64>,
    pmf: Vec<f64>,
    entropy_h0: f64,
    bits: Option<u32>,
}

impl QuantGrid {
    /// `pmf` has one entry per finite point plus one for the sentinel cell.
    pub fn new(points: Vec<f64>, pmf: Vec<f64>, bits: Option<u32>) -> Result<Self> {
        check_points(&points)?;
        if pmf.len() != points.len() + 1 {
            return Err(Error::InvalidParams(format!(
                "grid with {} finite points needs {} probabilities (got {})",
                points.len(),
                points.len() + 1,
                pmf.len()
            )));
        }
        if pmf.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidParams("negative probability in grid pmf".into()));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParams(format!("grid pmf sums to {total}")));
        }
        let entropy_h0 = pmf
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum();
        Ok(Self {
            points,
            pmf,
            entropy_h0,
            bits,
        })
    }

    /// Finite levels, ascending.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Number of levels `J`, counting the sentinel.
    pub fn levels(&self) -> usize {
        self.points.len() + 1
    }

    pub fn entropy_h0(&self) -> f64 {
        self.entropy_h0
    }

    pub fn bits(&self) -> Option<u32> {
        self.bits
    }

    /// Index of the smallest level `>= a`; `levels() - 1` is the sentinel.
    pub fn ceil_index(&self, a: f64) -> usize {
        self.points.partition_point(|&b| b < a)
    }
}

fn check_points(points: &[f64]) -> Result<()> {
    if points.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
        return Err(Error::InvalidParams(
            "finite grid levels must be positive".into(),
        ));
    }
    if points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParams(
            "grid levels must be strictly increasing (duplicates are ambiguous)".into(),
        ));
    }
    if points.len() >= 256 {
        return Err(Error::InvalidParams("at most 256 grid levels are supported".into()));
    }
    Ok(())
}

/// The smallest grid level `>= a` (`+inf` for the sentinel cell).
pub fn ceil_to_grid(a: f64, grid: &QuantGrid) -> f64 {
    grid.points.get(grid.ceil_index(a)).copied().unwrap_or(f64::INFINITY)
}

/// Scores a grid against the noise law: `P_j = P(b_(j-1) < a <= b_j)`.
/// A trailing `+inf` in `points` is accepted and dropped.
pub fn noise_grid_pmf(params: &SystemParams, points: &[f64]) -> Result<QuantGrid> {
    let finite: Vec<f64> = match points.split_last() {
        Some((last, rest)) if last.is_infinite() && *last > 0.0 => rest.to_vec(),
        _ => points.to_vec(),
    };
    check_points(&finite)?;
    let mut cdf = Vec::with_capacity(finite.len() + 2);
    cdf.push(0.0);
    for &b in &finite {
        cdf.push(noise_cdf(params, b)?);
    }
    cdf.push(1.0);
    let pmf = cdf.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect();
    QuantGrid::new(finite, pmf, None)
}

/// Quantile grid with `J = 2^bits` equiprobable cells.
pub fn noise_quantile_grid(params: &SystemParams, bits: u32) -> Result<QuantGrid> {
    if !(1..=8).contains(&bits) {
        return Err(Error::InvalidParams(format!(
            "quantile grid needs 1 <= B <= 8 bits (got {bits})"
        )));
    }
    let j = 1usize << bits;
    let points = (1..j)
        .map(|i| noise_quantile(params, i as f64 / j as f64))
        .collect::<Result<Vec<_>>>()?;
    QuantGrid::new(points, vec![1.0 / j as f64; j], Some(bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(k: usize, m: usize, s2: f64) -> SystemParams {
        SystemParams::new(k, m, s2, 10.0).unwrap()
    }

    #[test]
    fn pdf_normalizes_and_mean() {
        let q = p(2, 4, 1.0);
        let quad = crate::numerics::QuadratureSpec::default();
        // Substitute a = 1/u to integrate over (0, inf) with decay.
        let mass = integrate_decaying(|u| noise_pdf(&q, 1.0 / u).unwrap() / (u * u), 0.0, &quad).unwrap();
        assert_relative_eq!(mass, 1.0, epsilon = 1e-10);
        assert_relative_eq!(noise_expect(&q, |a| a).unwrap(), 0.5, epsilon = 1e-10);
        assert_relative_eq!(noise_expect(&p(2, 5, 0.3), |a| a).unwrap(), 0.1, epsilon = 1e-10);
    }

    #[test]
    fn rejects_k_above_m() {
        assert!(matches!(noise_pdf(&p(3, 2, 1.0), 1.0), Err(Error::Domain(_))));
        assert!(noise_quantile_grid(&p(3, 2, 1.0), 1).is_err());
    }

    #[test]
    fn quantile_grid_round_trip() {
        let q = p(2, 4, 1.0);
        let g = noise_quantile_grid(&q, 2).unwrap();
        assert_eq!(g.levels(), 4);
        assert_eq!(g.entropy_h0(), 2.0);
        assert!(g.points().windows(2).all(|w| w[0] < w[1]));
        let back = noise_grid_pmf(&q, g.points()).unwrap();
        for p in back.pmf() {
            assert!((p - 0.25).abs() < 1e-8);
        }
        let median = noise_quantile(&q, 0.5).unwrap();
        assert_relative_eq!(noise_cdf(&q, median).unwrap(), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn ceiling() {
        let g = QuantGrid::new(vec![0.4, 0.6], vec![0.2, 0.3, 0.5], None).unwrap();
        assert_eq!(ceil_to_grid(0.5, &g), 0.6);
        assert_eq!(ceil_to_grid(0.4, &g), 0.4);
        assert_eq!(ceil_to_grid(7.0, &g), f64::INFINITY);
        assert_eq!(g.ceil_index(7.0), 2);
        assert!(QuantGrid::new(vec![0.4, 0.4], vec![0.2, 0.3, 0.5], None).is_err());
    }

    #[test]
    fn sentinel_only_grid() {
        let g = noise_grid_pmf(&p(2, 4, 1.0), &[f64::INFINITY]).unwrap();
        assert_eq!(g.pmf(), &[1.0]);
        assert_eq!(g.entropy_h0(), 0.0);
    }
}
