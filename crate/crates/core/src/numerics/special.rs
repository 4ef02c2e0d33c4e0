use statrs::function::{factorial, gamma};

use crate::error::{Error, Result};

/// `ln Gamma(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("log_gamma needs x > 0 (got {x})")));
    }
    Ok(gamma::ln_gamma(x))
}

/// `ln n!`, exact table lookup for `n <= 170`.
pub fn ln_factorial(n: usize) -> f64 {
    factorial::ln_factorial(n as u64)
}

/// Regularized upper incomplete gamma `Q(n, x) = Gamma(n, x) / (n-1)!` for
/// integer shape, via `e^-x * sum_{m<n} x^m / m!` summed in log space.
pub fn regularized_upper_gamma(n: usize, x: f64) -> Result<f64> {
    Ok(ln_regularized_upper_gamma(n, x)?.exp())
}

fn ln_regularized_upper_gamma(n: usize, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("incomplete gamma shape must be >= 1".into()));
    }
    if !(x >= 0.0) || x.is_nan() {
        return Err(Error::Domain(format!("incomplete gamma needs x >= 0 (got {x})")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    let ln_x = x.ln();
    // Terms x^m/m! peak near m = x; sum relative to the largest term.
    let ln_term = |m: usize| m as f64 * ln_x - ln_factorial(m);
    let peak = (0..n).map(ln_term).fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = (0..n).map(|m| (ln_term(m) - peak).exp()).sum();
    Ok(peak + sum.ln() - x)
}

/// `ln Gamma(n, x)` for integer `n >= 1`.
pub fn ln_upper_incomplete_gamma(n: usize, x: f64) -> Result<f64> {
    let ln_q = ln_regularized_upper_gamma(n, x)?;
    Ok(ln_factorial(n - 1) + ln_q)
}

/// Upper incomplete gamma `Gamma(n, x) = int_x^inf t^(n-1) e^-t dt`.
pub fn upper_incomplete_gamma(n: usize, x: f64) -> Result<f64> {
    Ok(ln_upper_incomplete_gamma(n, x)?.exp())
}

/// Generalized Laguerre polynomial `L_i^alpha(x)` by the three-term recurrence.
pub fn laguerre_assoc(i: usize, alpha: f64, x: f64) -> f64 {
    let mut last = 0.0;
    for_each_laguerre(i + 1, alpha, x, |_, v| last = v);
    last
}

/// Calls `visit(k, L_k^alpha(x))` for `k = 0..n_terms`.
pub(crate) fn for_each_laguerre<V: FnMut(usize, f64)>(n_terms: usize, alpha: f64, x: f64, mut visit: V) {
    if n_terms == 0 {
        return;
    }
    let mut prev = 1.0;
    visit(0, prev);
    if n_terms == 1 {
        return;
    }
    let mut cur = 1.0 + alpha - x;
    visit(1, cur);
    for k in 1..n_terms - 1 {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        visit(k + 1, cur);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn incomplete_gamma_examples() {
        assert_relative_eq!(upper_incomplete_gamma(1, 2.0).unwrap(), (-2.0f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(upper_incomplete_gamma(3, 0.0).unwrap(), 2.0, epsilon = 1e-14);
        // (n-1)! e^-x sum: 6 e^-1.5 (1 + 1.5 + 1.125 + 0.5625)
        assert_relative_eq!(upper_incomplete_gamma(4, 1.5).unwrap(), 5.606_145_3, epsilon = 1e-6);
        assert_relative_eq!(regularized_upper_gamma(3, 2.0).unwrap(), 5.0 * (-2.0f64).exp(), epsilon = 1e-15);
        assert!(upper_incomplete_gamma(0, 1.0).is_err());
        assert!(upper_incomplete_gamma(2, -1.0).is_err());
    }

    #[test]
    fn incomplete_gamma_large_arguments_stay_finite() {
        let q = regularized_upper_gamma(600, 500.0).unwrap();
        assert!(q > 0.99 && q <= 1.0);
        let q = regularized_upper_gamma(5, 700.0).unwrap();
        assert!(q > 0.0 && q < 1e-280);
    }

    #[test]
    fn laguerre_examples() {
        assert_eq!(laguerre_assoc(0, 3.0, 1.7), 1.0);
        assert_eq!(laguerre_assoc(1, 2.0, 1.0), 2.0);
        assert_relative_eq!(laguerre_assoc(2, 1.0, 2.0), -1.0, epsilon = 1e-15);
        // closed quadratic x^2/2 - (a+2)x + (a+1)(a+2)/2
        let (a, x) = (3.0, 0.7);
        let closed = x * x / 2.0 - (a + 2.0) * x + (a + 1.0) * (a + 2.0) / 2.0;
        assert_relative_eq!(laguerre_assoc(2, a, x), closed, epsilon = 1e-14);
    }

    #[test]
    fn log_gamma_domain() {
        assert!(log_gamma(0.0).is_err());
        assert_relative_eq!(log_gamma(5.0).unwrap(), 24f64.ln(), epsilon = 1e-13);
    }
}
