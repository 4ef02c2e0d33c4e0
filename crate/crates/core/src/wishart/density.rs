use crate::error::{Error, Result};
use crate::numerics::{for_each_laguerre, gk21, integrate, integrate_decaying, ln_factorial, QuadratureSpec};

/// Marginal density of one unordered positive eigenvalue of `HH^H` for an
/// i.i.d. `CN(0,1)` matrix with `T = min(K,M)`, `S = max(K,M)`:
///
/// `f(x) = (1/T) sum_{i<T} i!/(i+S-T)! [L_i^(S-T)(x)]^2 x^(S-T) e^-x`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigDensity {
    t: usize,
    s: usize,
    quad: QuadratureSpec,
    ln_coef: Vec<f64>,
}

impl EigDensity {
    /// Panics if `t == 0` or `t > s`; [`crate::SystemParams`] guarantees both.
    pub fn new(t: usize, s: usize, quad: QuadratureSpec) -> Self {
        assert!(t >= 1 && t <= s, "need 1 <= T <= S (got T={t}, S={s})");
        let alpha = s - t;
        let ln_t = (t as f64).ln();
        let ln_coef = (0..t)
            .map(|i| ln_factorial(i) - ln_factorial(i + alpha) - ln_t)
            .collect();
        Self { t, s, quad, ln_coef }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    fn alpha(&self) -> usize {
        self.s - self.t
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(x >= 0.0) || x.is_infinite() {
            return 0.0;
        }
        let alpha = self.alpha();
        let base = if alpha == 0 {
            -x
        } else if x == 0.0 {
            return 0.0;
        } else {
            alpha as f64 * x.ln() - x
        };
        let mut sum = 0.0;
        for_each_laguerre(self.t, alpha as f64, x, |i, l| {
            sum += (self.ln_coef[i] + base).exp() * l * l;
        });
        sum
    }

    /// `int_lower^inf g(x) f(x) dx`.
    pub fn expect<G: FnMut(f64) -> f64>(&self, mut g: G, lower: f64) -> Result<f64> {
        integrate_decaying(
            |x| {
                let f = self.pdf(x);
                if f == 0.0 {
                    0.0
                } else {
                    g(x) * f
                }
            },
            lower,
            &self.quad,
        )
    }

    /// `P(lambda <= x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Domain("cdf at NaN".into()));
        }
        if x <= 0.0 {
            return Ok(0.0);
        }
        if x.is_infinite() {
            return Ok(1.0);
        }
        // Integrate whichever side is shorter to keep relative accuracy.
        if x <= self.s as f64 {
            let (v, _) = integrate(|y| self.pdf(y), 0.0, x, &self.quad)?;
            Ok(v.clamp(0.0, 1.0))
        } else {
            let tail = self.expect(|_| 1.0, x)?;
            Ok((1.0 - tail).clamp(0.0, 1.0))
        }
    }
}

/// Density value at `x`.
pub fn eig_pdf(d: &EigDensity, x: f64) -> f64 {
    d.pdf(x)
}

/// `E[g(lambda); lambda >= lower]` by quadrature.
pub fn eig_expect<G: FnMut(f64) -> f64>(d: &EigDensity, g: G, lower: f64) -> Result<f64> {
    d.expect(g, lower)
}

/// CDF at every point of an ascending slice, accumulated panel by panel with
/// a fixed 21-point rule. Meant for dense sorted samples (KS statistics),
/// where consecutive points are close.
pub fn eig_cdf_sorted(d: &EigDensity, xs: &[f64]) -> Result<Vec<f64>> {
    if xs.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidParams("points must be sorted ascending".into()));
    }
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    let mut f = |y: f64| d.pdf(y);
    for &x in xs {
        let x = x.max(0.0);
        if x > prev {
            acc += gk21(&mut f, prev, x).0;
            prev = x;
        }
        out.push(acc.min(1.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn density(k: usize, m: usize) -> EigDensity {
        EigDensity::new(k.min(m), k.max(m), QuadratureSpec::default())
    }

    #[test]
    fn closed_forms() {
        let e = std::f64::consts::E;
        assert_relative_eq!(density(1, 1).pdf(0.0), 1.0);
        assert_relative_eq!(density(1, 2).pdf(1.0), 1.0 / e, epsilon = 1e-15);
        assert_relative_eq!(density(2, 2).pdf(1.0), 0.5 / e, epsilon = 1e-15);
        let d = density(2, 2);
        for x in [0.0f64, 0.3, 2.0, 7.5] {
            let closed = 0.5 * (1.0 + (1.0 - x) * (1.0 - x)) * (-x).exp();
            assert_relative_eq!(d.pdf(x), closed, epsilon = 1e-14);
        }
        assert_eq!(density(1, 3).pdf(0.0), 0.0);
        assert_eq!(d.pdf(-1.0), 0.0);
    }

    #[test]
    fn moments() {
        let d = density(2, 4);
        assert_relative_eq!(d.expect(|_| 1.0, 0.0).unwrap(), 1.0, epsilon = 1e-10);
        assert_relative_eq!(d.expect(|x| x, 0.0).unwrap(), 4.0, epsilon = 1e-9);
        assert_relative_eq!(d.expect(|x| 1.0 / x, 0.0).unwrap(), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn cdf_paths_agree() {
        let d = density(3, 5);
        let xs = [0.1, 1.0, 4.0, 5.0, 9.0, 20.0];
        let sorted = eig_cdf_sorted(&d, &xs).unwrap();
        for (x, s) in xs.iter().zip(&sorted) {
            let c = d.cdf(*x).unwrap();
            assert!((c - s).abs() < 1e-9, "x={x}: {c} vs {s}");
        }
        assert_eq!(d.cdf(0.0).unwrap(), 0.0);
        assert_eq!(d.cdf(f64::INFINITY).unwrap(), 1.0);
    }
}
