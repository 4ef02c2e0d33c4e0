use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::solve_monotone;
use crate::wishart::EigDensity;

/// Solution of a continuous water-filling problem over one eigenvalue law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaterfillSolution {
    /// Water level; `+inf` when the budget is zero.
    pub nu: f64,
    /// Rate per dimension, bits.
    pub rate: f64,
    /// Per-dimension budget imposed, bits.
    pub budget: f64,
    /// `|constraint(nu) - budget|`.
    pub residual: f64,
}

/// `int_(nu/g)^inf log2(g x / nu) f(x) dx`, the budget spent at level `nu`.
pub fn waterfill_constraint(density: &EigDensity, gain: f64, nu: f64) -> Result<f64> {
    let ln_ratio = (gain / nu).ln();
    let v = density.expect(|x| x.ln() + ln_ratio, nu / gain)?;
    Ok(v / LN_2)
}

/// `int_(nu/g)^inf [log2(1 + g x) - log2(1 + nu)] f(x) dx`.
pub fn waterfill_rate(density: &EigDensity, gain: f64, nu: f64) -> Result<f64> {
    let ln_nu = nu.ln_1p();
    let v = density.expect(|x| (gain * x).ln_1p() - ln_nu, nu / gain)?;
    Ok(v.max(0.0) / LN_2)
}

/// Finds the level `nu` whose spend matches `budget` (bits per dimension)
/// and returns the resulting rate. The search runs over `ln nu`.
pub fn waterfill_continuous(
    density: &EigDensity,
    gain: f64,
    budget: f64,
) -> Result<WaterfillSolution> {
    if !(gain > 0.0 && gain.is_finite()) {
        return Err(Error::Domain(format!("water-filling gain must be positive (got {gain})")));
    }
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(Error::Domain(format!("budget must be non-negative (got {budget})")));
    }
    if budget == 0.0 {
        return Ok(WaterfillSolution {
            nu: f64::INFINITY,
            rate: 0.0,
            budget,
            residual: 0.0,
        });
    }
    // Point-mass guess at the mean eigenvalue: nu = g S 2^-budget.
    let guess = gain.ln() + (density.s() as f64).ln() - budget * LN_2;
    let root = solve_monotone(
        |ln_nu| waterfill_constraint(density, gain, ln_nu.exp()),
        budget,
        (guess - 1.0, guess + 1.0),
    )?;
    let nu = root.x.exp();
    Ok(WaterfillSolution {
        nu,
        rate: waterfill_rate(density, gain, nu)?,
        budget,
        residual: (root.value - budget).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::scalar_ib_rate;
    use crate::numerics::QuadratureSpec;

    #[test]
    fn zero_budget() {
        let d = EigDensity::new(2, 2, QuadratureSpec::default());
        let w = waterfill_continuous(&d, 10.0, 0.0).unwrap();
        assert_eq!(w.rate, 0.0);
        assert!(w.nu.is_infinite());
    }

    #[test]
    fn rate_increases_with_budget() {
        let d = EigDensity::new(2, 3, QuadratureSpec::default());
        let mut last = 0.0;
        for b in [0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let w = waterfill_continuous(&d, 10.0, b).unwrap();
            assert!(w.rate > last);
            assert!(w.rate <= b + 1e-12);
            assert!(w.residual <= 1e-8 * b.max(1.0));
            last = w.rate;
        }
    }

    #[test]
    fn concentrated_law_matches_scalar() {
        // Erlang(S) with large S, seen at scale 1/S, approaches a point mass at 1.
        let s = 4000;
        let d = EigDensity::new(1, s, QuadratureSpec::default());
        let g = 2.0 / s as f64;
        let w = waterfill_continuous(&d, g, 3.0).unwrap();
        assert!((w.rate - scalar_ib_rate(2.0, 3.0)).abs() < 2e-3);
        assert!((w.nu - 2.0 * 2f64.powi(-3)).abs() < 5e-3);
    }

    #[test]
    fn small_budget_low_gain_residual() {
        let d = EigDensity::new(1, 4, QuadratureSpec::default());
        let b = 0.027652529508426976;
        let w = waterfill_continuous(&d, 0.01, b).unwrap();
        let spend = waterfill_constraint(&d, 0.01, w.nu).unwrap();
        assert!((spend - b).abs() <= 1e-8 * b);
    }
}
