use crate::error::{Error, Result};

/// A located root together with the function value there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// `g(x)`, so callers can report the constraint residual.
    pub value: f64,
    pub evaluations: usize,
}

const EXPANSION_ROUNDS: usize = 60;

/// Solves `g(x) = target` for a continuous, strictly monotone `g`.
///
/// `bracket_hint` need not straddle the root; it is widened by doubling (up to
/// 60 rounds) in whichever direction the monotone trend points. The result
/// satisfies `|g(x) - target| <= 1e-9 * |target|` (`1e-9` absolute for a zero
/// target) unless the bracket collapses to adjacent floats first.
pub fn solve_monotone<G: FnMut(f64) -> Result<f64>>(
    mut g: G,
    target: f64,
    bracket_hint: (f64, f64),
) -> Result<Root> {
    let (mut lo, mut hi) = if bracket_hint.0 <= bracket_hint.1 {
        bracket_hint
    } else {
        (bracket_hint.1, bracket_hint.0)
    };
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let mut h_lo = g(lo)? - target;
    let mut h_hi = g(hi)? - target;
    let mut evaluations = 2;
    let mut width = hi - lo;
    let mut rounds = 0;
    while h_lo.signum() == h_hi.signum() && h_lo != 0.0 && h_hi != 0.0 {
        if rounds == EXPANSION_ROUNDS {
            return Err(Error::BracketFailure { target, lo, hi });
        }
        rounds += 1;
        width *= 2.0;
        // Values at both ends on the same side of the target: move the end that
        // the monotone trend says is closer to the root.
        let increasing = h_hi > h_lo;
        let decreasing = h_hi < h_lo;
        let below = h_lo < 0.0;
        if (increasing && below) || (decreasing && !below) {
            lo = hi;
            h_lo = h_hi;
            hi += width;
            h_hi = g(hi)? - target;
            evaluations += 1;
        } else if increasing || decreasing {
            hi = lo;
            h_hi = h_lo;
            lo -= width;
            h_lo = g(lo)? - target;
            evaluations += 1;
        } else {
            lo -= width;
            hi += width;
            h_lo = g(lo)? - target;
            h_hi = g(hi)? - target;
            evaluations += 2;
        }
        if !h_lo.is_finite() || !h_hi.is_finite() {
            return Err(Error::BracketFailure { target, lo, hi });
        }
    }
    let tol = if target == 0.0 { 1e-9 } else { 1e-9 * target.abs() };
    let mut root = brent(|x| g(x).map(|v| v - target), lo, hi, h_lo, h_hi, tol)?;
    root.value += target;
    root.evaluations += evaluations;
    Ok(root)
}

/// Brent's method on a bracket `[a, b]` with known signs `fa`, `fb`.
///
/// Stops when `|f| <= f_tol` or the bracket shrinks to float resolution.
pub fn brent<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    f_tol: f64,
) -> Result<Root> {
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa == 0.0 {
        return Ok(Root {
            x: a,
            value: fa,
            evaluations: 0,
        });
    }
    if fb == 0.0 {
        return Ok(Root {
            x: b,
            value: fb,
            evaluations: 0,
        });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::BracketFailure {
            target: 0.0,
            lo: a,
            hi: b,
        });
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut bisected = true;
    let mut evaluations = 0;
    for _ in 0..200 {
        if fb.abs() <= f_tol {
            break;
        }
        let x_tol = 4.0 * f64::EPSILON * b.abs().max(1e-300);
        if (b - a).abs() <= x_tol {
            break;
        }
        let mut s = if fa != fc && fb != fc {
            // Inverse quadratic interpolation.
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let outside = !((s > lo.min(b)) && (s < lo.max(b)));
        let slow = if bisected {
            (s - b).abs() >= (b - c).abs() / 2.0
        } else {
            (s - b).abs() >= (c - d).abs() / 2.0
        };
        let tiny = if bisected {
            (b - c).abs() < x_tol
        } else {
            (c - d).abs() < x_tol
        };
        if outside || slow || tiny {
            s = 0.5 * (a + b);
            bisected = true;
        } else {
            bisected = false;
        }
        let fs = f(s)?;
        evaluations += 1;
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Ok(Root {
        x: b,
        value: fb,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let r = solve_monotone(Ok, 3.0, (0.0, 1.0)).unwrap();
        assert!((r.x - 3.0).abs() <= 3e-9);
    }

    #[test]
    fn decreasing_function_expands_left() {
        let r = solve_monotone(|x| Ok((-x).exp()), 50.0, (0.0, 1.0)).unwrap();
        assert!((r.value - 50.0).abs() <= 5e-8);
        assert!((r.x - (-(50f64).ln())).abs() < 1e-9);
    }

    #[test]
    fn unattainable_target() {
        let r = solve_monotone(|x: f64| Ok(x.atan()), 2.0, (0.0, 1.0));
        assert!(matches!(r, Err(Error::BracketFailure { .. })));
    }

    #[test]
    fn cubic_root() {
        let r = solve_monotone(|x| Ok(x * x * x), -8.0, (5.0, 6.0)).unwrap();
        assert!((r.x + 2.0).abs() < 1e-9);
    }
}
