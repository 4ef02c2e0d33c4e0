use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `f` on `[a, b]`: a uniform coarse scan of `coarse_points`
/// points, then golden-section refinement inside the bracket around the best
/// grid point until the bracket is narrower than `refine_tol`.
///
/// The returned value is never below the best grid value.
pub fn maximize_scalar<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    interval: (f64, f64),
    coarse_points: usize,
    refine_tol: f64,
) -> Result<Maximum> {
    let (a, b) = interval;
    let n = coarse_points.max(2);
    let step = (b - a) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
        .collect();
    let mut best = Maximum {
        x: grid[0],
        value: f64::NEG_INFINITY,
    };
    let mut best_i = 0;
    for (i, &x) in grid.iter().enumerate() {
        let v = f(x)?;
        if v > best.value {
            best = Maximum { x, value: v };
            best_i = i;
        }
    }
    let lo = grid[best_i.saturating_sub(1)];
    let hi = grid[(best_i + 1).min(n - 1)];
    let refined = golden_section_max(&mut f, lo, hi, refine_tol)?;
    if refined.value > best.value {
        best = refined;
    }
    Ok(best)
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_section_max<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Maximum> {
    let (mut a, mut b) = (a, b);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while (b - a).abs() > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 {
        Maximum { x: x1, value: f1 }
    } else {
        Maximum { x: x2, value: f2 }
    })
}
