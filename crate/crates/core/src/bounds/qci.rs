use crate::error::{Error, Result};
use crate::model::{scalar_ib_rate, Aux, BoundResult, Method, Scheme, SystemParams};
use crate::wishart::{noise_quantile_grid, QuantGrid};

fn aux(grid: &QuantGrid, active: usize) -> Aux {
    Aux::Qci {
        bits: grid.bits(),
        levels: grid.points().to_vec(),
        pmf: grid.pmf().to_vec(),
        entropy_h0: grid.entropy_h0(),
        active_levels: active,
    }
}

fn check_budget(params: &SystemParams, spent: f64, what: &str) -> Result<f64> {
    let budget = params.c() - spent;
    if budget <= 0.0 {
        return Err(Error::InsufficientBottleneck(format!(
            "C = {} does not exceed the {what} of {spent} bits",
            params.c()
        )));
    }
    Ok(budget)
}

/// Per-level bit allocation `c_j = [log2(rho_j / nu)]^+`.
pub fn qci_allocation(grid: &QuantGrid, nu: f64) -> Vec<f64> {
    grid.points()
        .iter()
        .map(|&b| (1.0 / (b * nu)).log2().max(0.0))
        .collect()
}

fn finish(params: &SystemParams, grid: &QuantGrid, log2_nu: f64, active: usize, budget: f64) -> BoundResult {
    let nu = log2_nu.exp2();
    let k = params.k() as f64;
    let alloc = qci_allocation(grid, nu);
    let mut value = 0.0;
    let mut spend = 0.0;
    for ((&b, &p), &c) in grid.points().iter().zip(grid.pmf()).zip(&alloc) {
        value += k * p * scalar_ib_rate(1.0 / b, c);
        spend += k * p * c;
    }
    BoundResult {
        scheme: Scheme::Qci,
        value,
        water_level: Some(nu),
        aux: aux(grid, active),
        residual: (spend - budget).abs(),
        method: Method::Quadrature,
        std_error: None,
    }
}

/// QCI lower bound on an arbitrary grid, paying `K H0` bits for the
/// separately coded noise levels. Discrete water-filling over the finite
/// levels with weights `K P_j`; levels exactly at the water level stay
/// inactive.
pub fn qci_rate(params: &SystemParams, grid: &QuantGrid) -> Result<BoundResult> {
    params.require_k_le_m("quantized channel inversion")?;
    let k = params.k() as f64;
    let budget = check_budget(params, k * grid.entropy_h0(), "noise-level description cost K*H0")?;
    // Levels with positive mass, strongest (smallest noise) first.
    let levels: Vec<(f64, f64)> = grid
        .points()
        .iter()
        .zip(grid.pmf())
        .filter(|(_, &p)| p > 0.0)
        .map(|(&b, &p)| (-b.log2(), k * p))
        .collect();
    if levels.is_empty() {
        return Ok(BoundResult::zero(Scheme::Qci, Method::Quadrature, aux(grid, 0)));
    }
    let mut weighted = 0.0;
    let mut weight = 0.0;
    let mut log2_nu = f64::NAN;
    let mut active = 0;
    for (l, &(log2_rho, w)) in levels.iter().enumerate() {
        weighted += w * log2_rho;
        weight += w;
        log2_nu = (weighted - budget) / weight;
        active = l + 1;
        match levels.get(l + 1) {
            Some(&(next, _)) if next > log2_nu => continue,
            _ => break,
        }
    }
    Ok(finish(params, grid, log2_nu, active, budget))
}

/// QCI lower bound on the `2^bits`-level quantile grid, using the ordered
/// active-set test for equiprobable levels:
/// `log2 nu = (sum_(j<=l) log2 rho_j)/l - J C/(l K) + J B/l` for the first
/// `l` with `rho_(l+1) <= nu`.
pub fn qci_bound_quantile(params: &SystemParams, bits: u32) -> Result<BoundResult> {
    params.require_k_le_m("quantized channel inversion")?;
    let k = params.k() as f64;
    let b = bits as f64;
    if b >= params.c() / k {
        return Err(Error::InsufficientBottleneck(format!(
            "B = {bits} bits needs C > K*B = {} (got C = {})",
            k * b,
            params.c()
        )));
    }
    let grid = noise_quantile_grid(params, bits)?;
    let j = grid.levels() as f64;
    let c = params.c();
    let log2_rho: Vec<f64> = grid.points().iter().map(|&p| -p.log2()).collect();
    let mut sum = 0.0;
    let mut log2_nu = f64::NAN;
    let mut active = 0;
    for l in 1..=log2_rho.len() {
        sum += log2_rho[l - 1];
        let lf = l as f64;
        log2_nu = sum / lf - j * c / (lf * k) + j * b / lf;
        active = l;
        if log2_rho.get(l).is_none_or(|&next| next <= log2_nu) {
            break;
        }
    }
    Ok(finish(params, &grid, log2_nu, active, c - k * b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wishart::noise_grid_pmf;

    #[test]
    fn sentinel_only_grid_gives_zero() {
        let p = SystemParams::from_snr_db(2, 4, 10.0, 10.0).unwrap();
        let g = noise_grid_pmf(&p, &[f64::INFINITY]).unwrap();
        assert_eq!(qci_rate(&p, &g).unwrap().value, 0.0);
    }

    #[test]
    fn single_active_level_allocation() {
        let p = SystemParams::new(2, 2, 1.0, 10.0).unwrap();
        let r = qci_bound_quantile(&p, 1).unwrap();
        let nu = r.water_level.unwrap();
        let Aux::Qci { levels, active_levels, .. } = &r.aux else { panic!() };
        assert_eq!(*active_levels, 1);
        let c1 = (1.0 / (levels[0] * nu)).log2();
        assert!((c1 - 8.0).abs() < 1e-12);
    }

    #[test]
    fn both_solvers_agree() {
        for (k, m, db, c, bits) in [(2, 4, 10.0, 12.0, 2), (1, 3, 0.0, 9.0, 3), (3, 3, 20.0, 40.0, 2)] {
            let p = SystemParams::from_snr_db(k, m, db, c).unwrap();
            let a = qci_bound_quantile(&p, bits).unwrap();
            let g = noise_quantile_grid(&p, bits).unwrap();
            let b = qci_rate(&p, &g).unwrap();
            assert!((a.value - b.value).abs() < 1e-9, "{} vs {}", a.value, b.value);
            assert!(a.residual < 1e-9 && b.residual < 1e-9);
        }
    }

    #[test]
    fn insufficient_link() {
        let p = SystemParams::from_snr_db(2, 4, 10.0, 4.0).unwrap();
        assert!(matches!(qci_bound_quantile(&p, 2), Err(Error::InsufficientBottleneck(_))));
        let q = SystemParams::from_snr_db(4, 2, 10.0, 40.0).unwrap();
        assert!(matches!(qci_bound_quantile(&q, 2), Err(Error::Domain(_))));
    }
}
