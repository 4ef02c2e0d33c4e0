//! The `validate` command: internal consistency checks reported as JSON.

use std::fs::File;
use std::io::{self, Write};

use bottleneck_mimo::bounds::{mmse_bound, ndt_bound, qci_bound_quantile, tci_bound, upper_bound};
use bottleneck_mimo::montecarlo::{mc_eig_expect, mc_trunc_stats, EigenSamples};
use bottleneck_mimo::wishart::{eig_cdf_sorted, trunc_prob, EigDensity};
use bottleneck_mimo::{
    capacity, par, run_sweep, Aux, BoundResult, Error, McConfig, QuadratureSpec, SchemeSpec,
    SweepAxis, SweepSpec, SystemParams,
};
use serde::Serialize;

use crate::args::ValidateArgs;
use crate::record::{write_csv, Record};
use crate::Failure;

pub const GRID_DIMS: [usize; 3] = [1, 2, 4];
pub const GRID_SNR_DB: [f64; 4] = [0.0, 10.0, 20.0, 40.0];
pub const GRID_C: [f64; 4] = [8.0, 16.0, 32.0, 48.0];
const QUICK_SAMPLES: usize = 10_000;
const FULL_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, failures: Vec<String>, ok_detail: String) -> Self {
        let passed = failures.is_empty();
        let detail = if passed {
            ok_detail
        } else {
            let shown: Vec<_> = failures.iter().take(5).cloned().collect();
            format!("{} failure(s): {}", failures.len(), shown.join("; "))
        };
        Self { name, passed, detail }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub passed: bool,
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
}

/// Two-sided Kolmogorov-Smirnov statistic of sorted samples against their
/// CDF values.
pub fn ks_statistic(cdf_at_sorted: &[f64]) -> f64 {
    let n = cdf_at_sorted.len() as f64;
    cdf_at_sorted
        .iter()
        .enumerate()
        .map(|(i, &f)| (f - i as f64 / n).max((i + 1) as f64 / n - f))
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// One eigenvalue per draw, the draw's rank chosen round-robin so the pooled
/// sample follows the unordered marginal law. Returned sorted.
pub fn unordered_eigen_sample(params: &SystemParams, cfg: &McConfig) -> Vec<f64> {
    let draws = EigenSamples::draw(params, cfg);
    let t = draws.t();
    let mut xs: Vec<f64> = draws.rows().enumerate().map(|(i, row)| row[i % t]).collect();
    xs.sort_by(f64::total_cmp);
    xs
}

/// All bounds at one grid point.
#[derive(Debug, Clone)]
pub struct GridCell {
    pub params: SystemParams,
    pub ub: Result<BoundResult, Error>,
    pub ndt: Result<BoundResult, Error>,
    pub qci: Result<BoundResult, Error>,
    pub tci: Result<BoundResult, Error>,
    pub mmse: Result<BoundResult, Error>,
}

impl GridCell {
    pub fn lower_bounds(&self) -> [(&'static str, &Result<BoundResult, Error>); 4] {
        [("ndt", &self.ndt), ("qci", &self.qci), ("tci", &self.tci), ("mmse", &self.mmse)]
    }
}

pub fn evaluate_cell(params: SystemParams, mc: &McConfig, quad: &QuadratureSpec) -> GridCell {
    GridCell {
        params,
        ub: upper_bound(&params, quad),
        ndt: ndt_bound(&params, quad),
        qci: qci_bound_quantile(&params, 2),
        tci: tci_bound(&params, None, mc, quad),
        mmse: mmse_bound(&params, quad),
    }
}

/// The K = M x SNR x C dominance grid, evaluated in parallel.
pub fn dominance_grid(mc: &McConfig, quad: &QuadratureSpec) -> Result<Vec<GridCell>, Error> {
    let mut points = Vec::new();
    for &n in &GRID_DIMS {
        for &db in &GRID_SNR_DB {
            for &c in &GRID_C {
                points.push(SystemParams::from_snr_db(n, n, db, c)?);
            }
        }
    }
    Ok(par::map_indexed(points.len(), |i| evaluate_cell(points[i], mc, quad)))
}

fn label(p: &SystemParams) -> String {
    format!("K={} M={} rho={}dB C={}", p.k(), p.m(), p.rho_db(), p.c())
}

fn check_normalization(quad: &QuadratureSpec, tol: f64) -> Check {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for k in 1..=8usize {
        for m in 1..=8usize {
            let d = EigDensity::new(k.min(m), k.max(m), *quad);
            let s = k.max(m) as f64;
            match (d.expect(|_| 1.0, 0.0), d.expect(|x| x, 0.0)) {
                (Ok(mass), Ok(mean)) => {
                    let e_mass = (mass - 1.0).abs();
                    let e_mean = (mean - s).abs() / s;
                    worst = worst.max(e_mass);
                    if e_mass > tol || e_mean > 100.0 * tol {
                        failures.push(format!("K={k} M={m}: mass err {e_mass:.2e}, mean rel err {e_mean:.2e}"));
                    }
                }
                (Err(e), _) | (_, Err(e)) => failures.push(format!("K={k} M={m}: {e}")),
            }
        }
    }
    Check::new("pdf_normalization", failures, format!("64 laws, worst mass error {worst:.2e} (tol {tol:.0e})"))
}

fn check_ks(cfg: &McConfig, quad: &QuadratureSpec) -> Check {
    let mut failures = Vec::new();
    let mut stats = Vec::new();
    for (k, m) in [(1, 1), (2, 2), (2, 4), (4, 4)] {
        let p = SystemParams::new(k, m, 1.0, 1.0).expect("valid dims");
        let xs = unordered_eigen_sample(&p, cfg);
        let d = EigDensity::new(p.t(), p.s(), *quad);
        match eig_cdf_sorted(&d, &xs) {
            Ok(cdf) => {
                let stat = ks_statistic(&cdf);
                let crit = ks_critical_1pct(xs.len());
                stats.push(format!("({k},{m}) D={stat:.4}"));
                if stat > crit {
                    failures.push(format!("K={k} M={m}: D={stat:.4} > {crit:.4}"));
                }
            }
            Err(e) => failures.push(format!("K={k} M={m}: {e}")),
        }
    }
    Check::new("eigenvalue_ks", failures, stats.join(", "))
}

fn check_dominance(grid: &[GridCell]) -> Check {
    let mut failures = Vec::new();
    let mut compared = 0;
    for cell in grid {
        let p = &cell.params;
        let ub = match &cell.ub {
            Ok(r) => r.value,
            Err(e) => {
                failures.push(format!("{} ub: {e}", label(p)));
                continue;
            }
        };
        if ub > p.c() + 1e-9 {
            failures.push(format!("{} ub {ub} exceeds C", label(p)));
        }
        for (name, res) in cell.lower_bounds() {
            match res {
                Ok(r) => {
                    compared += 1;
                    let slack = 1e-6 + 3.0 * r.std_error.unwrap_or(0.0);
                    if r.value > ub + slack {
                        failures.push(format!("{} {name} {} > ub {ub}", label(p), r.value));
                    }
                    if r.value > p.c() + 1e-9 {
                        failures.push(format!("{} {name} {} exceeds C", label(p), r.value));
                    }
                }
                Err(Error::InsufficientBottleneck(_)) => {}
                Err(e) => failures.push(format!("{} {name}: {e}", label(p))),
            }
        }
    }
    Check::new("dominance_grid", failures, format!("{} cells, {compared} lower bounds compared", grid.len()))
}

/// Budget the residual of a result is measured against.
fn budget_of(r: &BoundResult, p: &SystemParams) -> f64 {
    match &r.aux {
        Aux::Ndt { budget_per_dim, .. } => budget_per_dim * p.t() as f64,
        Aux::Qci { bits: Some(b), .. } => p.c() - p.k() as f64 * *b as f64,
        Aux::Qci { entropy_h0, .. } => p.c() - p.k() as f64 * entropy_h0,
        _ => p.c(),
    }
}

fn check_residuals(grid: &[GridCell]) -> Check {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for cell in grid {
        for (name, res) in [("ub", &cell.ub), ("ndt", &cell.ndt), ("qci", &cell.qci)] {
            if let Ok(r) = res {
                let budget = budget_of(r, &cell.params);
                if budget <= 0.0 {
                    continue;
                }
                let rel = r.residual / budget;
                worst = worst.max(rel);
                if !(rel <= 1e-8) {
                    failures.push(format!("{} {name}: relative residual {rel:.2e}", label(&cell.params)));
                }
            }
        }
    }
    Check::new("waterfill_residuals", failures, format!("worst relative residual {worst:.2e}"))
}

fn check_sandwich(grid: &[GridCell]) -> Check {
    let mut failures = Vec::new();
    let mut n = 0;
    for cell in grid {
        if let Ok(BoundResult {
            aux: Aux::Tci { unclamped_rate, r_lower, r_upper, .. },
            ..
        }) = &cell.tci
        {
            n += 1;
            let tol = 1e-12 * r_upper.abs().max(1.0);
            if !(*r_lower <= unclamped_rate + tol && *unclamped_rate <= r_upper + tol) {
                failures.push(format!(
                    "{}: {r_lower} <= {unclamped_rate} <= {r_upper} violated",
                    label(&cell.params)
                ));
            }
        }
    }
    Check::new("tci_sandwich", failures, format!("{n} TCI values bracketed"))
}

fn check_mc_vs_quadrature(cfg: &McConfig, quad: &QuadratureSpec) -> Check {
    let mut failures = Vec::new();
    for (k, m, db) in [(1, 1, 10.0), (2, 2, 10.0), (2, 4, 0.0), (4, 4, 20.0), (3, 2, 10.0)] {
        let p = SystemParams::from_snr_db(k, m, db, 8.0).expect("valid point");
        let rho = p.rho();
        let est = mc_eig_expect(&p, move |l| (rho * l).ln_1p() / std::f64::consts::LN_2, cfg);
        match capacity(&p, quad) {
            Ok(cap) => {
                let exact = cap / p.t() as f64;
                if (est.mean - exact).abs() > 3.0 * est.std_error {
                    failures.push(format!(
                        "{}: MC {} +- {} vs quadrature {exact}",
                        label(&p),
                        est.mean,
                        est.std_error
                    ));
                }
            }
            Err(e) => failures.push(format!("{}: {e}", label(&p))),
        }
    }
    for (k, m, th) in [(1, 3, 2.0), (2, 2, 0.1), (2, 4, 0.5), (4, 4, 0.05)] {
        let p = SystemParams::new(k, m, 1.0, 8.0).expect("valid point");
        match (trunc_prob(&p, th), mc_trunc_stats(&p, th, cfg)) {
            (Ok(exact), Ok(s)) => {
                let se = s.std_errors.map_or(0.0, |e| e.p_th);
                if (s.p_th - exact).abs() > 3.0 * se {
                    failures.push(format!("P_th K={k} M={m} th={th}: MC {} +- {se} vs {exact}", s.p_th));
                }
            }
            (Err(e), _) | (_, Err(e)) => failures.push(format!("P_th K={k} M={m} th={th}: {e}")),
        }
    }
    Check::new("mc_vs_quadrature", failures, "ergodic rates and truncation probabilities within 3 sigma".into())
}

/// Renders a small fixed sweep to CSV bytes.
pub fn replay_sweep(cfg: &McConfig) -> Result<Vec<u8>, Error> {
    let fixed = SystemParams::from_snr_db(2, 2, 10.0, 40.0)?;
    let schemes = vec![
        SchemeSpec::Ub,
        SchemeSpec::Ndt { distortion: None },
        SchemeSpec::Qci { bits: 2 },
        SchemeSpec::Tci { lambda_th: None },
        SchemeSpec::Mmse,
    ];
    let spec = SweepSpec::new(SweepAxis::RhoDb, vec![0.0, 20.0, 40.0], fixed, schemes)?;
    let rows = run_sweep(&spec, cfg, &QuadratureSpec::default())?;
    let records: Vec<Record> = rows
        .iter()
        .map(|r| Record::from_outcome(r.scheme.scheme().as_str(), &r.params, &r.outcome, cfg.seed))
        .collect();
    let mut out = Vec::new();
    write_csv(&mut out, &records).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(out)
}

fn check_determinism(cfg: &McConfig) -> Check {
    let failures = match (replay_sweep(cfg), replay_sweep(cfg)) {
        (Ok(a), Ok(b)) if a == b => vec![],
        (Ok(_), Ok(_)) => vec!["replayed sweep output differs".to_string()],
        (Err(e), _) | (_, Err(e)) => vec![e.to_string()],
    };
    Check::new("determinism_replay", failures, "sweep replay byte-identical".into())
}

pub fn run_checks(samples: usize, rel_tol: f64, seed: u64) -> Result<Report, Error> {
    let cfg = McConfig::new(samples, seed)?;
    let quad = QuadratureSpec::default();
    let grid = dominance_grid(&cfg, &quad)?;
    let checks = vec![
        check_normalization(&quad, rel_tol),
        check_ks(&cfg, &quad),
        check_dominance(&grid),
        check_residuals(&grid),
        check_sandwich(&grid),
        check_mc_vs_quadrature(&cfg, &quad),
        check_determinism(&cfg),
    ];
    Ok(Report {
        passed: checks.iter().all(|c| c.passed),
        samples,
        seed,
        checks,
    })
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<(), Failure> {
    let samples = if args.quick { QUICK_SAMPLES } else { FULL_SAMPLES };
    let report = run_checks(samples, args.rel_tol, args.seed)?;
    let mut sink: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(File::create(path).map_err(Failure::io)?),
        None => Box::new(io::stdout().lock()),
    };
    serde_json::to_writer_pretty(&mut sink, &report).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(sink).map_err(Failure::io)?;
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(Failure::ChecksFailed(failed));
    }
    Ok(())
}
