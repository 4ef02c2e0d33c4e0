//! Named presets writing the data behind each figure as CSV.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use bottleneck_mimo::bounds::{ndt_rate, tci_closed_form_zero_threshold, tci_rate};
use bottleneck_mimo::montecarlo::{mc_entropies, EigenSamples};
use bottleneck_mimo::wishart::noise_quantile_grid;
use bottleneck_mimo::{
    par, run_sweep, Error, McConfig, QuadratureSpec, SchemeSpec, SweepAxis, SweepSpec,
    SystemParams,
};
use serde_json::json;

use crate::args::FiguresArgs;
use crate::commands::mc_config;
use crate::record::{write_csv, Record};
use crate::Failure;

pub struct Preset {
    pub id: &'static str,
    pub title: &'static str,
    pub build: fn(&McConfig) -> Result<Vec<Record>, Error>,
}

pub const PRESETS: [Preset; 14] = [
    Preset { id: "fig02", title: "NDT rate vs distortion, K=M=4, C=40", build: fig02 },
    Preset { id: "fig03", title: "H_joint and H_sum vs M, K=2", build: fig03 },
    Preset { id: "fig04", title: "H_joint and H_sum vs K, B=2", build: fig04 },
    Preset { id: "fig05", title: "TCI rate vs threshold, K=M, C=40", build: fig05 },
    Preset { id: "fig06", title: "TCI rate vs threshold, K=4 < M, C=40", build: fig06 },
    Preset { id: "fig07", title: "Bounds vs SNR, K=M=2, C=40", build: fig07 },
    Preset { id: "fig08", title: "Bounds vs SNR, K=M=4, C=40", build: fig08 },
    Preset { id: "fig09", title: "Bounds vs C, K=M=2, 40 dB", build: fig09 },
    Preset { id: "fig10", title: "Bounds vs C, K=M=4, 40 dB", build: fig10 },
    Preset { id: "fig11", title: "Bounds vs M, K=2, 10 dB, C=40", build: fig11 },
    Preset { id: "fig12", title: "Bounds vs M, K=2, 40 dB, C=40", build: fig12 },
    Preset { id: "fig13", title: "TCI rate and its sandwich vs M, K=4, 10 dB, C=40", build: fig13 },
    Preset { id: "fig14", title: "Bounds vs K=M, 40 dB, C=50", build: fig14 },
    Preset { id: "fig15", title: "Bounds vs K=M, 40 dB, C=8K", build: fig15 },
];

fn five_schemes() -> Vec<SchemeSpec> {
    vec![
        SchemeSpec::Ub,
        SchemeSpec::Ndt { distortion: None },
        SchemeSpec::Qci { bits: 2 },
        SchemeSpec::Tci { lambda_th: None },
        SchemeSpec::Mmse,
    ]
}

fn k_equals_m_schemes() -> Vec<SchemeSpec> {
    vec![
        SchemeSpec::Ub,
        SchemeSpec::Ndt { distortion: None },
        SchemeSpec::Qci { bits: 1 },
        SchemeSpec::Qci { bits: 2 },
        SchemeSpec::Qci { bits: 4 },
        SchemeSpec::Tci { lambda_th: None },
        SchemeSpec::Mmse,
    ]
}

fn range(start: f64, step: f64, stop: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

fn sweep(spec: SweepSpec, mc: &McConfig) -> Result<Vec<Record>, Error> {
    let rows = run_sweep(&spec, mc, &QuadratureSpec::default())?;
    Ok(rows
        .iter()
        .map(|r| Record::from_outcome(r.scheme.scheme().as_str(), &r.params, &r.outcome, mc.seed))
        .collect())
}

fn axis_sweep(
    axis: SweepAxis,
    values: Vec<f64>,
    (k, m, db, c): (usize, usize, f64, f64),
    schemes: Vec<SchemeSpec>,
    mc: &McConfig,
) -> Result<Vec<Record>, Error> {
    let fixed = SystemParams::from_snr_db(k, m, db, c)?;
    sweep(SweepSpec::new(axis, values, fixed, schemes)?, mc)
}

fn fig02(_: &McConfig) -> Result<Vec<Record>, Error> {
    let quad = QuadratureSpec::default();
    let mut cells = Vec::new();
    for db in [10.0, 20.0, 30.0, 40.0] {
        let p = SystemParams::from_snr_db(4, 4, db, 40.0)?;
        for d in range(0.18, 0.02, 1.0) {
            cells.push((p, d));
        }
    }
    Ok(par::map_indexed(cells.len(), |i| {
        let (p, d) = cells[i];
        Record::from_outcome("ndt", &p, &ndt_rate(&p, d, &quad), 0)
    }))
}

fn entropy_records(points: Vec<(SystemParams, u32)>, mc: &McConfig) -> Vec<Record> {
    let per_point = par::map_indexed(points.len(), |i| {
        let (p, bits) = points[i];
        let est = noise_quantile_grid(&p, bits).and_then(|g| mc_entropies(&p, &g, mc, false));
        let base = |name: &str| Record::from_outcome(name, &p, &Err(Error::Domain(String::new())), mc.seed);
        match est {
            Ok(e) => [("h_joint", e.h_joint), ("h_sum", e.h_sum)]
                .into_iter()
                .map(|(name, x)| Record {
                    value_bits: Some(x.mean),
                    aux: json!({
                        "bits": bits,
                        "std_error": x.std_error,
                        "gap": e.gap.mean,
                        "gap_std_error": e.gap.std_error,
                    }),
                    residual: Some(0.0),
                    method: Some("monte_carlo".into()),
                    seed: Some(mc.seed),
                    error: None,
                    ..base(name)
                })
                .collect::<Vec<_>>(),
            Err(err) => ["h_joint", "h_sum"]
                .into_iter()
                .map(|name| Record {
                    aux: json!({ "bits": bits }),
                    error: Some(err.to_string()),
                    ..base(name)
                })
                .collect(),
        }
    });
    per_point.into_iter().flatten().collect()
}

// The quantized noise-level cells do not depend on the SNR or on C; both
// are fixed at nominal values.
fn fig03(mc: &McConfig) -> Result<Vec<Record>, Error> {
    let mut points = Vec::new();
    for bits in [1, 2, 3] {
        for m in 2..=8 {
            points.push((SystemParams::from_snr_db(2, m, 10.0, 40.0)?, bits));
        }
    }
    Ok(entropy_records(points, mc))
}

fn fig04(mc: &McConfig) -> Result<Vec<Record>, Error> {
    let mut points = Vec::new();
    for extra in [0, 2, 4] {
        for k in 1..=4 {
            points.push((SystemParams::from_snr_db(k, k + extra, 10.0, 40.0)?, 2));
        }
    }
    Ok(entropy_records(points, mc))
}

fn threshold_records(configs: &[(usize, usize, f64)], thresholds: &[f64], mc: &McConfig) -> Result<Vec<Record>, Error> {
    let quad = QuadratureSpec::default();
    let mut out = Vec::new();
    for &(k, m, db) in configs {
        let p = SystemParams::from_snr_db(k, m, db, 40.0)?;
        let samples = EigenSamples::draw(&p, mc);
        let rows = par::map_indexed(thresholds.len(), |i| {
            let th = thresholds[i];
            let r = if th == 0.0 {
                tci_closed_form_zero_threshold(&p, &quad)
            } else {
                tci_rate(&p, th, &samples, mc.min_accepted)
            };
            Record::from_outcome("tci", &p, &r, mc.seed)
        });
        out.extend(rows);
    }
    Ok(out)
}

fn fig05(mc: &McConfig) -> Result<Vec<Record>, Error> {
    let configs = [(2, 2, 10.0), (2, 2, 40.0), (4, 4, 10.0), (4, 4, 40.0)];
    threshold_records(&configs, &range(0.02, 0.02, 1.0), mc)
}

fn fig06(mc: &McConfig) -> Result<Vec<Record>, Error> {
    let configs = [(4, 5, 10.0), (4, 5, 40.0), (4, 6, 10.0), (4, 8, 10.0)];
    threshold_records(&configs, &range(0.0, 0.02, 1.0), mc)
}

fn fig07(mc: &McConfig) -> Result<Vec<Record>, Error> {
    axis_sweep(SweepAxis::RhoDb, range(0.0, 2.0, 40.0), (2, 2, 0.0, 40.0), five_schemes(), mc)
}

fn fig08(mc: &McConfig) -> Result<Vec<Record>, Error> {
    axis_sweep(SweepAxis::RhoDb, range(0.0, 2.0, 40.0), (4, 4, 0.0, 40.0), five_schemes(), mc)
}

fn fig09(mc: &McConfig) -> Result<Vec<Record>, Error> {
    axis_sweep(SweepAxis::C, range(5.0, 5.0, 100.0), (2, 2, 40.0, 5.0), five_schemes(), mc)
}

fn fig10(mc: &McConfig) -> Result<Vec<Record>, Error> {
    axis_sweep(SweepAxis::C, range(5.0, 5.0, 100.0), (4, 4, 40.0, 5.0), five_schemes(), mc)
}

fn fig11(mc: &McConfig) -> Result<Vec<Record>, Error> {
    axis_sweep(SweepAxis::M, range(2.0, 1.0, 10.0), (2, 2, 10.0, 40.0), five_schemes(), mc)
}

fn fig12(mc: &McConfig) -> Result<Vec<Record>, Error> {
    axis_sweep(SweepAxis::M, range(2.0, 1.0, 10.0), (2, 2, 40.0, 40.0), five_schemes(), mc)
}

fn fig13(mc: &McConfig) -> Result<Vec<Record>, Error> {
    let schemes = vec![SchemeSpec::Tci { lambda_th: Some(0.0) }];
    axis_sweep(SweepAxis::M, range(5.0, 1.0, 16.0), (4, 5, 10.0, 40.0), schemes, mc)
}

fn fig14(mc: &McConfig) -> Result<Vec<Record>, Error> {
    axis_sweep(SweepAxis::KEqualsM, range(1.0, 1.0, 8.0), (1, 1, 40.0, 50.0), k_equals_m_schemes(), mc)
}

fn fig15(mc: &McConfig) -> Result<Vec<Record>, Error> {
    let fixed = SystemParams::from_snr_db(1, 1, 40.0, 8.0)?;
    let spec = SweepSpec::new(SweepAxis::KEqualsM, range(1.0, 1.0, 8.0), fixed, k_equals_m_schemes())?
        .with_c_per_k(8.0)?;
    sweep(spec, mc)
}

/// Builds every preset and writes `<id>.csv` into `dir`.
pub fn write_all(dir: &Path, mc: &McConfig) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(Failure::io)?;
    for preset in &PRESETS {
        log::info!("{}: {}", preset.id, preset.title);
        let records = (preset.build)(mc)?;
        let path = dir.join(format!("{}.csv", preset.id));
        let file = BufWriter::new(File::create(&path).map_err(Failure::io)?);
        write_csv(file, &records).map_err(|e| Failure::Io(e.to_string()))?;
    }
    Ok(())
}

pub fn cmd_figures(args: &FiguresArgs) -> Result<(), Failure> {
    write_all(&args.output_dir, &mc_config(&args.mc)?)
}
