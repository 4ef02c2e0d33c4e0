//! Output rows and their CSV/JSON encodings.

use std::io::Write;

use bottleneck_mimo::{BoundResult, Error, Method, SystemParams};
use serde::Serialize;
use serde_json::{Map, Value};

pub const CSV_HEADER: [&str; 11] = [
    "scheme",
    "K",
    "M",
    "rho_db",
    "C_bits",
    "value_bits",
    "aux_json",
    "residual",
    "method",
    "seed",
    "error",
];

/// One output row. Failed cells keep their parameters and carry the error
/// message instead of a value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub scheme: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub rho_db: f64,
    #[serde(rename = "C_bits")]
    pub c_bits: f64,
    pub value_bits: Option<f64>,
    #[serde(rename = "aux_json")]
    pub aux: Value,
    pub residual: Option<f64>,
    pub method: Option<String>,
    pub seed: Option<u64>,
    pub error: Option<String>,
}

impl Record {
    pub fn from_outcome(
        scheme: &str,
        params: &SystemParams,
        outcome: &Result<BoundResult, Error>,
        seed: u64,
    ) -> Self {
        let mut rec = Record {
            scheme: scheme.to_string(),
            k: params.k(),
            m: params.m(),
            rho_db: params.rho_db(),
            c_bits: params.c(),
            value_bits: None,
            aux: Value::Object(Map::new()),
            residual: None,
            method: None,
            seed: None,
            error: None,
        };
        match outcome {
            Ok(r) => {
                let mut aux = match serde_json::to_value(&r.aux) {
                    Ok(Value::Object(map)) => map,
                    _ => Map::new(),
                };
                if let Some(nu) = r.water_level {
                    aux.insert("water_level".into(), float(nu));
                }
                if let Some(se) = r.std_error {
                    aux.insert("std_error".into(), float(se));
                }
                rec.value_bits = Some(r.value);
                rec.aux = Value::Object(aux);
                rec.residual = Some(r.residual);
                rec.method = Some(r.method.as_str().to_string());
                if r.method == Method::MonteCarlo {
                    rec.seed = Some(seed);
                }
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        rec
    }
}

fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Seventeen significant digits, enough to reproduce every `f64` exactly.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_csv<W: Write>(out: W, records: &[Record]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.scheme.clone(),
            r.k.to_string(),
            r.m.to_string(),
            fmt_f64(r.rho_db),
            fmt_f64(r.c_bits),
            opt(r.value_bits),
            r.aux.to_string(),
            opt(r.residual),
            r.method.clone().unwrap_or_default(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(mut out: W, records: &[Record]) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, records)?;
    writeln!(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5e17, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }
}
