use std::fs::File;
use std::io::{self, BufWriter, Write};

use bottleneck_mimo::{
    evaluate, run_sweep, Error, McConfig, QuadratureSpec, SchemeSpec, SweepAxis, SweepSpec,
    SystemParams,
};

use crate::args::{Axis, BoundArgs, Format, McArgs, OutputArgs, PointArgs, SchemeOptions, SweepArgs};
use crate::record::{write_csv, write_json, Record};
use crate::Failure;

pub const DEFAULT_BITS: u32 = 2;

/// Parses a comma list such as `ub,ndt,qci:2,tci,mmse,capacity`, filling in
/// per-scheme options. Options naming a scheme absent from the list are
/// rejected.
pub fn parse_schemes(list: &str, opts: &SchemeOptions) -> Result<Vec<SchemeSpec>, Error> {
    let mut out = Vec::new();
    for entry in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, arg) = match entry.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (entry, None),
        };
        let spec = match (name.to_ascii_lowercase().as_str(), arg) {
            ("ub", None) => SchemeSpec::Ub,
            ("mmse", None) => SchemeSpec::Mmse,
            ("capacity", None) => SchemeSpec::Capacity,
            ("ndt", None) => SchemeSpec::Ndt { distortion: opts.distortion },
            ("tci", None) => SchemeSpec::Tci { lambda_th: opts.lambda_th },
            ("qci", None) => SchemeSpec::Qci { bits: opts.bits.unwrap_or(DEFAULT_BITS) },
            ("qci", Some(b)) => SchemeSpec::Qci {
                bits: b.parse().map_err(|_| {
                    Error::InvalidParams(format!("bad bit count in scheme entry `{entry}`"))
                })?,
            },
            _ => return Err(Error::InvalidParams(format!("unknown scheme `{entry}`"))),
        };
        out.push(spec);
    }
    if out.is_empty() {
        return Err(Error::InvalidParams("no scheme given".into()));
    }
    let has = |f: fn(&SchemeSpec) -> bool| out.iter().any(f);
    if opts.bits.is_some() && !has(|s| matches!(s, SchemeSpec::Qci { .. })) {
        return Err(Error::InvalidParams("--bits only applies to qci".into()));
    }
    if opts.lambda_th.is_some() && !has(|s| matches!(s, SchemeSpec::Tci { .. })) {
        return Err(Error::InvalidParams("--lambda-th only applies to tci".into()));
    }
    if opts.distortion.is_some() && !has(|s| matches!(s, SchemeSpec::Ndt { .. })) {
        return Err(Error::InvalidParams("--distortion only applies to ndt".into()));
    }
    Ok(out)
}

/// Parses `a,b,c` or `start:step:stop` (inclusive).
pub fn parse_values(s: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::InvalidParams(format!("cannot parse sweep values `{s}`"));
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::InvalidParams("sweep has no values".into()));
    }
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let nums = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        let (start, step, stop) = (nums[0], nums[1], nums[2]);
        if !(step != 0.0 && step.is_finite() && (stop - start) / step >= 0.0) {
            return Err(bad());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| start + i as f64 * step).collect());
    }
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

pub fn mc_config(mc: &McArgs) -> Result<McConfig, Error> {
    McConfig::new(mc.samples, mc.seed)
}

fn point(p: &PointArgs) -> Result<SystemParams, Error> {
    SystemParams::from_snr_db(p.k, p.m, p.snr_db, p.c)
}

pub fn emit(records: &[Record], out: &OutputArgs) -> Result<(), Failure> {
    let sink: Box<dyn Write> = match &out.output {
        Some(path) => Box::new(File::create(path).map_err(Failure::io)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match out.format {
        Format::Csv => write_csv(&mut sink, records).map_err(|e| Failure::Io(e.to_string()))?,
        Format::Json => write_json(&mut sink, records).map_err(Failure::io)?,
    }
    sink.flush().map_err(Failure::io)
}

pub fn cmd_bound(args: &BoundArgs) -> Result<(), Failure> {
    let schemes = parse_schemes(&args.scheme, &args.options)?;
    let [scheme] = schemes[..] else {
        return Err(Error::InvalidParams("bound takes exactly one scheme".into()).into());
    };
    let params = point(&args.point)?;
    let mc = mc_config(&args.mc)?;
    let outcome = evaluate(&params, &scheme, &mc, &QuadratureSpec::default());
    if let Err(e) = outcome {
        return Err(e.into());
    }
    let rec = Record::from_outcome(scheme.scheme().as_str(), &params, &outcome, mc.seed);
    emit(&[rec], &args.out)
}

pub fn sweep_records(args: &SweepArgs) -> Result<Vec<Record>, Error> {
    let schemes = parse_schemes(&args.scheme, &args.options)?;
    let values = parse_values(&args.values)?;
    let axis = match args.axis {
        Axis::C => SweepAxis::C,
        Axis::RhoDb => SweepAxis::RhoDb,
        Axis::M => SweepAxis::M,
        Axis::KEqualsM => SweepAxis::KEqualsM,
    };
    let mut spec = SweepSpec::new(axis, values, point(&args.point)?, schemes)?;
    if let Some(per_k) = args.c_per_k {
        if axis != SweepAxis::KEqualsM {
            return Err(Error::InvalidParams("--c-per-k only applies to --axis k-equals-m".into()));
        }
        spec = spec.with_c_per_k(per_k)?;
    }
    let mc = mc_config(&args.mc)?;
    let rows = run_sweep(&spec, &mc, &QuadratureSpec::default())?;
    Ok(rows
        .iter()
        .map(|r| Record::from_outcome(r.scheme.scheme().as_str(), &r.params, &r.outcome, mc.seed))
        .collect())
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let records = sweep_records(args)?;
    for r in records.iter().filter(|r| r.error.is_some()) {
        log::warn!(
            "{} at K={} M={} rho={} dB C={}: {}",
            r.scheme,
            r.k,
            r.m,
            r.rho_db,
            r.c_bits,
            r.error.as_deref().unwrap_or("")
        );
    }
    emit(&records, &args.out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn none() -> SchemeOptions {
        SchemeOptions {
            bits: None,
            lambda_th: None,
            distortion: None,
        }
    }

    #[test]
    fn scheme_lists() {
        let s = parse_schemes("ub, qci:3,tci,capacity", &none()).unwrap();
        assert_eq!(
            s,
            vec![
                SchemeSpec::Ub,
                SchemeSpec::Qci { bits: 3 },
                SchemeSpec::Tci { lambda_th: None },
                SchemeSpec::Capacity
            ]
        );
        let opts = SchemeOptions { bits: Some(1), ..none() };
        assert_eq!(parse_schemes("qci", &opts).unwrap(), vec![SchemeSpec::Qci { bits: 1 }]);
        assert!(parse_schemes("ub", &opts).is_err());
        assert!(parse_schemes("foo", &none()).is_err());
        assert!(parse_schemes("", &none()).is_err());
    }

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("1, 2,4").unwrap(), vec![1.0, 2.0, 4.0]);
        assert_eq!(parse_values("0:10:40").unwrap(), vec![0.0, 10.0, 20.0, 30.0, 40.0]);
        assert_eq!(parse_values("0:0.1:0.3").unwrap().len(), 4);
        assert!(parse_values("").is_err());
        assert!(parse_values("0:-1:4").is_err());
        assert!(parse_values("a,b").is_err());
    }
}
