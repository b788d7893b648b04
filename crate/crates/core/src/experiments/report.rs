//! Summary CSV and run manifest.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{SummaryRow, SweepSpec, SweepSummary};
use crate::error::{Error, Result};
use crate::io::fmt_sig10;

pub const SUMMARY_HEADER: [&str; 11] = [
    "sweep_param",
    "sweep_value",
    "estimator",
    "mean",
    "std",
    "runs_ok",
    "xi",
    "xi_admissible",
    "mean_m",
    "mean_c",
    "w0",
];

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig10).unwrap_or_default()
}

pub fn write_summary_csv<W: Write>(summary: &SweepSummary, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in &summary.rows {
        w.write_record([
            r.sweep_param.clone(),
            fmt_sig10(r.sweep_value),
            r.estimator.to_string(),
            fmt_sig10(r.mean),
            fmt_sig10(r.std),
            r.runs_ok.to_string(),
            opt(r.xi),
            r.xi_admissible.to_string(),
            fmt_sig10(r.mean_m),
            opt(r.mean_c),
            fmt_sig10(r.w0),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn summary_csv_string(summary: &SweepSummary) -> Result<String> {
    let mut buf = Vec::new();
    write_summary_csv(summary, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

/// Parses a summary CSV back into rows.
pub fn read_summary_csv<R: Read>(input: R) -> Result<Vec<SummaryRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers != SUMMARY_HEADER {
        return Err(Error::Format(format!("unexpected summary header {headers:?}")));
    }
    let num = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::Format(format!("cannot parse {s:?} as a number")))
    };
    let opt_num = |s: &str| -> Result<Option<f64>> { if s.is_empty() { Ok(None) } else { num(s).map(Some) } };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(SummaryRow {
            sweep_param: rec[0].to_string(),
            sweep_value: num(&rec[1])?,
            estimator: rec[2].parse()?,
            mean: num(&rec[3])?,
            std: num(&rec[4])?,
            runs_ok: rec[5]
                .parse()
                .map_err(|_| Error::Format(format!("bad runs_ok {:?}", &rec[5])))?,
            xi: opt_num(&rec[6])?,
            xi_admissible: rec[7]
                .parse()
                .map_err(|_| Error::Format(format!("bad xi_admissible {:?}", &rec[7])))?,
            mean_m: num(&rec[8])?,
            mean_c: opt_num(&rec[9])?,
            w0: num(&rec[10])?,
        });
    }
    Ok(rows)
}

/// Written next to each summary CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub sweep: SweepSpec,
    pub master_seed: u64,
    pub rows: usize,
    pub summary_file: String,
    pub crate_version: String,
}

impl Manifest {
    pub fn new(sweep: &SweepSpec, summary: &SweepSummary, summary_file: &str) -> Self {
        Self {
            sweep: sweep.clone(),
            master_seed: sweep.fixed.seed,
            rows: summary.rows.len(),
            summary_file: summary_file.to_string(),
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, manifest)?;
    f.write_all(b"\n")?;
    Ok(())
}
