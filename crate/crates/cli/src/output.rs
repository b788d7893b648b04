//! Flat records written as CSV (ten significant digits) or a JSON array.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use mcc_eiv::io::fmt_sig10;
use serde_json::{Map, Value};

use crate::config::Format;

pub type Record = Map<String, Value>;

pub fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::Number(n)) if n.is_f64() => n.as_f64().map(fmt_sig10).unwrap_or_default(),
        Some(Value::Number(n)) => n.to_string(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

fn render(columns: &[String], records: &[Record], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(columns)?;
            for r in records {
                w.write_record(columns.iter().map(|c| cell(r.get(c))))?;
            }
            Ok(w.into_inner().context("flushing CSV")?)
        }
        Format::Json => {
            let mut buf = serde_json::to_vec_pretty(records)?;
            buf.push(b'\n');
            Ok(buf)
        }
    }
}

/// Writes to `path`, or to stdout when it is absent or `-`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => {
            let mut f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            f.write_all(bytes)?;
        }
        _ => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

pub fn write_records(path: Option<&Path>, format: Format, columns: &[String], records: &[Record]) -> Result<()> {
    emit(path, &render(columns, records, format)?)
}
