//! Dataset files.
//!
//! Scalar datasets are written as `i,x,u,v,x_obs,d`; vector datasets as
//! `i,d,v,x_obs_0..x_obs_{p-1},u_0..u_{p-1},x_0..x_{p-1}`. Ground-truth
//! columns may be left empty for externally observed data. Floats are written
//! with 17 significant digits so a file round-trips bit-exactly. Generation
//! settings live in a JSON sidecar next to the CSV.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ScalarEivDataset, VectorEivDataset};

pub const SCALAR_HEADER: [&str; 6] = ["i", "x", "u", "v", "x_obs", "d"];

pub fn fmt_exact(x: f64) -> String {
    format!("{x:.16e}")
}

/// Ten significant digits, used by the summary and result records.
pub fn fmt_sig10(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.9e}")
    } else {
        x.to_string()
    }
}

fn opt(col: &Option<Vec<f64>>, i: usize) -> String {
    col.as_ref().map(|c| fmt_exact(c[i])).unwrap_or_default()
}

pub fn write_scalar_csv<W: Write>(ds: &ScalarEivDataset, out: W) -> Result<()> {
    ds.validate()?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCALAR_HEADER)?;
    for i in 0..ds.len() {
        w.write_record([
            i.to_string(),
            opt(&ds.x, i),
            opt(&ds.u, i),
            opt(&ds.v, i),
            fmt_exact(ds.x_obs[i]),
            fmt_exact(ds.d[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn vector_header(p: usize) -> Vec<String> {
    let mut h = vec!["i".to_string(), "d".to_string(), "v".to_string()];
    for prefix in ["x_obs", "u", "x"] {
        h.extend((0..p).map(|k| format!("{prefix}_{k}")));
    }
    h
}

pub fn write_vector_csv<W: Write>(ds: &VectorEivDataset, out: W) -> Result<()> {
    let p = ds.p;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(vector_header(p))?;
    for i in 0..ds.len() {
        let mut rec = vec![i.to_string(), fmt_exact(ds.d[i]), opt(&ds.v, i)];
        rec.extend(ds.row(i).iter().map(|x| fmt_exact(*x)));
        for col in [&ds.u, &ds.x] {
            match col {
                Some(c) => rec.extend(c[i * p..(i + 1) * p].iter().map(|x| fmt_exact(*x))),
                None => rec.extend(std::iter::repeat_n(String::new(), p)),
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub enum LoadedDataset {
    Scalar(ScalarEivDataset),
    Vector(VectorEivDataset),
}

impl LoadedDataset {
    pub fn as_dataset(&self) -> &dyn crate::model::EivDataset {
        match self {
            LoadedDataset::Scalar(d) => d,
            LoadedDataset::Vector(d) => d,
        }
    }
}

fn parse_cell(s: &str, row: usize, col: &str) -> Result<Option<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Format(format!("row {row}, column {col}: cannot parse {s:?}")))
}

/// Collects an optional column: all cells present, or all empty.
fn collect_optional(cells: Vec<Option<f64>>, name: &str) -> Result<Option<Vec<f64>>> {
    let present = cells.iter().filter(|c| c.is_some()).count();
    if present == 0 {
        Ok(None)
    } else if present == cells.len() {
        Ok(Some(cells.into_iter().flatten().collect()))
    } else {
        Err(Error::Format(format!("column {name} is only partially filled")))
    }
}

pub fn read_dataset_csv<R: Read>(input: R) -> Result<LoadedDataset> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let records: Vec<csv::StringRecord> = rdr.records().collect::<std::result::Result<_, _>>()?;
    if records.is_empty() {
        return Err(Error::Format("dataset has no rows".into()));
    }
    let column = |idx: Option<usize>, name: &str| -> Result<Vec<Option<f64>>> {
        records
            .iter()
            .enumerate()
            .map(|(r, rec)| match idx {
                Some(j) => parse_cell(rec.get(j).unwrap_or(""), r, name),
                None => Ok(None),
            })
            .collect()
    };
    let required = |name: &str| -> Result<Vec<f64>> {
        let idx = col(name).ok_or_else(|| Error::Format(format!("missing column {name}")))?;
        column(Some(idx), name)?
            .into_iter()
            .enumerate()
            .map(|(r, v)| v.ok_or_else(|| Error::Format(format!("row {r}: empty {name}"))))
            .collect()
    };

    let d = required("d")?;
    if col("x_obs").is_some() {
        let ds = ScalarEivDataset {
            x: collect_optional(column(col("x"), "x")?, "x")?,
            u: collect_optional(column(col("u"), "u")?, "u")?,
            v: collect_optional(column(col("v"), "v")?, "v")?,
            x_obs: required("x_obs")?,
            d,
            w0: None,
        };
        ds.validate()?;
        return Ok(LoadedDataset::Scalar(ds));
    }

    let p = headers.iter().filter(|h| h.starts_with("x_obs_")).count();
    if p == 0 {
        return Err(Error::Format("no x_obs or x_obs_k columns".into()));
    }
    let n = d.len();
    let mut x_obs = vec![0.0; n * p];
    let mut u = vec![None; n * p];
    let mut x = vec![None; n * p];
    for k in 0..p {
        let xo = required(&format!("x_obs_{k}"))?;
        let uk = column(col(&format!("u_{k}")), "u")?;
        let xk = column(col(&format!("x_{k}")), "x")?;
        for i in 0..n {
            x_obs[i * p + k] = xo[i];
            u[i * p + k] = uk[i];
            x[i * p + k] = xk[i];
        }
    }
    let mut ds = VectorEivDataset::observed(x_obs, d, p)?;
    ds.u = collect_optional(u, "u")?;
    ds.x = collect_optional(x, "x")?;
    ds.v = collect_optional(column(col("v"), "v")?, "v")?;
    Ok(LoadedDataset::Vector(ds))
}

/// Sidecar describing how a dataset was generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub scenario: String,
    pub n: usize,
    pub p: usize,
    pub w0: Vec<f64>,
    pub seed: u64,
    /// Generation settings as given on the command line or config file.
    #[serde(default)]
    pub settings: serde_json::Map<String, serde_json::Value>,
}

pub fn metadata_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

pub fn write_metadata(path: &Path, meta: &DatasetMetadata) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, meta)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_metadata(path: &Path) -> Result<DatasetMetadata> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

/// Reads a dataset and, if a sidecar exists, attaches the true parameters.
pub fn load_dataset(path: &Path) -> Result<(LoadedDataset, Option<DatasetMetadata>)> {
    let mut ds = read_dataset_csv(File::open(path)?)?;
    let meta_path = metadata_path(path);
    let meta = if meta_path.exists() {
        Some(read_metadata(&meta_path)?)
    } else {
        None
    };
    if let Some(m) = &meta {
        match &mut ds {
            LoadedDataset::Scalar(s) if m.w0.len() == 1 => s.w0 = Some(m.w0[0]),
            LoadedDataset::Vector(v) if m.w0.len() == v.p => v.w0 = Some(m.w0.clone()),
            _ => {
                return Err(Error::Format(format!(
                    "metadata w0 has {} entries, incompatible with the dataset",
                    m.w0.len()
                )))
            }
        }
    }
    Ok((ds, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn scalar_csv_round_trips(seed in any::<u64>(), n in 1usize..50) {
            let spec = GaussianMixtureSpec::new(0.2, 7.0, 0.3).unwrap();
            let mut ds = generate_scalar_dataset(-1.7, &InputSampler::default(), &spec, &spec, n, seed).unwrap();
            let mut buf = Vec::new();
            write_scalar_csv(&ds, &mut buf).unwrap();
            let back = read_dataset_csv(buf.as_slice()).unwrap();
            ds.w0 = None;
            prop_assert_eq!(back, LoadedDataset::Scalar(ds));
        }
    }

    #[test]
    fn vector_csv_round_trips() {
        let spec = GaussianMixtureSpec::new(0.3, 5.0, 0.01).unwrap();
        let mut ds = generate_fir_dataset(&fir_reference_weights(), 40, 1.0, &spec, &spec, NoisePlacement::RowEvent, 3).unwrap();
        let mut buf = Vec::new();
        write_vector_csv(&ds, &mut buf).unwrap();
        let back = read_dataset_csv(buf.as_slice()).unwrap();
        ds.w0 = None;
        assert_eq!(back, LoadedDataset::Vector(ds));
    }

    #[test]
    fn observed_only_scalar_file() {
        let text = "i,x,u,v,x_obs,d\n0,,,,1.0,3.0\n1,,,,2.0,6.5\n";
        match read_dataset_csv(text.as_bytes()).unwrap() {
            LoadedDataset::Scalar(s) => {
                assert!(s.x.is_none() && s.u.is_none() && s.v.is_none());
                assert_eq!(s.x_obs, vec![1.0, 2.0]);
                assert_eq!(s.d, vec![3.0, 6.5]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(read_dataset_csv("i,x_obs,d\n0,abc,1\n".as_bytes()).is_err());
        assert!(read_dataset_csv("i,x_obs\n0,1\n".as_bytes()).is_err());
        assert!(read_dataset_csv("i,x_obs,d\n".as_bytes()).is_err());
        assert!(read_dataset_csv("i,x,u,v,x_obs,d\n0,1,,,1,1\n1,,,,1,1\n".as_bytes()).is_err());
    }

    #[test]
    fn sidecar_round_trip_attaches_w0() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let q = GaussianMixtureSpec::silent();
        let ds = generate_scalar_dataset(3.0, &InputSampler::default(), &q, &q, 5, 1).unwrap();
        write_scalar_csv(&ds, File::create(&path).unwrap()).unwrap();
        let meta = DatasetMetadata {
            scenario: "scalar".into(),
            n: 5,
            p: 1,
            w0: vec![3.0],
            seed: 1,
            settings: Default::default(),
        };
        write_metadata(&metadata_path(&path), &meta).unwrap();
        assert_eq!(metadata_path(&path), dir.path().join("data.meta.json"));
        let (loaded, m) = load_dataset(&path).unwrap();
        assert_eq!(m.unwrap(), meta);
        assert_eq!(loaded, LoadedDataset::Scalar(ds));
    }
}
