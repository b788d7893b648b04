//! Flat JSON config files. Keys mirror the long flag names; `snake_case`
//! spellings are accepted. Values given on the command line win.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const DEFAULT_SEED: u64 = 0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Options shared by every command after merging flags and file.
#[derive(Clone, Debug)]
pub struct Common {
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

pub fn load(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let value: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let Value::Object(map) = value else {
        bail!("config {} must hold a JSON object", path.display());
    };
    Ok(map.into_iter().map(|(k, v)| (k.replace('_', "-"), v)).collect())
}

fn take<T: DeserializeOwned>(file: &mut Map<String, Value>, key: &str) -> Result<Option<T>> {
    match file.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v)
            .map(Some)
            .with_context(|| format!("config key {key:?}")),
    }
}

/// Pulls the shared keys out of `file`; the flags take precedence.
pub fn common(
    file: &mut Map<String, Value>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    format: Option<Format>,
    threads: Option<usize>,
) -> Result<Common> {
    let file_seed = take(file, "seed")?;
    let file_output = take(file, "output")?;
    let file_format = take(file, "format")?;
    let file_threads = take(file, "threads")?;
    Ok(Common {
        seed: seed.or(file_seed).unwrap_or(DEFAULT_SEED),
        output: output.or(file_output),
        format: format.or(file_format).unwrap_or_default(),
        threads: threads.or(file_threads),
    })
}

/// Overlays the flags that were given onto the file values.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, file: Map<String, Value>) -> Result<T> {
    let mut merged = file;
    if let Value::Object(given) = serde_json::to_value(flags)? {
        for (k, v) in given {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).context("config file")
}
