pub mod bound;
pub mod estimate;
pub mod generate;
pub mod sweep;
pub mod verify;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;

/// Parses a kebab-case enum name through its serde representation.
pub fn parse_name<T: DeserializeOwned>(what: &str, s: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).with_context(|| format!("unknown {what} {s:?}"))
}
