//! Summary and CSV artifacts.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::experiment::Outcome;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub input_digest: String,
    pub tool_version: String,
    pub wall_time_s: f64,
    pub results: Value,
}

/// SHA-256 of the configuration re-serialized with sorted keys and no
/// whitespace, so formatting and key order do not change the digest.
pub fn input_digest(config: &Value) -> String {
    let canonical = serde_json::to_string(config).expect("JSON values always serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub fn render_csv(outcome: &Outcome) -> String {
    let mut out = outcome.header.join(",");
    out.push('\n');
    for row in &outcome.rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes the CSV (if any) and `summary.json` into `dir`, creating it.
pub fn write_outcome(dir: &Path, outcome: &Outcome, summary: &Summary) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    if let Some(name) = &outcome.csv_name {
        let path = dir.join(name);
        fs::write(&path, render_csv(outcome)).map_err(|e| io(&path, e))?;
    }
    let path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(summary)
        .map_err(|e| CliError::Io(format!("summary serialization: {e}")))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| io(&path, e))
}
