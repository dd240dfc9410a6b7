//! Result rows and their CSV and JSON encodings.
//!
//! CSV columns, in order: `scenario_id, L, condition, p_miss, ci_lo, ci_hi,
//! lemma1_bound, ldp_approx, trials, seed`. Missing bounds are empty fields.
//! JSON output is `{"schema_version": 1, "rows": [...]}` with the same field
//! names and `null` for missing bounds.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

pub const RESULTS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario_id: String,
    #[serde(rename = "L")]
    pub l: usize,
    /// SNR setting or codebook label.
    pub condition: String,
    /// Estimated miss probability (false-alarm rate for calibration rows).
    pub p_miss: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub lemma1_bound: Option<f64>,
    pub ldp_approx: Option<f64>,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(SimError::config(format!("unknown format `{s}` (csv or json)"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResultsFile {
    schema_version: u32,
    rows: Vec<ResultRow>,
}

pub fn to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| SimError::Format {
            what: "CSV output",
            detail: e.to_string(),
        })?;
    }
    let bytes = w.into_inner().map_err(|e| SimError::Format {
        what: "CSV output",
        detail: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub fn from_csv(text: &str) -> Result<Vec<ResultRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<ResultRow>, _>>()
        .map_err(|e| SimError::Format {
            what: "results CSV",
            detail: e.to_string(),
        })
}

pub fn to_json(rows: &[ResultRow]) -> String {
    let file = ResultsFile {
        schema_version: RESULTS_SCHEMA_VERSION,
        rows: rows.to_vec(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("rows serialize");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<Vec<ResultRow>> {
    let f: ResultsFile = serde_json::from_str(text).map_err(|e| SimError::Format {
        what: "results JSON",
        detail: e.to_string(),
    })?;
    if f.schema_version != RESULTS_SCHEMA_VERSION {
        return Err(SimError::Format {
            what: "results JSON",
            detail: format!("unsupported schema_version {}", f.schema_version),
        });
    }
    Ok(f.rows)
}

pub fn render(rows: &[ResultRow], format: Format) -> Result<String> {
    if rows.is_empty() {
        return Err(SimError::config("no result rows to write"));
    }
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => Ok(to_json(rows)),
    }
}

/// Write rows to `path`, or to stdout when `path` is `None`.
pub fn emit_results(rows: &[ResultRow], format: Format, path: Option<&Path>) -> Result<()> {
    let text = render(rows, format)?;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| SimError::io(p, e)),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| SimError::io("<stdout>", e)),
    }
}
