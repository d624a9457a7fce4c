//! File formats: market and scenario descriptions (JSON, schema version 1),
//! trace and report tables (CSV).
//!
//! Floats in CSV output are written as `{:.16e}`, which keeps 17 significant
//! digits and re-parses to the same bits.

mod market_file;
mod report;
mod scenario_file;
mod trace_csv;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use market_file::{market_from_str, market_to_string, BuyerRecord, MarketFile, UtilityRecord};
pub use report::{
    report_to_csv, write_report_csv, write_summary_json, CheckerSummary, ReportSummary,
};
pub use scenario_file::{scenario_from_str, scenario_to_string, ScenarioFile, TimingRecord};
pub use trace_csv::{
    infer_lambda, parse_trace_events, read_trace_csv, trace_from_csv, trace_to_csv,
    write_trace_csv, TRACE_COLUMNS,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Problem with the contents of a file, independent of where it came from.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema_version: expected {SCHEMA_VERSION}, got {0}")]
    Version(u32),
    /// A well-formed file whose values are rejected; `path` names the field.
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Os {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
}

pub(crate) fn read_to_string(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Os {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_string(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|source| IoError::Os {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn with_path<T>(path: &Path, r: Result<T, FormatError>) -> Result<T, IoError> {
    r.map_err(|source| IoError::Format {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_market(path: &Path) -> Result<crate::market::MarketInstance<f64>, IoError> {
    with_path(path, market_from_str(&read_to_string(path)?))
}

pub fn write_market(
    path: &Path,
    market: &crate::market::MarketInstance<f64>,
) -> Result<(), IoError> {
    write_string(path, &market_to_string(market))
}

pub fn load_scenario(path: &Path) -> Result<ScenarioFile, IoError> {
    with_path(path, scenario_from_str(&read_to_string(path)?))
}

pub fn write_scenario(path: &Path, scenario: &ScenarioFile) -> Result<(), IoError> {
    write_string(path, &scenario_to_string(scenario))
}
