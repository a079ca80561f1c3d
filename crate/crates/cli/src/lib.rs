//! Pipeline driver behind the `ahis` binary: reads a polynomial, runs the
//! analysis stages face by face and writes JSON and CSV reports.

pub mod config;
pub mod pipeline;
pub mod report;

use std::path::PathBuf;

pub use config::{AnalysisConfig, Stages, TimeWindow};
pub use pipeline::run_pipeline;
pub use report::{
    emit_csv, emit_json, AnalysisReport, BranchRecord, ExponentRow, FaceRecord, StageStatus, Status,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot parse input: {0}")]
    Parse(#[from] ahis_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot encode report: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse(_) => 2,
            CliError::Io { .. } | CliError::Json(_) => 4,
        }
    }
}

/// Exit status for a finished run: 0, or 3 when an enabled stage failed.
pub fn exit_code(report: &AnalysisReport) -> i32 {
    if report.failed() {
        3
    } else {
        0
    }
}
