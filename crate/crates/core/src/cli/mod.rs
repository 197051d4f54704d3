//! Config-driven runs: `verify`, `oracle`, `compare` and `slice`, with their on-disk formats.

mod commands;
mod config;
mod io;

#[cfg(feature = "cli")]
mod args;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use commands::{
    export_slice, run_compare, run_oracle, run_verify, CellsFile, CertificatesFile, Metrics, OracleSidecar, ReportsFile,
    SliceSpec, Timings,
};
pub use config::{
    BoundsSection, BoundsSource, OracleSection, Overrides, RcbfSection, Resolution, Resolved, ResolvedConfig, RunConfig,
    VerifierSection,
};
pub use io::{to_sorted_json, write_atomic, write_json};

#[cfg(feature = "cli")]
pub use args::main_with_args;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Verifier(#[from] crate::verifier::VerifierError),
    #[error(transparent)]
    Oracle(#[from] crate::oracle::OracleError),
}

impl CliError {
    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), message: e.to_string() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Format(_) => "format",
            CliError::Verifier(crate::verifier::VerifierError::Config(_)) => "config",
            CliError::Verifier(_) => "verifier",
            CliError::Oracle(crate::oracle::OracleError::Config(_)) => "config",
            CliError::Oracle(_) => "oracle",
        }
    }

    /// 2 for configuration errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.kind() == "config" {
            2
        } else {
            1
        }
    }

    /// One-line JSON error report.
    pub fn to_json(&self) -> String {
        serde_json::json!({"error": {"kind": self.kind(), "message": self.to_string()}}).to_string()
    }
}
