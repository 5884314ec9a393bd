//! Experiment runner: parses a spec, dispatches to the simulators and
//! renders a JSON or table report.

mod experiments;
mod report;
mod spec;

pub use experiments::run;
pub use report::{render_json, render_table, ExperimentResult};
pub use spec::{parse_complex, parse_config, Experiment, ExperimentSpec, Params};

/// Failures surfaced to the command line.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Internal(_) => "internal",
        }
    }

    /// Machine-readable error object.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind(), "message": self.to_string() } }).to_string()
    }
}

impl From<beamsplit::Error> for CliError {
    fn from(e: beamsplit::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
