use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown problem id `{0}`")]
    UnknownProblem(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid geometry: {0}")]
    Geometry(#[source] mdcon::Error),
    #[error("solver failed: {0}")]
    Solver(#[from] mdcon::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// What `error.json` contains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::UnknownProblem(_) => 2,
            HarnessError::Config(_) | HarnessError::Json { .. } => 3,
            HarnessError::Geometry(_) => 4,
            HarnessError::Solver(_) => 5,
            HarnessError::Io { .. } => 6,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::UnknownProblem(_) => "unknown_problem",
            HarnessError::Config(_) => "invalid_config",
            HarnessError::Json { .. } => "invalid_json",
            HarnessError::Geometry(_) => "invalid_geometry",
            HarnessError::Solver(_) => "solver_error",
            HarnessError::Io { .. } => "io_error",
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            kind: self.kind(),
            exit_code: self.exit_code(),
            message: error_chain(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| HarnessError::Io { path, source }
    }
}

fn error_chain(e: &dyn std::error::Error) -> String {
    let mut msg = e.to_string();
    let mut cur = e.source();
    while let Some(s) = cur {
        let part = s.to_string();
        if !msg.contains(&part) {
            msg.push_str(": ");
            msg.push_str(&part);
        }
        cur = s.source();
    }
    msg
}
