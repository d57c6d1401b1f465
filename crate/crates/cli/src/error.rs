use std::path::PathBuf;

use crate::config::Violation;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:{}", list(.0))]
    Config(Vec<Violation>),

    #[error("cannot read {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("numerical failure: {0}")]
    Numerical(#[from] blockade_core::Error),

    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|x| format!("\n  {x}")).collect()
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}
