use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(2),
            CliError::Solver(_) => ExitCode::from(3),
            CliError::Io { .. } => ExitCode::from(1),
        }
    }
}

impl From<b3fem::Error> for CliError {
    /// Library errors raised while checking a configuration are validation
    /// errors; the runner maps solve errors itself.
    fn from(e: b3fem::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}
