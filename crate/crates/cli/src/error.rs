use thiserror::Error;

/// Harness failures, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<qbath::Error> for CliError {
    fn from(e: qbath::Error) -> Self {
        use qbath::Error as E;
        let msg = e.to_string();
        match e {
            E::Io(_) | E::Format(_) => CliError::Io(msg),
            E::ImaginaryResidue(_)
            | E::Numerical(_)
            | E::ZeroProbability { .. }
            | E::RankDeficient { .. }
            | E::GridTooCoarse(_)
            | E::NotHermitian { .. } => CliError::Numerical(msg),
            _ => CliError::Config(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
