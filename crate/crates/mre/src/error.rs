use std::path::PathBuf;

/// Failures of the command-line layer, each mapped to an exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Library(#[from] mre_core::Error),
    #[error("tolerance check failed: {0}")]
    Tolerance(String),
}

impl CliError {
    /// 1 for a failed tolerance, 2 for bad input, 3 for a numerical failure.
    pub fn exit_code(&self) -> i32 {
        use mre_core::Error as E;
        match self {
            Self::Tolerance(_) => 1,
            Self::Config(_) | Self::Parse { .. } | Self::Io { .. } => 2,
            Self::Library(e) => match e {
                E::NonHermitianInput(_)
                | E::DimensionMismatch(..)
                | E::MalformedMatrix { .. }
                | E::InvalidRank { .. }
                | E::InvalidBlockRanks { .. }
                | E::InvalidState(_)
                | E::InvalidDecomposition(_)
                | E::InvalidBlockIndex { .. }
                | E::LengthMismatch(..)
                | E::NotNormalized(_)
                | E::NegativeProbability(_)
                | E::InvalidLikelihood(_)
                | E::InvalidPartition(_) => 2,
                _ => 3,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
