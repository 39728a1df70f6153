use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] qphase_core::Error),

    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    /// 1 for bad input, 2 when a numerical guard or an oracle check fails.
    pub fn exit_code(&self) -> u8 {
        use qphase_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Parse { .. } | CliError::Io { .. } => 1,
            CliError::CheckFailed(_) => 2,
            CliError::Core(e) => match e {
                E::DimensionMismatch { .. }
                | E::DimensionTooSmall(_)
                | E::NotNormalizable
                | E::NotHermitian { .. }
                | E::InvalidParameter { .. }
                | E::IncompatibleGrids(_) => 1,
                E::NotDensityMatrix(_)
                | E::DegenerateSpectrum(..)
                | E::EffectiveSampleSize { .. }
                | E::SparseShell { .. }
                | E::ChartSingularity(_)
                | E::NoConvergence => 2,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
