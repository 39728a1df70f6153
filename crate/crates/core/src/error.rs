use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state space dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("state vector has zero or non-finite norm")]
    NotNormalizable,

    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not a valid density matrix: {0}")]
    NotDensityMatrix(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "spectrum is degenerate (levels {0} and {1} coincide); use the Monte Carlo estimators"
    )]
    DegenerateSpectrum(usize, usize),

    #[error(
        "effective sample size {ess:.1} is below the floor of {floor}; \
         increase `samples` or reduce |beta|"
    )]
    EffectiveSampleSize { ess: f64, floor: f64 },

    #[error(
        "only {hits} samples landed in the energy shell (need {floor}); \
         widen the shell or increase `samples`"
    )]
    SparseShell { hits: usize, floor: usize },

    #[error("chart is singular at theta = {0} (poles are excluded)")]
    ChartSingularity(f64),

    #[error("energy grids are incompatible: {0}")]
    IncompatibleGrids(&'static str),

    #[error("Jacobi eigensolver did not converge")]
    NoConvergence,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
