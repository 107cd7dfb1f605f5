use thiserror::Error;

/// Errors raised anywhere in the forward/inverse pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("phase vector has zero length")]
    ZeroPhaseVector,

    #[error("phase grid is empty: no length in [{kappa_min}, {cap}]")]
    EmptyGrid { kappa_min: f64, cap: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("disk domain lies within 2h of the grid bounds (margin {margin:.3e}, need {required:.3e})")]
    DomainTouchesBounds { margin: f64, required: f64 },

    #[error("degenerate cut at node ({i}, {j}): arm fraction {theta:.3e}; shift the grid origin by h/3")]
    AssemblyFailure { i: usize, j: usize, theta: f64 },

    #[error("operator is numerically singular (condition indicator {indicator:.3e})")]
    NearResonance { indicator: f64 },

    #[error("interpolation stencil leaves the domain at boundary sample {sample}")]
    InterpolationOutOfDomain { sample: usize },

    #[error("trace already carries noise")]
    DoubleNoise,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("reference field has zero norm")]
    ZeroTruth,

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("insufficient data for slope fit: {0}")]
    InsufficientData(String),

    #[error("mode ({ell}, {s}) failed: {source}")]
    ModeFailed {
        ell: usize,
        s: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// True for failures originating in the linear solver or discretization.
    pub fn is_solver_error(&self) -> bool {
        match self {
            Error::AssemblyFailure { .. }
            | Error::NearResonance { .. }
            | Error::InterpolationOutOfDomain { .. }
            | Error::DomainTouchesBounds { .. } => true,
            Error::ModeFailed { source, .. } => source.is_solver_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
