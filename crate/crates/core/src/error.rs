use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("degenerate degree at node {0}")]
    DegenerateDegree(usize),

    #[error("degenerate bandwidth at point {0}: k-th neighbour distance is zero")]
    DegenerateBandwidth(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error("diffusion time {0} is not available on a matrix-power operator (dyadic integers only)")]
    UnsupportedTime(f64),

    #[error("unsupported wavelet variant: {0}")]
    UnsupportedVariant(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("signal {index}: {source}")]
    Signal {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }

    /// Process exit code used by the command-line tool: 2 for usage, 3 for data
    /// problems, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Numerical { .. } => 4,
            Error::Signal { source, .. } => source.exit_code(),
            _ => 3,
        }
    }
}
