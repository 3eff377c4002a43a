use thiserror::Error;

/// Errors raised anywhere in the sampling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input contains NaN or infinite entries")]
    NonFiniteInput,

    #[error("subspace has numerical rank zero")]
    ZeroSubspace,

    #[error(
        "direct-sum condition fails for {pair}: dims {range_dim} vs {sampling_dim}, conditioning {ratio:.3e}"
    )]
    DirectSumViolation {
        pair: String,
        range_dim: usize,
        sampling_dim: usize,
        ratio: f64,
    },

    #[error("grid mismatch: expected length {expected}, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("length mismatch: expected {expected} coefficients, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("lambda {0} outside [0, 1]")]
    LambdaOutOfRange(f64),

    #[error("no nontrivial regret bounds for the {0} scheme")]
    UnsupportedRow(String),

    #[error("input is not in the prior subspace (sin = {0:.3e})")]
    InputNotInSubspace(f64),

    #[error("grid too narrow: {0}")]
    GridTooNarrow(String),

    #[error("unsupported B-spline order {0} (expected 0..=3)")]
    UnsupportedOrder(u32),

    #[error("spectrum denominator vanishes on the whole frequency grid")]
    DegenerateSpectrum,

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config error in `{field}`: {message}")]
    ConfigSemantic { field: String, message: String },

    #[error("lambda {0} is not present in the sweep")]
    MissingLambda(f64),

    #[error("signal file: {0}")]
    SignalFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Config-level failures, as opposed to numerical or I/O ones.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::ConfigParse { .. } | Error::ConfigSemantic { .. } | Error::SignalFormat(_)
        )
    }
}
