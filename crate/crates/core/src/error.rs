use std::path::PathBuf;

/// Errors raised by the laboratory.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    InvalidAxis { axis: usize, dim: usize },

    #[error("diffusion matrix is not symmetric at grid point {point}")]
    NotSymmetric { point: usize },

    #[error("diffusion is not uniformly elliptic: smallest eigenvalue {min_eigenvalue} at grid point {point}")]
    NotElliptic { min_eigenvalue: f64, point: usize },

    #[error("decay exponent {decay} must exceed n/2 = {} for square-integrable data", *dim as f64 / 2.0)]
    DecayTooSmall { decay: f64, dim: usize },

    #[error("method mismatch: {0}")]
    MethodMismatch(String),

    #[error("unstable step: squared L2 norm {norm_sq:e} at t = {time:e} exceeds the energy envelope {envelope:e}")]
    UnstableStep {
        time: f64,
        norm_sq: f64,
        envelope: f64,
    },

    #[error("invalid sample schedule: {0}")]
    InvalidSchedule(String),

    #[error("requested {requested} Galerkin modes but only {available} are available")]
    TooManyModes { requested: usize, available: usize },

    #[error("rate window holds {available} usable samples, at least {required} are required")]
    WindowTooSparse { available: usize, required: usize },

    #[error("no Gronwall constant up to {max_c} bounds the series")]
    Infeasible { max_c: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("unknown suite `{name}`; valid suites: {}", valid.join(", "))]
    UnknownSuite { name: String, valid: Vec<String> },

    #[error("{context}: {source}")]
    Io {
        context: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            context: path.into(),
            source,
        }
    }

    /// True for errors that originate in the configuration rather than the
    /// numerics; the CLI maps these to exit code 2.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Validation { .. }
                | Error::UnknownSuite { .. }
                | Error::DecayTooSmall { .. }
                | Error::InvalidGrid(_)
                | Error::InvalidSchedule(_)
                | Error::NotElliptic { .. }
                | Error::NotSymmetric { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
