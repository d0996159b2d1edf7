use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("profile has {found} rows, expected {expected}")]
    RowCount { found: usize, expected: usize },

    #[error("negative power {value} MW at step {step}")]
    NegativePower { step: usize, value: f64 },

    #[error("power {value} MW at step {step} exceeds rating {rated_mw} MW")]
    AboveRating { step: usize, value: f64, rated_mw: f64 },

    #[error("invalid `{field}`: {msg}")]
    InvalidParameter { field: String, msg: String },

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("capacity factor {target} unreachable: {msg}")]
    UnreachableCf { target: f64, msg: String },

    #[error("power split did not converge within {iterations} iterations at intake {p_h2_mw} MW")]
    NoConvergence { p_h2_mw: f64, iterations: usize },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("dispatch configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("annual hydrogen output is zero, LCOH is undefined")]
    UndefinedLcoh,

    #[error("unknown use case `{0}`")]
    UnknownUseCase(String),

    #[error("scenario json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            msg: msg.into(),
        }
    }

    /// True for failures raised while simulating or costing a valid configuration,
    /// as opposed to bad input.
    pub fn is_simulation_failure(&self) -> bool {
        match self {
            Error::NoConvergence { .. } | Error::UndefinedLcoh => true,
            Error::AtStep { source, .. } => source.is_simulation_failure(),
            _ => false,
        }
    }
}
