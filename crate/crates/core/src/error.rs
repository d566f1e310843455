use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("enumeration too large: {required} ordered tuples exceed the cap of {cap}; raise the cap to at least {required}")]
    EnumerationTooLarge { required: u128, cap: u128 },

    #[error("no world is consistent with the evidence {0}")]
    EmptySupport(String),

    #[error("length {0} is not a member of the grid")]
    NotOnGrid(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("every utterance has zero probability under the speaker model")]
    DegenerateSpeaker,

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid model specification: {0}")]
    InvalidModel(String),

    #[error("non-finite likelihood for datum {index} (participant {participant})")]
    NonFiniteLikelihood { index: usize, participant: String },

    #[error("fits were computed on different datasets ({0} vs {1})")]
    DataMismatch(String, String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short stable identifier used by the command-line error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid-grid",
            Error::EnumerationTooLarge { .. } => "enumeration-too-large",
            Error::EmptySupport(_) => "empty-support",
            Error::NotOnGrid(_) => "not-on-grid",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::DegenerateSpeaker => "degenerate-speaker",
            Error::Validation(_) => "validation",
            Error::InvalidModel(_) => "invalid-model",
            Error::NonFiniteLikelihood { .. } => "non-finite-likelihood",
            Error::DataMismatch(..) => "data-mismatch",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
