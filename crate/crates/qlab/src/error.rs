use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown experiment `{0}` (try `qlab list`)")]
    UnknownExperiment(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`")]
    InvalidValue { key: String, value: String },
    #[error("config line {line}: expected key=value")]
    Syntax { line: usize },
    #[error(transparent)]
    Core(#[from] qlab_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
