use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point cloud has {have} points, need at least {need}")]
    InsufficientPoints { have: usize, need: usize },

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),

    #[error("invalid count {count}: must be in 1..={max}")]
    InvalidCount { count: usize, max: usize },

    #[error("invalid drop ratio {0}: must satisfy 0 <= r < 1")]
    InvalidRatio(f64),

    #[error("mesh has no non-degenerate triangle")]
    EmptyMesh,

    #[error("clouds differ in size: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("neighborhood size mismatch: adversarial k = {adv}, benign k = {benign}")]
    MismatchedK { adv: usize, benign: usize },

    #[error("class index {class} out of range for {classes} classes")]
    InvalidClass { class: usize, classes: usize },

    #[error("forward state does not match this model or input: {0}")]
    StateMismatch(String),

    #[error("dataset is degenerate: {0}")]
    DegenerateDataset(String),

    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no results to evaluate")]
    EmptyResults,

    #[error("model file format error: {0}")]
    FormatVersionMismatch(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
