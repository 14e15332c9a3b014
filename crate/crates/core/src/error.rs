use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// A closed-form condition has no solution at the requested parameters.
    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("quantizer overload{}: |{value}| exceeds range {range}", .index.map(|i| format!(" at sample {i}")).unwrap_or_default())]
    Overload {
        index: Option<usize>,
        value: f64,
        range: f64,
    },

    #[error("first sample {value} lies outside [-{lambda_prime}, {lambda_prime}]")]
    FirstSample { value: f64, lambda_prime: f64 },

    /// More fold locations than out-of-band equations; the column-rank
    /// condition on the fold-indexed DFT submatrix cannot hold.
    #[error("oversampling insufficient: {folds} fold locations but only {bins} out-of-band bins")]
    OversamplingInsufficient { folds: usize, bins: usize },

    #[error("rank-deficient fold matrix: rank {rank} < {columns} columns (sigma_min = {sigma_min:e})")]
    RankDeficient {
        rank: usize,
        columns: usize,
        sigma_min: f64,
    },

    #[error("segment {index}: {source}")]
    Segment {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }

    pub(crate) fn in_segment(self, index: usize) -> Self {
        Error::Segment {
            index,
            source: Box::new(self),
        }
    }
}
