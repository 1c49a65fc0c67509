//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("chart {id} is invalid: {reason}")]
    InvalidChart { id: u32, reason: String },

    #[error("no charts remaining after filtering degenerate islands ({dropped} dropped)")]
    NoCharts { dropped: usize },

    #[error("invalid atlas spec: {0}")]
    InvalidSpec(String),

    #[error("chart set is empty")]
    EmptySet,

    #[error("pack result marks failure; operation requires a successful packing")]
    FailedResult,

    #[error("chart ids in result do not match chart set: {0}")]
    ChartIdMismatch(String),

    #[error("chart {id}: packed triangle {tri} is degenerate")]
    DegenerateTriangle { id: u32, tri: usize },

    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
