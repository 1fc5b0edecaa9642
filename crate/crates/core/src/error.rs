//! Error types shared across the crate, one enum per subsystem.

use thiserror::Error;

/// Errors raised while validating configs or enumerating the design.
#[derive(Debug, Error)]
pub enum DesignError {
    #[error("config error: {0}")]
    Config(String),
    #[error("feature error: {0}")]
    Feature(String),
}

/// Errors raised while rendering documents and prompts.
#[derive(Debug, Error)]
pub enum RenderError {
    #[error("template error: {0}")]
    Template(String),
    #[error("arity error: expected {expected} documents, got {got}")]
    Arity { expected: usize, got: usize },
}

/// Errors raised by the scoring/ranking harness.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("backend error: {0}")]
    Backend(String),
    #[error("store error: {0}")]
    Store(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors raised by the regression engine.
#[derive(Debug, Error)]
pub enum StatsError {
    #[error("rank error: column `{column}` is linearly dependent on the preceding columns")]
    Rank { column: String },
    #[error("inference error: {0}")]
    Inference(String),
    #[error("degenerate error: {0}")]
    Degenerate(String),
    #[error("shape error: {0}")]
    Shape(String),
}
