// Copyright 2026 The ftgate Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by model construction, propagation and the experiment driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |H - H^dag| = {0:e})")]
    NotHermitian(f64),

    #[error("operator is not unitary (max |U^dag U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("code construction failed: {0}")]
    CodeConstruction(String),

    #[error("numeric fault: {0}")]
    Numeric(String),

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{0}")]
    MissingPrerequisite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
