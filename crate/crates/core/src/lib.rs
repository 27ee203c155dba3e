// Copyright 2026 The ftgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Pulse synthesis for fault-tolerant logic gates on stabilizer-encoded
//! spin chains.
//!
//! The crate builds logical target unitaries for small stabilizer codes,
//! models Ising-coupled spin chains driven by global or local controls,
//! propagates piecewise-constant pulses, and optimizes them with a
//! sequential (Krotov-style) or global (GRAPE-style) update rule.

pub mod cli;
pub mod codes;
pub mod error;
pub mod gates;
pub mod linalg;
pub mod models;
pub mod optimize;
pub mod propagate;

pub use error::{Error, Result};
