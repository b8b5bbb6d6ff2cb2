//! Batch front end for the topokernels toolkit: ingestion, synthetic data,
//! and the diagram-to-learning pipeline.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::Context;
pub use error::CliError;
