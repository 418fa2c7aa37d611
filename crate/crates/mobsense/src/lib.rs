//! File formats, parallel drivers and the command-line pipeline for
//! `mobsense-core`.
//!
//! [`pipeline::run`] executes one subcommand against a [`PipelineConfig`],
//! writing CSV, JSON-lines and GeoJSON outputs plus a run manifest. Failed
//! runs leave no partial outputs behind.

pub mod config;
pub mod error;
pub mod formats;
pub mod output;
pub mod parallel;
pub mod pipeline;
pub mod report;

pub use config::PipelineConfig;
pub use error::{PipelineError, Result};
pub use pipeline::{run, Command};
