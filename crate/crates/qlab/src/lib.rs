//! Experiment registry, configuration and reports for `qlab-core`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

pub use config::{Config, Format};
pub use error::{Error, Result};
pub use experiments::{run, EXPERIMENTS};
pub use report::{Check, Comparison, Provenance, Report};
