//! Experiment runner for the in-car two-microphone Wiener filter.

pub mod config;
pub mod error;
pub mod experiment;
pub mod report;
pub mod speech;

pub use config::ScenarioConfig;
pub use error::{Result, ScenarioError};
pub use experiment::{run_experiment, RunReport};
pub use report::emit_report;
