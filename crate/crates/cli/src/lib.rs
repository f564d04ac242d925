//! Scenario runner for the `ghmimo` library: configuration, sweep
//! experiments, CSV output and run manifests.

pub mod compare;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod pipeline;

pub use config::ScenarioConfig;
pub use error::{CliError, CliResult};
pub use pipeline::Pipeline;
