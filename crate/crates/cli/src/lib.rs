//! Configuration-driven experiment runner for `b3fem`.

pub mod config;
pub mod error;
pub mod presets;
pub mod run;

pub use config::{CoefficientSpec, ExperimentConfig, ExperimentKind, Overrides};
pub use error::CliError;
pub use run::{run, RunOutput};
