//! Experiment orchestration for `cerlab`: versioned JSON configs, deterministic
//! replicate-parallel runners and schema-checked CSV output.

pub mod config;
pub mod error;
pub mod experiments;
pub mod records;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::HarnessError;
pub use experiments::{run, RunOutput};
