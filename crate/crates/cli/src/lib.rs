//! Experiment runner behind the `agewire` binary.
//!
//! The binary is a thin shell: subcommand + flags assemble an
//! `ExperimentConfig`, `experiments::run_experiment` does the work and
//! writes the output directory, `manifest::verify` re-checks one later.

pub mod config;
pub mod csvout;
pub mod experiments;
pub mod manifest;

pub use config::{Experiment, ExperimentConfig, Overrides};
pub use experiments::{run_experiment, RunSummary};
pub use manifest::{verify, RunManifest, VerifyReport};
