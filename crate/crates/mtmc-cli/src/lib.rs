//! Experiment runner around the `mtmc` sampling library.
//!
//! A scenario file fully determines an experiment: the state space, target
//! and proposal, sampler settings, and which analyses to run. The binary
//! front-end parses one subcommand (`run`, `compare`, `spectrum`,
//! `couple`), loads and validates the scenario, applies command-line
//! overrides, and writes CSV/JSON reports that embed the scenario name,
//! seed, and library version so every artifact can be traced back to the
//! exact configuration that produced it. Given the same scenario and seed,
//! every command reproduces its output files byte for byte.

pub mod commands;
pub mod config;
pub mod error;
pub mod outputs;
pub mod scenario;

pub use commands::{CommandOutcome, Overrides};
pub use config::ScenarioFile;
pub use error::CliError;
