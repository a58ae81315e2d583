//! Scenario files, run orchestration, field snapshots and parameter sweeps
//! for the `eulerswell` simulator.

pub mod config;
pub mod error;
pub mod expr;
pub mod run;
pub mod snapshot;
pub mod sweep;

pub use config::Config;
pub use error::CliError;
pub use run::{run, RunOptions, RunOutcome, Session, Summary};
