//! Command-line driver: scenario runs, parameter sweeps, and summaries of
//! their CSV output.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod output;

pub use commands::{cmd_report, cmd_simulate, cmd_sweep, SimulateArgs, SweepArgs, SweepParam};
pub use error::CliError;
