//! Command-line front end for the PDD solvers: instance generation, single
//! solves with trace export, seed benchmarks and the property suites.

pub mod app;
pub mod args;
pub mod bench;
pub mod config;
pub mod gen;
pub mod solve;
pub mod verify;

pub use args::Cli;

/// Exit status for a solve that stopped at `max_outer` without meeting
/// the termination criterion.
pub const EXIT_NOT_CONVERGED: u8 = 3;
