//! Command-line front end: instance files in, exact JSON and CSV reports out.
//!
//! Exit codes: `0` success, `1` findings (violations, jumps or a dominance
//! counterexample), `2` invalid input or a refused lattice.

pub mod app;
pub mod input;
pub mod report;

pub use app::{execute, run, Cli, Command, Outcome};
