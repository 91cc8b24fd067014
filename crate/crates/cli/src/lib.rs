//! Library half of the command-line front end; the binary in `main.rs` is a
//! thin wrapper so integration tests can drive the same code paths.

pub mod checks;
pub mod cli;
pub mod fixtures;
pub mod output;

pub use cli::{execute, Cli, Command};
