//! Files, configuration and the command-line interface around `pseudoe-core`.

pub mod cli;
pub mod config;
pub mod eval;
pub mod io;

pub use config::RunConfig;
