//! File formats, run configuration and subcommands of the `thermorisk`
//! command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
