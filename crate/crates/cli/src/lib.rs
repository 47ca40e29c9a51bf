//! Library surface of the CLI: run configuration and the pipeline stages
//! the subcommands are built from (also used by the acceptance suite).

pub mod commands;
pub mod config;
