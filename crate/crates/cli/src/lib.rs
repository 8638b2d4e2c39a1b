//! Configuration handling and subcommands of the `dampwave` executable.

pub mod config;
pub mod run;
