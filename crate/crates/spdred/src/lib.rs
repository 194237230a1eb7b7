//! File formats and subcommands behind the `spdred` binary.

pub mod commands;
pub mod generate;
pub mod io;
