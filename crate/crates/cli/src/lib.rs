//! Library side of the `qsmote` command: configuration, CSV I/O, fixtures
//! and the subcommands.

pub mod commands;
pub mod config;
pub mod fixtures;
pub mod format;
pub mod io;
