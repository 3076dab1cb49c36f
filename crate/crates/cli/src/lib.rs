//! Front end for the accuracy-reconfigurable SC simulator: PGM I/O, platform
//! configuration, masks and the subcommand bodies used by the `arsc` binary.

pub mod commands;
pub mod config;
pub mod mask;
pub mod pgm;
