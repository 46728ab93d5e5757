//! File formats, command-line front end and benchmark driver for
//! [`sso_core`].
//!
//! The `sso` binary is a thin wrapper over [`commands::run`]; the [`io`]
//! module can be used on its own to read and write instances and results.

pub mod cli;
pub mod commands;
pub mod io;
