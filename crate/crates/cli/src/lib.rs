//! Command-line front end, interactive session and HTTP API for the `skm`
//! toolkit.

pub mod api;
pub mod commands;
pub mod parse;
pub mod repl;
pub mod session;
