//! The `grammarctl` command line and HTTP service.

pub mod cli;
pub mod server;
