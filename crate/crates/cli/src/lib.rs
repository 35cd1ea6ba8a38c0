//! Library surface of the CLI: configuration, commands, and output
//! plumbing, shared with the integration tests.

pub mod commands;
pub mod config;
pub mod output;
