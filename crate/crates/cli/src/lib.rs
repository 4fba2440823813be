//! Command line front end, HTTP API and REPL for the one-shot task
//! classifier.

pub mod commands;
pub mod error;
pub mod http;
pub mod repl;
pub mod service;
pub mod transport;

pub use commands::{run, Cli};
pub use error::CliError;
pub use service::{ApiError, Service};
