//! Command-line front end: file formats, reports and command dispatch.

pub mod commands;
pub mod files;
pub mod report;

pub use commands::{configure_threads, run, Cli};
pub use report::{Report, Status};
