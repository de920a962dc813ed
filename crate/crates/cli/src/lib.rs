//! Command-line front-end for `periodic-stein`: JSON equation documents,
//! the `solve`, `check`, `spectrum` and `demo` subcommands, and their
//! machine-readable reports.
//!
//! The binary is a thin clap wrapper around [`commands`].

pub mod commands;
pub mod demo;
pub mod document;
pub mod json;
pub mod report;

pub use document::{emit, parse_equation, EquationDocument, SchemaError};
