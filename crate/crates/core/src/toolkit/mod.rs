//! Instance files, generators, reports and the command-line front end.

pub mod bench;
pub mod cli;
pub mod format;
pub mod generate;
pub mod report;

pub use format::{parse, parse_instance, render, Instance, ParseError};
pub use generate::{generate, GenerateError};
