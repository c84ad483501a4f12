//! Command-line front end: matrix files in, JSON and CSV out.

pub mod commands;
pub mod error;
pub mod json;
pub mod matrix_file;
pub mod output;

pub use commands::run;
pub use error::{exit, CliError};
pub use matrix_file::MatrixFile;
