use std::fmt;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const UNRESOLVED: i32 = 3;
    pub const MISSING_EPSILON: i32 = 4;
    pub const VERIFICATION: i32 = 5;
}

/// A failure that ends the process with `code`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(exit::INPUT, message)
    }

    pub fn verification(message: impl Into<String>) -> Self {
        Self::new(exit::VERIFICATION, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<nrsel::Error> for CliError {
    fn from(e: nrsel::Error) -> Self {
        use nrsel::Error as E;
        let code = match &e {
            E::NotSquare { .. }
            | E::NonFinite
            | E::DimensionMismatch { .. }
            | E::InvalidConfig(_)
            | E::NotOnBoundary { .. }
            | E::OutsideRange => exit::INPUT,
            E::AmbiguousSplitDegree { .. } | E::UnresolvedSplitDegree { .. } => exit::UNRESOLVED,
            E::MissingEpsilon => exit::MISSING_EPSILON,
            _ => exit::INTERNAL,
        };
        Self::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::input(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
