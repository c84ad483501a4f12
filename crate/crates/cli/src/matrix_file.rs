use std::path::Path;

use nrsel::{ComplexMatrix, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// `{"n": 2, "entries": [[re, im], ...], "name": "..."}` with row-major entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub n: usize,
    pub entries: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl MatrixFile {
    pub fn from_matrix(a: &ComplexMatrix, name: Option<String>) -> Self {
        Self {
            n: a.dim(),
            entries: a.row_major().into_iter().map(|z| [z.re, z.im]).collect(),
            name,
        }
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let f: MatrixFile = serde_json::from_str(text).map_err(|e| CliError::input(format!("matrix file: {e}")))?;
        f.validate()?;
        Ok(f)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::input(format!("{}: {}", path.display(), e.message)))
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.n == 0 {
            return Err(CliError::input("field `n` must be positive"));
        }
        if self.entries.len() != self.n * self.n {
            return Err(CliError::input(format!(
                "field `entries` has {} values, expected n^2 = {}",
                self.entries.len(),
                self.n * self.n
            )));
        }
        if let Some(k) = self.entries.iter().position(|e| !(e[0].is_finite() && e[1].is_finite())) {
            return Err(CliError::input(format!("field `entries` has a non-finite value at index {k}")));
        }
        Ok(())
    }

    pub fn matrix(&self) -> CliResult<ComplexMatrix> {
        self.validate()?;
        let e: Vec<C64> = self.entries.iter().map(|p| C64::new(p[0], p[1])).collect();
        Ok(ComplexMatrix::from_row_major(self.n, &e)?)
    }
}
