use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Global tolerance and sampling configuration.
///
/// Every threshold is relative to the spectral norm of the input matrix
/// unless noted otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Eigenpair residual bound, relative to `||H||`.
    pub eig_residual: f64,
    /// Gap below which two eigenvalue branches are said to cross.
    pub crossing_tol: f64,
    /// Gap below which two branches are treated as the same function.
    pub identical_tol: f64,
    /// Bound on `|f_A(g(z)) - z|` for a selection.
    pub selection_residual: f64,
    /// Norm below which a projected anchor vector counts as zero (absolute).
    pub path_zero: f64,
    /// Number of intervals of the uniform theta-grid.
    pub grid_size: usize,
    /// Seed for every randomized step.
    pub seed: u64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eig_residual: 1e-10,
            crossing_tol: 1e-7,
            identical_tol: 1e-9,
            selection_residual: 1e-7,
            path_zero: 1e-8,
            grid_size: 2048,
            seed: 42,
        }
    }
}

impl ToleranceConfig {
    pub fn with_grid(mut self, grid_size: usize) -> Self {
        self.grid_size = grid_size;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("eig_residual", self.eig_residual),
            ("crossing_tol", self.crossing_tol),
            ("identical_tol", self.identical_tol),
            ("selection_residual", self.selection_residual),
            ("path_zero", self.path_zero),
        ];
        for (name, value) in positives {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.crossing_tol <= self.identical_tol {
            return Err(Error::InvalidConfig(
                "crossing_tol must exceed identical_tol".into(),
            ));
        }
        if self.grid_size < 256 {
            return Err(Error::InvalidConfig("grid_size must be at least 256".into()));
        }
        Ok(())
    }
}
