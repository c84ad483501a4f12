//! Numerical ranges `F(A) = { x*Ax : |x| = 1 }` of dense complex matrices:
//! boundary atlases built from eigenvalue branches of `Re(e^{-iθ}A)`,
//! continuity classification of the inverse map, and explicit continuous
//! selections `g` with `g(z)* A g(z) = z`.

pub mod boundary;
pub mod branches;
pub mod chord;
pub mod config;
pub mod continuity;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod oracle;
pub mod path;
pub mod random;
pub mod selection;

pub use config::ToleranceConfig;
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianEigen, UnitVector, C64};
