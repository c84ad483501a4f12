use thiserror::Error;

/// Errors raised by the numerical-range machinery.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix or vector has non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("Hermitian eigensolver did not converge")]
    EigenSolver,

    #[error("spanning set is rank deficient (smallest singular value {sigma_min:.3e})")]
    RankDeficient { sigma_min: f64 },

    #[error("branch tracking failed: {0}")]
    Tracking(String),

    #[error("ambiguous split degree at theta = {theta}: slope {slope:.3}")]
    AmbiguousSplitDegree { theta: f64, slope: f64 },

    #[error("split degree at theta = {theta} is >= 7 and cannot be resolved")]
    UnresolvedSplitDegree { theta: f64 },

    #[error("point is not on the boundary (distance {distance:.3e})")]
    NotOnBoundary { distance: f64 },

    #[error("point lies outside the numerical range")]
    OutsideRange,

    #[error("projection path has a run of {len} vanishing samples")]
    ZeroRun { len: usize },

    #[error("spectral projection of the anchor vanishes on the interval")]
    ProjectionVanishes,

    #[error("vectors are not orthogonal (|<x,y>| = {overlap:.3e})")]
    NonOrthogonal { overlap: f64 },

    #[error("chord premise violated: {0}")]
    ChordPremise(String),

    #[error("matrix is not normal (commutator norm {commutator:.3e})")]
    NotNormal { commutator: f64 },

    #[error("eigenvalues coincide")]
    EqualEigenvalues,

    #[error("corner eigenvector fails normality check (residual {residual:.3e})")]
    CornerNotNormal { residual: f64 },

    #[error("selection residual {residual:.3e} exceeds tolerance at z = ({re}, {im})")]
    ResidualExceeded { re: f64, im: f64, residual: f64 },

    #[error("weak continuity failures present; an excision radius is required")]
    MissingEpsilon,

    #[error("point ({re}, {im}) lies in the excised set")]
    Excluded { re: f64, im: f64 },

    #[error("excision failed: {0}")]
    Excision(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
