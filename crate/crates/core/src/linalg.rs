//! Dense complex linear algebra: Hermitian parts, rotations, the quadratic
//! form `x*Ax`, a Hermitian eigensolver contract and compressions.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

#[inline]
pub(crate) fn cis(theta: f64) -> C64 {
    C64::new(theta.cos(), theta.sin())
}

/// Conjugate-linear in the first argument: `<x, y> = x* y`.
#[inline]
pub fn inner(x: &CVector, y: &CVector) -> C64 {
    x.dotc(y)
}

/// Dense square complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(CMatrix);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix({}x{})", self.dim(), self.dim())?;
        for r in 0..self.dim() {
            write!(f, "\n  [")?;
            for c in 0..self.dim() {
                let z = self.0[(r, c)];
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            write!(f, " ]")?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(Self(m))
    }

    pub fn from_row_major(n: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        Self::new(CMatrix::from_row_slice(n, n, entries))
    }

    /// Builds a matrix from rows of `(re, im)` pairs.
    pub fn from_rows(rows: &[&[(f64, f64)]]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            entries.extend(row.iter().map(|&(re, im)| C64::new(re, im)));
        }
        Self::from_row_major(n, &entries)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let pairs: Vec<Vec<(f64, f64)>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| (x, 0.0)).collect())
            .collect();
        let refs: Vec<&[(f64, f64)]> = pairs.iter().map(|r| r.as_slice()).collect();
        Self::from_rows(&refs)
    }

    pub fn diagonal(values: &[C64]) -> Result<Self> {
        Self::new(CMatrix::from_diagonal(&CVector::from_column_slice(values)))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    /// Block-diagonal direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (p, q) = (self.dim(), other.dim());
        let mut m = CMatrix::zeros(p + q, p + q);
        m.view_mut((0, 0), (p, p)).copy_from(&self.0);
        m.view_mut((p, p), (q, q)).copy_from(&other.0);
        ComplexMatrix(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn row_major(&self) -> Vec<C64> {
        let n = self.dim();
        (0..n * n).map(|k| self.0[(k / n, k % n)]).collect()
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix(self.0.adjoint())
    }

    /// Spectral norm (largest singular value).
    pub fn norm(&self) -> f64 {
        self.0
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    /// Norm used to scale relative tolerances; never zero.
    pub fn scale(&self) -> f64 {
        self.norm().max(f64::MIN_POSITIVE)
    }

    /// `(A + A*) / 2`.
    pub fn real_part(&self) -> ComplexMatrix {
        ComplexMatrix((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// `(A - A*) / 2i`.
    pub fn imag_part(&self) -> ComplexMatrix {
        ComplexMatrix((&self.0 - self.0.adjoint()) * C64::new(0.0, -0.5))
    }

    /// `e^{-i theta} A`.
    pub fn rotate(&self, theta: f64) -> ComplexMatrix {
        ComplexMatrix(&self.0 * cis(-theta))
    }

    /// `x* A x` for a unit vector.
    pub fn fov_eval(&self, x: &UnitVector) -> Result<C64> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(self.quad(x.as_vector()))
    }

    /// Unchecked quadratic form `x* A x`.
    #[inline]
    pub fn quad(&self, x: &CVector) -> C64 {
        x.dotc(&(&self.0 * x))
    }

    /// Frobenius norm of `A A* - A* A`.
    pub fn commutator_norm(&self) -> f64 {
        let a = &self.0;
        let ah = a.adjoint();
        (a * &ah - &ah * a).norm()
    }

    pub fn is_normal(&self, rel_tol: f64) -> bool {
        let s = self.scale();
        self.commutator_norm() <= rel_tol * s * s
    }

    /// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
    pub fn hermitian_eigs(&self) -> Result<HermitianEigen> {
        let s = self.0.norm().max(f64::MIN_POSITIVE);
        let asym = (&self.0 - self.0.adjoint()).norm();
        if asym > 1e-10 * s {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        eigh(&self.0)
    }

    /// Orthonormalizes `span` to columns `V` and returns `(V* A V, V)`.
    pub fn compress(&self, span: &[CVector]) -> Result<(ComplexMatrix, CMatrix)> {
        let v = orthonormal_basis(self.dim(), span)?;
        let c = v.adjoint() * &self.0 * &v;
        Ok((ComplexMatrix(c), v))
    }
}

/// Eigenpairs of a Hermitian matrix, ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matched by index.
    pub eigenvectors: CMatrix,
}

impl HermitianEigen {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, j: usize) -> CVector {
        self.eigenvectors.column(j).into_owned()
    }

    pub fn unit_vector(&self, j: usize) -> UnitVector {
        UnitVector(self.vector(j))
    }

    pub fn max_residual(&self, h: &CMatrix) -> f64 {
        (0..self.len())
            .map(|j| {
                let v = self.vector(j);
                (h * &v - &v * C64::new(self.eigenvalues[j], 0.0)).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Hermitian eigensolver without the symmetry precheck.
pub(crate) fn eigh(h: &CMatrix) -> Result<HermitianEigen> {
    let n = h.nrows();
    let eig = h
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or(Error::EigenSolver)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        let nrm = col.norm();
        col /= C64::new(nrm, 0.0);
        eigenvectors.set_column(dst, &col);
    }
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
pub fn orthonormal_basis(n: usize, span: &[CVector]) -> Result<CMatrix> {
    if span.is_empty() {
        return Err(Error::RankDeficient { sigma_min: 0.0 });
    }
    for v in span {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    let k = span.len();
    let mut stacked = CMatrix::zeros(n, k);
    for (j, v) in span.iter().enumerate() {
        stacked.set_column(j, v);
    }
    let sigma_min = if k > n {
        0.0
    } else {
        stacked
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    };
    if sigma_min <= 1e-10 {
        return Err(Error::RankDeficient { sigma_min });
    }
    let mut q = CMatrix::zeros(n, k);
    for (j, col) in span.iter().enumerate() {
        let mut v = col.clone();
        for _pass in 0..2 {
            for i in 0..j {
                let qi = q.column(i).into_owned();
                let c = qi.dotc(&v);
                v -= qi * c;
            }
        }
        let nrm = v.norm();
        if nrm <= 1e-14 {
            return Err(Error::RankDeficient { sigma_min: nrm });
        }
        q.set_column(j, &(v / C64::new(nrm, 0.0)));
    }
    Ok(q)
}

/// Complex vector of unit Euclidean norm.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector(CVector);

impl UnitVector {
    pub fn new(v: CVector) -> Result<Self> {
        if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        let nrm = v.norm();
        if nrm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self(v / C64::new(nrm, 0.0)))
    }

    pub fn from_slice(components: &[C64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(components))
    }

    /// Standard basis vector `e_k` (zero-based).
    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = CVector::zeros(n);
        v[k] = C64::new(1.0, 0.0);
        Self(v)
    }

    /// Wraps a vector already known to have unit norm.
    pub(crate) fn from_unit(v: CVector) -> Self {
        Self(v)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    pub fn into_inner(self) -> CVector {
        self.0
    }

    pub fn inner(&self, other: &UnitVector) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn scaled(&self, omega: C64) -> UnitVector {
        UnitVector(&self.0 * omega)
    }

    /// `min_ω ||x - ω y||` over unimodular `ω`.
    pub fn phase_distance(&self, other: &UnitVector) -> f64 {
        phase_distance(&self.0, &other.0)
    }

    /// Real components interleaved as `re_0, im_0, re_1, im_1, ...`.
    pub fn to_real_components(&self) -> Vec<f64> {
        self.0.iter().flat_map(|z| [z.re, z.im]).collect()
    }
}

pub fn phase_distance(x: &CVector, y: &CVector) -> f64 {
    let o = y.dotc(x);
    let omega = if o.norm() > 0.0 { o / o.norm() } else { C64::new(1.0, 0.0) };
    (x - y * omega).norm()
}
