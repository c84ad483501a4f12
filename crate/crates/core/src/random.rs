//! Seeded random instances: complex Gaussian matrices and vectors.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, CVector, ComplexMatrix, UnitVector, C64};

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| complex_gaussian(rng))
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> UnitVector {
    loop {
        if let Ok(u) = UnitVector::new(random_vector(rng, n)) {
            return u;
        }
    }
}

/// Dense matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    ComplexMatrix::new(CMatrix::from_fn(n, n, |_, _| complex_gaussian(rng)))
        .expect("gaussian entries are finite")
}

/// Random unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    g.qr().q()
}

/// `U diag(mu) U*` with random unitary `U` and Gaussian eigenvalues.
pub fn random_normal_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let mu: Vec<C64> = (0..n).map(|_| complex_gaussian(rng) * 2.0).collect();
    normal_with_eigenvalues(rng, &mu)
}

pub fn normal_with_eigenvalues<R: Rng + ?Sized>(rng: &mut R, mu: &[C64]) -> ComplexMatrix {
    let u = random_unitary(rng, mu.len());
    let d = CMatrix::from_diagonal(&CVector::from_column_slice(mu));
    ComplexMatrix::new(&u * d * u.adjoint()).expect("finite")
}

/// Random non-normal 2x2 matrix (upper triangular part bounded away from zero).
pub fn random_nonnormal_2x2<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix {
    loop {
        let a = random_matrix(rng, 2);
        if !a.is_normal(1e-3) {
            return a;
        }
    }
}
