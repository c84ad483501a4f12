//! Unit vectors along a chord of a 2×2 numerical range: given preimages
//! `x`, `y` of two boundary points, `h(λ)` satisfies
//! `f_A(h(λ)) = λ f_A(x) + (1−λ) f_A(y)`.

use crate::error::{Error, Result};
use crate::linalg::{CVector, ComplexMatrix, UnitVector, C64};

const HALF_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Which radicand to use for the constant `C` of the chord formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChordConstant {
    /// `C = 2√(λ(1−λ)(1−|x*y|²))`.
    Squared,
    /// `C = 2√(λ(1−λ)(1−|x*y|))`; kept to demonstrate that it fails.
    Unsquared,
}

/// `±(y*x)/|x*y|`.
pub fn chord_beta(x: &CVector, y: &CVector, positive: bool) -> Result<C64> {
    let o = y.dotc(x);
    let m = o.norm();
    if m <= 1e-8 {
        return Err(Error::ChordPremise(format!("|x*y| = {m:.3e} is too small")));
    }
    Ok(if positive { o / m } else { -o / m })
}

/// The chord vector
/// `(λx + (1−λ)(y*x + iβ√(1−|x*y|²)) y + (√2/2) C v) / √(C+1)` with
/// `v = (√2/2)(x + iβ (y − (x*y)x)/‖y − (x*y)x‖)`, unnormalized.
///
/// When `y − (x*y)x` vanishes (below `1e-10`) and `allow_parallel` is set,
/// the `v` term is dropped; otherwise that case is an error.
pub fn chord_vector(
    x: &CVector,
    y: &CVector,
    beta: C64,
    lambda: f64,
    form: ChordConstant,
    allow_parallel: bool,
) -> Result<CVector> {
    let xy = x.dotc(y);
    let ov = xy.norm_sqr().min(1.0);
    let perp = y - x * xy;
    let pn = perp.norm();
    let lam1 = (lambda * (1.0 - lambda)).max(0.0);
    let radicand = match form {
        ChordConstant::Squared => 1.0 - ov,
        ChordConstant::Unsquared => 1.0 - ov.sqrt(),
    };
    let coef_y = xy.conj() + C64::i() * beta * (1.0 - ov).sqrt();
    let mut h = x * C64::new(lambda, 0.0) + y * (coef_y * (1.0 - lambda));
    let c = if pn <= 1e-10 {
        if !allow_parallel {
            return Err(Error::ChordPremise("y is parallel to x".into()));
        }
        0.0
    } else {
        let c = 2.0 * (lam1 * radicand.max(0.0)).sqrt();
        let v = (x + &perp * (C64::i() * beta / pn)) * C64::new(HALF_SQRT2, 0.0);
        h += v * C64::new(HALF_SQRT2 * c, 0.0);
        c
    };
    Ok(h / C64::new((c + 1.0).sqrt(), 0.0))
}

/// Chord selection on a non-normal 2×2 matrix.
pub fn elliptic_chord_selection(
    a2: &ComplexMatrix,
    x: &UnitVector,
    y: &UnitVector,
    beta: C64,
    lambda: f64,
) -> Result<UnitVector> {
    if a2.dim() != 2 || x.dim() != 2 || y.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: a2.dim().max(x.dim()).max(y.dim()),
        });
    }
    if a2.is_normal(1e-10) {
        return Err(Error::ChordPremise("matrix is normal".into()));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::ChordPremise(format!("lambda = {lambda} is outside [0, 1]")));
    }
    let overlap = x.inner(y).norm();
    if overlap <= 1e-8 {
        return Err(Error::ChordPremise(format!("|x*y| = {overlap:.3e} is too small")));
    }
    let h = chord_vector(x.as_vector(), y.as_vector(), beta, lambda, ChordConstant::Squared, false)?;
    UnitVector::new(h)
}

/// Chord selection on a normal 2×2 matrix between eigenvectors `x`, `y`:
/// `(λx + (1−λ)iy + (√2/2)Cv)/√(C+1)`, `C = 2√(λ(1−λ))`, `v = (√2/2)(x+iy)`.
pub fn normal_chord_selection(
    a2: &ComplexMatrix,
    x: &UnitVector,
    y: &UnitVector,
    lambda: f64,
) -> Result<UnitVector> {
    if a2.dim() != 2 || x.dim() != 2 || y.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: a2.dim().max(x.dim()).max(y.dim()),
        });
    }
    let commutator = a2.commutator_norm();
    if commutator > 1e-10 * a2.scale().powi(2) {
        return Err(Error::NotNormal { commutator });
    }
    let m = a2.as_matrix();
    let mu_x = a2.quad(x.as_vector());
    let mu_y = a2.quad(y.as_vector());
    let tol = 1e-10 * a2.scale();
    for (v, mu) in [(x, mu_x), (y, mu_y)] {
        if (m * v.as_vector() - v.as_vector() * mu).norm() > tol {
            return Err(Error::ChordPremise("input is not an eigenvector".into()));
        }
    }
    if (mu_x - mu_y).norm() <= tol {
        return Err(Error::EqualEigenvalues);
    }
    Ok(UnitVector::from_unit(normal_chord(x.as_vector(), y.as_vector(), lambda)))
}

/// `(λx + (1−λ)iy + (√2/2)Cv)/√(C+1)`; unit whenever `x ⊥ y` are unit.
pub fn normal_chord(x: &CVector, y: &CVector, lambda: f64) -> CVector {
    let i = C64::i();
    let c = 2.0 * (lambda * (1.0 - lambda)).max(0.0).sqrt();
    let v = (x + y * i) * C64::new(HALF_SQRT2, 0.0);
    let h = x * C64::new(lambda, 0.0) + y * (i * (1.0 - lambda)) + v * C64::new(HALF_SQRT2 * c, 0.0);
    h / C64::new((c + 1.0).sqrt(), 0.0)
}

/// Largest residual `|f(h(λ)) − (λ f(x) + (1−λ) f(y))|` over `lambdas`.
pub fn chord_residual(
    a: &ComplexMatrix,
    x: &CVector,
    y: &CVector,
    beta: C64,
    lambdas: &[f64],
    form: ChordConstant,
) -> Result<f64> {
    let (fx, fy) = (a.quad(x), a.quad(y));
    let mut worst: f64 = 0.0;
    for &l in lambdas {
        let h = chord_vector(x, y, beta, l, form, false)?;
        let target = fx * l + fy * (1.0 - l);
        worst = worst.max((a.quad(&h) - target).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh;
    use crate::random::random_nonnormal_2x2;
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Boundary preimage of the 2×2 range at outward normal `θ`.
    fn boundary_vector(a: &ComplexMatrix, theta: f64) -> CVector {
        let e = eigh(a.rotate(theta).real_part().as_matrix()).unwrap();
        e.vector(1)
    }

    #[test]
    fn endpoints() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let a = random_nonnormal_2x2(&mut rng);
        let x = UnitVector::new(boundary_vector(&a, 0.3)).unwrap();
        let y = UnitVector::new(boundary_vector(&a, 2.1)).unwrap();
        let beta = chord_beta(x.as_vector(), y.as_vector(), true).unwrap();
        let h1 = elliptic_chord_selection(&a, &x, &y, beta, 1.0).unwrap();
        assert!(h1.phase_distance(&x) < 1e-12);
        let h0 = elliptic_chord_selection(&a, &x, &y, beta, 0.0).unwrap();
        assert!(h0.phase_distance(&y) < 1e-12);
        assert!((a.quad(h0.as_vector()) - a.quad(y.as_vector())).norm() < 1e-12);
    }

    #[test]
    fn random_chords_with_both_beta_signs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let lambdas: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        for _ in 0..50 {
            let a = random_nonnormal_2x2(&mut rng);
            let x = boundary_vector(&a, 0.4);
            let y = boundary_vector(&a, 2.5);
            for positive in [true, false] {
                let beta = chord_beta(&x, &y, positive).unwrap();
                let r = chord_residual(&a, &x, &y, beta, &lambdas, ChordConstant::Squared).unwrap();
                assert!(r <= 1e-8 * a.scale(), "residual {r}");
                for &l in &lambdas {
                    let h = chord_vector(&x, &y, beta, l, ChordConstant::Squared, false).unwrap();
                    assert!((h.norm() - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn premise_violations() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let a = random_nonnormal_2x2(&mut rng);
        let e1 = UnitVector::basis(2, 0);
        let e2 = UnitVector::basis(2, 1);
        assert!(elliptic_chord_selection(&a, &e1, &e2, c(1.0, 0.0), 0.5).is_err());
        let d = ComplexMatrix::diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(elliptic_chord_selection(&d, &e1, &e1, c(1.0, 0.0), 0.5).is_err());
        assert!(chord_beta(e1.as_vector(), e2.as_vector(), true).is_err());
    }

    #[test]
    fn normal_chord_example() {
        let a = ComplexMatrix::diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let e1 = UnitVector::basis(2, 0);
        let e2 = UnitVector::basis(2, 1);
        let h = normal_chord_selection(&a, &e2, &e1, 0.5).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = CVector::from_vec(vec![c(0.0, s), c(s, 0.0)]);
        assert!((h.as_vector() - expect).norm() < 1e-15);
        assert!((a.quad(h.as_vector()) - c(0.5, 0.0)).norm() < 1e-15);
        let h1 = normal_chord_selection(&a, &e2, &e1, 1.0).unwrap();
        assert!((h1.as_vector() - e2.as_vector()).norm() < 1e-15);
        assert!(normal_chord_selection(&ComplexMatrix::identity(2), &e1, &e2, 0.5).is_err());
    }

    #[test]
    fn normal_chord_on_random_normal() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let a = crate::random::random_normal_matrix(&mut rng, 2);
            let e = eigh(a.real_part().as_matrix()).unwrap();
            let (x, y) = (e.vector(0), e.vector(1));
            let (mx, my) = (a.quad(&x), a.quad(&y));
            for k in 0..=20 {
                let l = k as f64 / 20.0;
                let h = normal_chord(&x, &y, l);
                assert!((h.norm() - 1.0).abs() < 1e-12);
                assert!((a.quad(&h) - (mx * l + my * (1.0 - l))).norm() <= 1e-10 * a.scale());
            }
        }
    }
}
