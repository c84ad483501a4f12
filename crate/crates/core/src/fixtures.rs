//! Test matrices with known boundary structure.

use std::f64::consts::PI;

use crate::linalg::{ComplexMatrix, C64};

/// `[[0, 2], [0, 0]]`, whose numerical range is the closed unit disk.
pub fn disk() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap()
}

/// `[[c, 2r], [0, c]]`: the disk of radius `r` about `c`.
pub fn disk_at(center: C64, radius: f64) -> ComplexMatrix {
    let z = C64::new(0.0, 0.0);
    ComplexMatrix::from_row_major(2, &[center, C64::new(2.0 * radius, 0.0), z, center]).unwrap()
}

/// `diag(0, 1, i)`: the triangle with corners `0, 1, i`.
pub fn triangle() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0)]).unwrap()
}

/// Two unit disks about `0` and `3`: a stadium with two flat portions and
/// no corners.
pub fn stadium() -> ComplexMatrix {
    disk().direct_sum(&disk_at(C64::new(3.0, 0.0), 1.0))
}

/// Semi-axes of the ellipse used by the touching configurations.
pub const ELLIPSE_A: f64 = 2.0;
pub const ELLIPSE_B: f64 = 1.0;

/// `[[√3, 2], [0, -√3]]`: the ellipse `x²/4 + y² ≤ 1`.
pub fn ellipse() -> ComplexMatrix {
    let r3 = 3f64.sqrt();
    ComplexMatrix::from_real_rows(&[&[r3, 2.0], &[0.0, -r3]]).unwrap()
}

/// Point `(a cos t, b sin t)` of the ellipse, its outward normal angle and
/// its radius of curvature.
pub fn ellipse_point(t: f64) -> (C64, f64, f64) {
    let (a, b) = (ELLIPSE_A, ELLIPSE_B);
    let p = C64::new(a * t.cos(), b * t.sin());
    let normal = C64::new(b * t.cos(), a * t.sin());
    let rho = (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).powf(1.5) / (a * b);
    (p, normal.arg(), rho)
}

/// Disk of curvature of the ellipse at parameter `t`.
pub fn osculating_disk(t: f64) -> ComplexMatrix {
    let (p, phi, rho) = ellipse_point(t);
    let center = p - C64::new(phi.cos(), phi.sin()) * rho;
    disk_at(center, rho)
}

/// Parameter of the touch point of [`odd_touch`].
pub const ODD_TOUCH_T: f64 = PI / 6.0;

/// Ellipse plus its disk of curvature at a non-vertex point. The two
/// support functions agree to second order at the touch normal and then
/// cross, so the maximal branches split at degree 3 at a fully round point.
pub fn odd_touch() -> ComplexMatrix {
    ellipse().direct_sum(&osculating_disk(ODD_TOUCH_T))
}

/// Touch point and normal angle of [`odd_touch`].
pub fn odd_touch_point() -> (C64, f64) {
    let (p, phi, _) = ellipse_point(ODD_TOUCH_T);
    (p, phi)
}

/// Ellipse plus its disk of curvature at the vertex `(2, 0)`; the disk
/// stays inside and touches at degree 4.
pub fn even_touch() -> ComplexMatrix {
    ellipse().direct_sum(&osculating_disk(0.0))
}

/// Ellipse plus disks of curvature at two antipodal non-vertex points.
pub fn double_odd_touch() -> ComplexMatrix {
    ellipse()
        .direct_sum(&osculating_disk(ODD_TOUCH_T))
        .direct_sum(&osculating_disk(ODD_TOUCH_T + PI))
}

/// Touch points of [`double_odd_touch`].
pub fn double_odd_touch_points() -> [C64; 2] {
    [ellipse_point(ODD_TOUCH_T).0, ellipse_point(ODD_TOUCH_T + PI).0]
}
