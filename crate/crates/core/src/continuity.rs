//! Weak and strong continuity of the inverse map `z ↦ f_A⁻¹(z)` at the
//! exceptional boundary points.
//!
//! Only exceptional points on the boundary can fail. A flat endpoint or a
//! corner has a single preimage up to phase, so a degree-1 split never
//! breaks strong continuity; a split of degree `k ≥ 2` does, unless the
//! point lies inside a flat portion. Weak continuity fails exactly at
//! fully round points where the split degree is odd and at least three.

use crate::boundary::{BoundaryAtlas, BoundaryPointKind, SplitDegree};
use crate::error::{Error, Result};
use crate::linalg::C64;

/// A boundary point where continuity fails.
#[derive(Debug, Clone, Copy)]
pub struct Failure {
    pub z: C64,
    pub theta: f64,
    pub split_degree: SplitDegree,
}

/// Verdict at one critical point of a maximal exceptional argument.
#[derive(Debug, Clone, Copy)]
pub struct PointRecord {
    pub z: C64,
    pub theta: f64,
    pub split_degree: SplitDegree,
    pub kind: BoundaryPointKind,
    pub strongly_continuous: bool,
    pub weakly_continuous: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ContinuityReport {
    pub strong_failures: Vec<Failure>,
    pub weak_failures: Vec<Failure>,
    pub points: Vec<PointRecord>,
}

impl ContinuityReport {
    pub fn has_weak_failures(&self) -> bool {
        !self.weak_failures.is_empty()
    }
}

/// Open subset of the plane.
#[derive(Debug, Clone)]
pub enum Region {
    Disk { center: C64, radius: f64 },
    /// Interior of a convex polygon with counterclockwise vertices.
    ConvexPolygon(Vec<C64>),
}

impl Region {
    pub fn contains(&self, z: C64) -> bool {
        match self {
            Region::Disk { center, radius } => (z - center).norm() < *radius,
            Region::ConvexPolygon(v) => {
                let m = v.len();
                m >= 3
                    && (0..m).all(|i| {
                        let e = v[(i + 1) % m] - v[i];
                        let w = z - v[i];
                        e.re * w.im - e.im * w.re > 0.0
                    })
            }
        }
    }
}

/// Classifies every critical point of every maximal exceptional argument.
pub fn classify_continuity(atlas: &BoundaryAtlas) -> Result<ContinuityReport> {
    let mut report = ContinuityReport::default();
    if !atlas.is_full() {
        return Ok(report);
    }
    let tol = 1e-7 * atlas.scale();
    for e in atlas.maximal_exceptional() {
        if e.split_degree == SplitDegree::Unresolved {
            return Err(Error::UnresolvedSplitDegree { theta: e.theta });
        }
        let mut zs = vec![e.z];
        if (e.z_other - e.z).norm() > tol {
            zs.push(e.z_other);
        }
        for z in zs {
            if report.points.iter().any(|p| (p.z - z).norm() <= tol) {
                continue;
            }
            let kind = atlas.classify_boundary_point(z)?;
            let splits_here = matches!(e.split_degree, SplitDegree::Finite(k) if k >= 2);
            let strongly = kind == BoundaryPointKind::FlatInterior || !splits_here;
            let weakly = !(kind == BoundaryPointKind::FullyRound && e.split_degree.is_odd_at_least_three());
            let failure = Failure {
                z,
                theta: e.theta,
                split_degree: e.split_degree,
            };
            if !strongly {
                report.strong_failures.push(failure);
            }
            if !weakly {
                report.weak_failures.push(failure);
            }
            report.points.push(PointRecord {
                z,
                theta: e.theta,
                split_degree: e.split_degree,
                kind,
                strongly_continuous: strongly,
                weakly_continuous: weakly,
            });
        }
    }
    Ok(report)
}

/// Whether `region` contains a weak-continuity failure, so that no
/// continuous selection exists on it.
pub fn is_selection_obstructed(report: &ContinuityReport, region: &Region) -> bool {
    report.weak_failures.iter().any(|f| region.contains(f.z))
}
