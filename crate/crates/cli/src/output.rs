//! Serializable views of library results.

use nrsel::boundary::{BoundaryArc, BoundaryAtlas};
use nrsel::continuity::{ContinuityReport, Failure};
use nrsel::oracle::{AuditComparison, AuditReport, OpennessProbe};
use nrsel::{ToleranceConfig, C64};
use serde::{Deserialize, Serialize};

use crate::matrix_file::MatrixFile;

pub fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn components(v: &nrsel::linalg::CVector) -> Vec<f64> {
    v.iter().flat_map(|c| [c.re, c.im]).collect()
}

#[derive(Serialize)]
pub struct MatrixInfo {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl From<&MatrixFile> for MatrixInfo {
    fn from(f: &MatrixFile) -> Self {
        Self { n: f.n, name: f.name.clone() }
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ArcView {
    Round { id: usize, branch: usize, theta_start: f64, theta_end: f64 },
    Flat { id: usize, theta: f64, z_minus: [f64; 2], z_plus: [f64; 2] },
}

#[derive(Serialize)]
pub struct ExceptionalView {
    pub theta: f64,
    pub z: [f64; 2],
    pub z_other: [f64; 2],
    pub branch_pair: [usize; 2],
    pub split_degree: nrsel::boundary::SplitDegree,
    pub involves_max: bool,
}

#[derive(Serialize)]
pub struct AtlasView {
    pub matrix: MatrixInfo,
    pub config: ToleranceConfig,
    pub degenerate_kind: &'static str,
    pub diameter: f64,
    pub arcs: Vec<ArcView>,
    pub exceptional: Vec<ExceptionalView>,
    pub corners: Vec<[f64; 2]>,
    pub convexity_violation: f64,
    pub support_agreement: f64,
    pub warnings: Vec<String>,
}

impl AtlasView {
    pub fn new(file: &MatrixFile, atlas: &BoundaryAtlas) -> Self {
        let arcs = atlas
            .arcs
            .iter()
            .enumerate()
            .map(|(id, arc)| match arc {
                BoundaryArc::Round {
                    branch,
                    theta_start,
                    theta_end,
                } => ArcView::Round {
                    id,
                    branch: *branch,
                    theta_start: *theta_start,
                    theta_end: *theta_end,
                },
                BoundaryArc::Flat {
                    theta, z_minus, z_plus, ..
                } => ArcView::Flat {
                    id,
                    theta: *theta,
                    z_minus: pair(*z_minus),
                    z_plus: pair(*z_plus),
                },
            })
            .collect();
        let exceptional = atlas
            .exceptional
            .iter()
            .map(|e| ExceptionalView {
                theta: e.theta,
                z: pair(e.z),
                z_other: pair(e.z_other),
                branch_pair: [e.branch_pair.0, e.branch_pair.1],
                split_degree: e.split_degree,
                involves_max: e.involves_max,
            })
            .collect();
        let full = atlas.is_full();
        Self {
            matrix: file.into(),
            config: *atlas.config(),
            degenerate_kind: atlas.degenerate_kind(),
            diameter: atlas.diameter(),
            arcs,
            exceptional,
            corners: atlas.corners.iter().map(|&z| pair(z)).collect(),
            convexity_violation: if full { atlas.convexity_violation() } else { 0.0 },
            support_agreement: if full { atlas.support_agreement() } else { 0.0 },
            warnings: atlas.warnings.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct FailureView {
    pub z: [f64; 2],
    pub theta: f64,
    pub split_degree: nrsel::boundary::SplitDegree,
}

impl From<&Failure> for FailureView {
    fn from(f: &Failure) -> Self {
        Self {
            z: pair(f.z),
            theta: f.theta,
            split_degree: f.split_degree,
        }
    }
}

#[derive(Serialize)]
pub struct PointView {
    pub z: [f64; 2],
    pub theta: f64,
    pub split_degree: nrsel::boundary::SplitDegree,
    pub kind: nrsel::boundary::BoundaryPointKind,
    pub strongly_continuous: bool,
    pub weakly_continuous: bool,
}

#[derive(Serialize)]
pub struct ClassifyView {
    pub matrix: MatrixInfo,
    pub strong_failures: Vec<FailureView>,
    pub weak_failures: Vec<FailureView>,
    pub points: Vec<PointView>,
}

impl ClassifyView {
    pub fn new(file: &MatrixFile, r: &ContinuityReport) -> Self {
        Self {
            matrix: file.into(),
            strong_failures: r.strong_failures.iter().map(Into::into).collect(),
            weak_failures: r.weak_failures.iter().map(Into::into).collect(),
            points: r
                .points
                .iter()
                .map(|p| PointView {
                    z: pair(p.z),
                    theta: p.theta,
                    split_degree: p.split_degree,
                    kind: p.kind,
                    strongly_continuous: p.strongly_continuous,
                    weakly_continuous: p.weakly_continuous,
                })
                .collect(),
        }
    }
}

/// One evaluated grid point of a selection file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridPoint {
    pub i: i64,
    pub j: i64,
    pub z: [f64; 2],
    /// Real and imaginary parts of `g(z)`, interleaved.
    pub g: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Excised {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditView {
    pub coarse_h: f64,
    pub fine_h: f64,
    pub coarse_jump: f64,
    pub fine_jump: f64,
    pub ratio: f64,
    pub coarse_pairs: usize,
    pub fine_pairs: usize,
    pub max_residual: f64,
    pub failures: usize,
    pub passed: bool,
}

impl From<&AuditComparison> for AuditView {
    fn from(c: &AuditComparison) -> Self {
        let r = |a: &AuditReport| a.max_residual;
        Self {
            coarse_h: c.coarse.h,
            fine_h: c.fine.h,
            coarse_jump: c.coarse.max_jump,
            fine_jump: c.fine.max_jump,
            ratio: c.ratio,
            coarse_pairs: c.coarse.pairs,
            fine_pairs: c.fine.pairs,
            max_residual: r(&c.coarse).max(r(&c.fine)),
            failures: c.coarse.failures.len() + c.fine.failures.len(),
            passed: c.passed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub points: usize,
    pub skipped: usize,
    pub max_residual: f64,
    pub max_norm_deviation: f64,
    pub tolerance: f64,
    pub audit: Option<AuditView>,
}

/// Contents of a selection file written by `select` and read by `verify`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionFile {
    pub matrix: MatrixFile,
    pub config: ToleranceConfig,
    pub strategy: String,
    pub epsilon: Option<f64>,
    pub grid: usize,
    pub base: [f64; 2],
    pub excised: Vec<Excised>,
    pub summary: SelectionSummary,
    pub points: Vec<GridPoint>,
}

#[derive(Serialize)]
pub struct ApproachView {
    pub label: String,
    pub points: Vec<[f64; 2]>,
    pub distances: Vec<f64>,
    pub residuals: Vec<f64>,
}

#[derive(Serialize)]
pub struct ProbeView {
    pub matrix: MatrixInfo,
    pub target: [f64; 2],
    pub normal: f64,
    pub verdict: &'static str,
    pub distance: f64,
    pub witness: Vec<f64>,
    pub approaches: Vec<ApproachView>,
}

impl ProbeView {
    pub fn new(file: &MatrixFile, p: &OpennessProbe) -> Self {
        Self {
            matrix: file.into(),
            target: pair(p.target),
            normal: p.normal,
            verdict: p.verdict.as_str(),
            distance: p.distance,
            witness: components(p.witness.as_vector()),
            approaches: p
                .approaches
                .iter()
                .map(|a| ApproachView {
                    label: a.label.clone(),
                    points: a.points.iter().map(|&z| pair(z)).collect(),
                    distances: a.distances.clone(),
                    residuals: a.residuals.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
pub struct Offender {
    pub i: i64,
    pub j: i64,
    pub z: [f64; 2],
    pub residual: f64,
    pub norm_deviation: f64,
}

#[derive(Serialize)]
pub struct VerifyView {
    pub matrix: MatrixInfo,
    pub points: usize,
    pub tolerance: f64,
    pub max_residual: f64,
    pub max_norm_deviation: f64,
    pub worst: Option<Offender>,
    pub grid_jump: f64,
    pub grid_jump_coarse: f64,
    pub audit: Option<AuditView>,
    pub passed: bool,
}
