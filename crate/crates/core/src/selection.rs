//! Continuous selections `g` with `g(z)*A g(z) = z`.
//!
//! Every query point is written as `z = λz₀ + (1−λ)b` with `z₀` a fixed
//! base point and `b` on the boundary, then a preimage of the chord from
//! `z₀` to `b` is built from `x₀` and the boundary path vector at `b`.

use std::f64::consts::{PI, TAU};

use crate::boundary::{build_boundary_atlas, BoundaryArc, BoundaryAtlas, Degenerate};
use crate::chord::{chord_vector, ChordConstant};
use crate::config::ToleranceConfig;
use crate::continuity::{classify_continuity, ContinuityReport};
use crate::error::{Error, Result};
use crate::branches::top_eigenpair;
use crate::linalg::{CMatrix, CVector, ComplexMatrix, UnitVector, C64};
use crate::path::{canonical_boundary_path, CanonicalBoundaryPath, PathPosition, PathSegment};

/// Minimal distance, in grid steps, between the base normal and any
/// exceptional or flat normal (or its opposite).
pub const BASE_MARGIN_STEPS: f64 = 10.0;
/// Attempts at moving a bridge endpoint before giving up.
pub const MAX_REPICKS: usize = 8;
const NEAR_BASE: f64 = 1e-9;
/// Slack, relative to `‖A‖`, for points just outside `F(A)`.
const DOMAIN_SLACK: f64 = 1e-9;
const ANGLE_TOL: f64 = 1e-13;
const SIMPLE_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    NoCorner,
    Corner,
    Excised,
    Segment,
    Point,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::NoCorner => "no-corner",
            Strategy::Corner => "corner",
            Strategy::Excised => "excised",
            Strategy::Segment => "segment",
            Strategy::Point => "point",
        }
    }
}

/// `z = λz₀ + (1−λ)b` with `b = f_A(y)` on a boundary path.
#[derive(Debug, Clone)]
pub struct Radial {
    pub lambda: f64,
    pub t: f64,
    pub position: PathPosition,
    pub b: C64,
    pub y: CVector,
    /// `|z − (λz₀ + (1−λ)b)|`; positive only for points outside `F(A)`.
    pub miss: f64,
}

/// Directions seen from the base point, measured from the tangent so
/// that points of `F(A)` have angles in `[0, π]`.
#[derive(Debug, Clone, Copy)]
struct Frame {
    z0: C64,
    rot: C64,
    scale: f64,
}

impl Frame {
    fn new(z0: C64, theta_ref: f64, scale: f64) -> Self {
        Frame {
            z0,
            rot: C64::new(0.0, -1.0) * C64::from_polar(1.0, -theta_ref),
            scale,
        }
    }

    fn angle(&self, z: C64) -> f64 {
        let a = (self.rot * (z - self.z0)).arg();
        if a < -0.5 * PI {
            a + TAU
        } else {
            a
        }
    }

    fn near_base(&self, z: C64) -> bool {
        (z - self.z0).norm() <= NEAR_BASE * self.scale
    }
}

/// Sampled angles of a path, in path order.
#[derive(Debug, Clone)]
struct RadialIndex {
    angles: Vec<f64>,
    positions: Vec<PathPosition>,
    points: Vec<C64>,
    start: PathPosition,
    end: PathPosition,
    start_at_base: bool,
    end_at_base: bool,
}

impl RadialIndex {
    fn new(path: &CanonicalBoundaryPath, frame: &Frame) -> Result<Self> {
        let mut angles = Vec::new();
        let mut positions = Vec::new();
        let mut points = Vec::new();
        let mut hi = f64::NEG_INFINITY;
        for s in path.samples() {
            if frame.near_base(s.z) {
                continue;
            }
            hi = hi.max(frame.angle(s.z));
            angles.push(hi);
            positions.push(s.position);
            points.push(s.z);
        }
        if angles.is_empty() {
            return Err(Error::Tracking("boundary path never leaves the base point".into()));
        }
        let start = path.position(0.0);
        let end = path.position(1.0);
        Ok(RadialIndex {
            angles,
            positions,
            points,
            start,
            end,
            start_at_base: frame.near_base(path.eval(start)?.1),
            end_at_base: frame.near_base(path.eval(end)?.1),
        })
    }

    /// Boundary point of `path` on the ray from the base point through `z`.
    fn decompose(&self, path: &CanonicalBoundaryPath, frame: &Frame, z: C64) -> Result<Radial> {
        let d = z - frame.z0;
        let u = d / d.norm();
        let alpha = frame.angle(z);
        let side = |p: C64| -> f64 {
            let v = p - frame.z0;
            let m = v.norm();
            if m <= NEAR_BASE * frame.scale {
                0.0
            } else {
                (u.conj() * v).im / m
            }
        };
        let n = self.angles.len();
        let k = self.angles.partition_point(|&a| a <= alpha);
        let bracket = if k > 0 && k < n {
            Some((self.positions[k - 1], side(self.points[k - 1]), self.positions[k], side(self.points[k])))
        } else if k == 0 && self.start_at_base {
            Some((self.start, -1.0, self.positions[0], side(self.points[0])))
        } else if k == n && self.end_at_base {
            Some((self.positions[n - 1], side(self.points[n - 1]), self.end, 1.0))
        } else {
            None
        };
        let position = match bracket {
            None => self.positions[if k == 0 { 0 } else { n - 1 }],
            Some((lo, flo, hi, fhi)) => {
                if lo.segment != hi.segment {
                    if flo.abs() <= fhi.abs() {
                        lo
                    } else {
                        hi
                    }
                } else {
                    refine(path, frame, u, lo, flo, hi, fhi)?
                }
            }
        };
        let (y, b) = path.eval(position)?;
        let w = frame.z0 - b;
        let len2 = w.norm_sqr();
        if len2 <= (NEAR_BASE * frame.scale).powi(2) {
            return Err(Error::Tracking("ray meets the boundary at the base point".into()));
        }
        let lambda = (((z - b) * w.conj()).re / len2).clamp(0.0, 1.0);
        let miss = (z - (frame.z0 * lambda + b * (1.0 - lambda))).norm();
        if miss > 1e-7 * frame.scale {
            return Err(Error::OutsideRange);
        }
        Ok(Radial {
            lambda,
            t: path.t_of(position),
            position,
            b,
            y,
            miss,
        })
    }
}

/// Root of the side function between two positions of one segment.
fn refine(
    path: &CanonicalBoundaryPath,
    frame: &Frame,
    u: C64,
    lo: PathPosition,
    flo: f64,
    hi: PathPosition,
    fhi: f64,
) -> Result<PathPosition> {
    let seg = lo.segment;
    if let PathSegment::Flat(f) = &path.segments[seg] {
        let e = f.z_plus - f.z_minus;
        let den = (u.conj() * e).im;
        let s = if den.abs() > 0.0 {
            (-(u.conj() * (f.z_minus - frame.z0)).im / den).clamp(0.0, 1.0)
        } else {
            0.0
        };
        return Ok(PathPosition {
            segment: seg,
            param: s.sqrt().asin(),
        });
    }
    if flo >= 0.0 {
        return Ok(lo);
    }
    if fhi <= 0.0 {
        return Ok(hi);
    }
    let side = |param: f64| -> Result<f64> {
        let (_, b) = path.eval(PathPosition { segment: seg, param })?;
        let v = b - frame.z0;
        Ok((u.conj() * v).im / v.norm())
    };
    let (mut a, mut fa, mut b, mut fb) = (lo.param, flo, hi.param, fhi);
    for _ in 0..80 {
        let mut c = if fb != fa { b - fb * (b - a) / (fb - fa) } else { 0.5 * (a + b) };
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = side(c)?;
        if fc.abs() <= ANGLE_TOL || (b - a).abs() <= 1e-15 * (1.0 + c.abs()) {
            return Ok(PathPosition { segment: seg, param: c });
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
        } else {
            fa *= 0.5;
        }
        b = c;
        fb = fc;
    }
    Ok(PathPosition {
        segment: seg,
        param: if fa.abs() < fb.abs() { a } else { b },
    })
}

/// Replacement path near one weak-continuity failure.
#[derive(Debug, Clone)]
pub struct Bridge {
    pub center: C64,
    pub radius: f64,
    pub t_minus: f64,
    pub t_plus: f64,
    pub w_minus: C64,
    pub w_plus: C64,
    /// Orthonormal basis of `span{x₀, u⁺, u⁻}`.
    pub basis: CMatrix,
    pub compression: ComplexMatrix,
    pub path: CanonicalBoundaryPath,
    index: RadialIndex,
}

#[derive(Debug, Clone)]
struct RadialField {
    corner: bool,
    x0: CVector,
    frame: Frame,
    theta_ref: f64,
    path: CanonicalBoundaryPath,
    index: RadialIndex,
    bridges: Vec<Bridge>,
}

#[derive(Debug, Clone)]
enum FieldKind {
    Point { x: CVector, z: C64 },
    Segment { xa: CVector, xb: CVector, a: C64, b: C64 },
    Radial(Box<RadialField>),
}

/// A selection of the inverse of `x ↦ x*Ax` on its domain.
#[derive(Debug, Clone)]
pub struct SelectionField {
    atlas: BoundaryAtlas,
    strategy: Strategy,
    kind: FieldKind,
    tol: f64,
}

impl SelectionField {
    pub fn matrix(&self) -> &ComplexMatrix {
        self.atlas.matrix()
    }

    pub fn atlas(&self) -> &BoundaryAtlas {
        &self.atlas
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// Residual bound `selection_residual·‖A‖`.
    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Base point `z₀` and its preimage `x₀`.
    pub fn base(&self) -> (C64, &CVector) {
        match &self.kind {
            FieldKind::Point { x, z } => (*z, x),
            FieldKind::Segment { xa, a, .. } => (*a, xa),
            FieldKind::Radial(r) => (r.frame.z0, &r.x0),
        }
    }

    /// Outward normal angle used to measure directions from `z₀`.
    pub fn base_normal(&self) -> Option<f64> {
        match &self.kind {
            FieldKind::Radial(r) => Some(r.theta_ref),
            _ => None,
        }
    }

    pub fn path(&self) -> Option<&CanonicalBoundaryPath> {
        match &self.kind {
            FieldKind::Radial(r) => Some(&r.path),
            _ => None,
        }
    }

    pub fn bridges(&self) -> &[Bridge] {
        match &self.kind {
            FieldKind::Radial(r) => &r.bridges,
            _ => &[],
        }
    }

    /// Excised open disks as `(center, radius)`.
    pub fn excised(&self) -> Vec<(C64, f64)> {
        self.bridges().iter().map(|b| (b.center, b.radius)).collect()
    }

    /// Whether `z` lies in `F(A)` (up to `1e-9·‖A‖`) and
    /// outside every excised disk.
    pub fn in_domain(&self, z: C64) -> bool {
        if self.excised().iter().any(|(c, r)| (z - c).norm() < *r) {
            return false;
        }
        match &self.kind {
            FieldKind::Point { z: p, .. } => (z - p).norm() <= self.tol,
            FieldKind::Segment { a, b, .. } => segment_coordinate(z, *a, *b, self.tol).is_some(),
            FieldKind::Radial(r) => {
                (z - r.frame.z0).norm() <= 1e-14 * r.frame.scale
                    || r.index
                        .decompose(&r.path, &r.frame, z)
                        .is_ok_and(|d| d.miss <= DOMAIN_SLACK * r.frame.scale)
            }
        }
    }

    /// Radial decomposition of `z` against the main boundary path.
    pub fn decompose(&self, z: C64) -> Result<Radial> {
        match &self.kind {
            FieldKind::Radial(r) => r.index.decompose(&r.path, &r.frame, z),
            _ => Err(Error::Unsupported("field has no boundary path".into())),
        }
    }

    /// `g(z)`, checked against the residual bound.
    pub fn query(&self, z: C64) -> Result<UnitVector> {
        let g = self.evaluate(z)?;
        let residual = (self.matrix().quad(&g) - z).norm();
        if residual > self.tol {
            return Err(Error::ResidualExceeded {
                re: z.re,
                im: z.im,
                residual,
            });
        }
        UnitVector::new(g)
    }

    /// `g(z)` without the residual check.
    pub fn evaluate(&self, z: C64) -> Result<CVector> {
        match &self.kind {
            FieldKind::Point { x, z: p } => {
                if (z - p).norm() > self.tol {
                    return Err(Error::OutsideRange);
                }
                Ok(x.clone())
            }
            FieldKind::Segment { xa, xb, a, b } => {
                let l = segment_coordinate(z, *a, *b, self.tol).ok_or(Error::OutsideRange)?;
                Ok(xa * C64::new(l.sqrt(), 0.0) + xb * C64::new((1.0 - l).sqrt(), 0.0))
            }
            FieldKind::Radial(r) => self.radial_query(r, z),
        }
    }

    fn radial_query(&self, r: &RadialField, z: C64) -> Result<CVector> {
        for br in &r.bridges {
            if (z - br.center).norm() < br.radius {
                return Err(Error::Excluded { re: z.re, im: z.im });
            }
        }
        if (z - r.frame.z0).norm() <= 1e-14 * r.frame.scale {
            return Ok(r.x0.clone());
        }
        let mut rad = r.index.decompose(&r.path, &r.frame, z)?;
        for br in &r.bridges {
            if rad.t > br.t_minus && rad.t < br.t_plus {
                let local = br.index.decompose(&br.path, &r.frame, z)?;
                rad = Radial {
                    y: &br.basis * &local.y,
                    ..local
                };
                break;
            }
        }
        if r.corner {
            let g = &r.x0 * C64::new(rad.lambda.sqrt(), 0.0) + &rad.y * C64::new((1.0 - rad.lambda).sqrt(), 0.0);
            let n = g.norm();
            return Ok(g / C64::new(n, 0.0));
        }
        chord_preimage(self.matrix(), &r.x0, &rad.y, rad.lambda, z, self.tol)
    }
}

/// The chord vector from `x₀` to `y` with `β = +1`, falling back to
/// `β = sign(<x₀, y>)` when the residual check fails.
fn chord_preimage(a: &ComplexMatrix, x0: &CVector, y: &CVector, lambda: f64, z: C64, tol: f64) -> Result<CVector> {
    let mut residual = f64::INFINITY;
    let fallback = if x0.dotc(y).re < 0.0 { -1.0 } else { 1.0 };
    for beta in [1.0, fallback] {
        let h = chord_vector(x0, y, C64::new(beta, 0.0), lambda, ChordConstant::Squared, true)?;
        let h = &h / C64::new(h.norm(), 0.0);
        residual = (a.quad(&h) - z).norm();
        if residual <= tol {
            return Ok(h);
        }
        if fallback == 1.0 {
            break;
        }
    }
    Err(Error::ResidualExceeded {
        re: z.re,
        im: z.im,
        residual,
    })
}

/// `λ` with `z = λa + (1−λ)b`, if `z` is within `tol` of the segment.
fn segment_coordinate(z: C64, a: C64, b: C64, tol: f64) -> Option<f64> {
    let d = a - b;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return ((z - a).norm() <= tol).then_some(1.0);
    }
    let l = ((z - b) * d.conj()).re / len2;
    let off = (z - b - d * l).norm();
    let len = len2.sqrt();
    if off > tol || l * len < -tol || (l - 1.0) * len > tol {
        return None;
    }
    Some(l.clamp(0.0, 1.0))
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Grid normal farthest from every exceptional normal, every flat normal
/// and their opposites.
pub fn choose_base_normal(atlas: &BoundaryAtlas) -> Result<f64> {
    let ba = atlas.branches();
    let mut forbidden: Vec<f64> = atlas.maximal_exceptional().map(|e| e.theta).collect();
    for (_, arc) in atlas.flats() {
        if let BoundaryArc::Flat { theta, .. } = arc {
            forbidden.push(*theta);
        }
    }
    let opposite: Vec<f64> = forbidden.iter().map(|t| t + PI).collect();
    forbidden.extend(opposite);
    if forbidden.is_empty() {
        return Ok(ba.theta(0));
    }
    let (best, margin) = (0..ba.grid_size())
        .map(|i| {
            let t = ba.theta(i);
            let m = forbidden.iter().map(|&f| circular_distance(t, f)).fold(f64::INFINITY, f64::min);
            (t, m)
        })
        .max_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap();
    if margin < BASE_MARGIN_STEPS * ba.step() {
        return Err(Error::Unsupported(format!(
            "no base normal keeps {BASE_MARGIN_STEPS} grid steps from exceptional and flat normals"
        )));
    }
    Ok(best)
}

fn top_vector(atlas: &BoundaryAtlas, theta: f64) -> Result<CVector> {
    let v = atlas.branches().evaluate(theta)?;
    let top = (0..v.lambda.len())
        .max_by(|&p, &q| v.lambda[p].total_cmp(&v.lambda[q]))
        .unwrap();
    let x = v.vectors[top].clone();
    let n = x.norm();
    Ok(x / C64::new(n, 0.0))
}

fn radial_field(atlas: &BoundaryAtlas, corner: bool, x0: CVector, theta_ref: f64, start: f64, end: f64) -> Result<RadialField> {
    let z0 = atlas.matrix().quad(&x0);
    let frame = Frame::new(z0, theta_ref, atlas.scale());
    let path = canonical_boundary_path(atlas, start, end, &UnitVector::new(x0.clone())?, atlas.config().seed)?;
    let index = RadialIndex::new(&path, &frame)?;
    Ok(RadialField {
        corner,
        x0,
        frame,
        theta_ref,
        path,
        index,
        bridges: Vec::new(),
    })
}

fn field(atlas: &BoundaryAtlas, strategy: Strategy, kind: FieldKind) -> SelectionField {
    SelectionField {
        atlas: atlas.clone(),
        strategy,
        kind,
        tol: atlas.config().selection_residual * atlas.scale(),
    }
}

fn require_full(atlas: &BoundaryAtlas) -> Result<()> {
    if atlas.is_full() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("numerical range is a {}", atlas.degenerate_kind())))
    }
}

fn no_corner_base(atlas: &BoundaryAtlas) -> Result<RadialField> {
    let theta = choose_base_normal(atlas)?;
    let x0 = top_vector(atlas, theta)?;
    radial_field(atlas, false, x0, theta, theta, theta + TAU)
}

/// Selection on a numerical range without corners or weak failures.
pub fn select_no_corner(atlas: &BoundaryAtlas, report: &ContinuityReport) -> Result<SelectionField> {
    require_full(atlas)?;
    if !atlas.corners.is_empty() {
        return Err(Error::Unsupported("numerical range has a corner".into()));
    }
    if report.has_weak_failures() {
        return Err(Error::MissingEpsilon);
    }
    let r = no_corner_base(atlas)?;
    Ok(field(atlas, Strategy::NoCorner, FieldKind::Radial(Box::new(r))))
}

fn corner_base(atlas: &BoundaryAtlas) -> Result<RadialField> {
    let s = atlas.scale();
    let c = *atlas.corners.first().ok_or_else(|| Error::Unsupported("no corner".into()))?;
    let arcs = &atlas.arcs;
    let m = arcs.len();
    let k = (0..m)
        .find(|&k| {
            matches!((&arcs[k], &arcs[(k + 1) % m]),
                (BoundaryArc::Flat { z_plus, .. }, BoundaryArc::Flat { z_minus, .. })
                    if (z_plus - c).norm() <= 1e-7 * s && (z_minus - c).norm() <= 1e-7 * s)
        })
        .ok_or_else(|| Error::Tracking("corner is not between two flats".into()))?;
    let (t1, x0) = match &arcs[k] {
        BoundaryArc::Flat { theta, x_plus, .. } => (*theta, x_plus.as_vector().clone()),
        _ => unreachable!(),
    };
    let mut t2 = match &arcs[(k + 1) % m] {
        BoundaryArc::Flat { theta, .. } => *theta,
        _ => unreachable!(),
    };
    while t2 <= t1 {
        t2 += TAU;
    }
    let a = atlas.matrix();
    let mu = a.quad(&x0);
    let r1 = (a.as_matrix() * &x0 - &x0 * mu).norm();
    let r2 = (a.adjoint().as_matrix() * &x0 - &x0 * mu.conj()).norm();
    let residual = r1.max(r2);
    if residual > 1e-8 * s {
        return Err(Error::CornerNotNormal { residual });
    }
    let r = radial_field(atlas, true, x0, 0.5 * (t1 + t2), t2, t1 + TAU)?;
    let overlap = r
        .path
        .samples()
        .iter()
        .map(|p| r.path.eval(p.position).map(|(y, _)| r.x0.dotc(&y).norm()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    if overlap > 1e-8 {
        return Err(Error::Unsupported(format!(
            "corner path is not orthogonal to the corner vector ({overlap:.3e})"
        )));
    }
    Ok(r)
}

/// Selection anchored at a corner point.
pub fn select_corner(atlas: &BoundaryAtlas, report: &ContinuityReport) -> Result<SelectionField> {
    require_full(atlas)?;
    if report.has_weak_failures() {
        return Err(Error::MissingEpsilon);
    }
    let r = corner_base(atlas)?;
    Ok(field(atlas, Strategy::Corner, FieldKind::Radial(Box::new(r))))
}

/// Selection on `F(A)` minus open disks of radius at most `epsilon` about
/// every weak-continuity failure.
pub fn select_excised(atlas: &BoundaryAtlas, report: &ContinuityReport, epsilon: f64) -> Result<SelectionField> {
    require_full(atlas)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidConfig(format!("excision radius {epsilon} must be positive")));
    }
    let mut r = if atlas.corners.is_empty() {
        no_corner_base(atlas)?
    } else {
        corner_base(atlas)?
    };
    if !report.has_weak_failures() {
        let strategy = if r.corner { Strategy::Corner } else { Strategy::NoCorner };
        return Ok(field(atlas, strategy, FieldKind::Radial(Box::new(r))));
    }
    let s = atlas.scale();
    let others: Vec<C64> = atlas
        .maximal_exceptional()
        .flat_map(|e| [e.z, e.z_other])
        .chain(atlas.corners.iter().copied())
        .collect();
    let mut failures: Vec<(f64, usize, C64)> = Vec::new();
    for f in &report.weak_failures {
        let mut best: Option<(f64, usize, f64)> = None;
        for &(t, seg) in r.path.discontinuities() {
            let d = (r.path.at(t)?.1 - f.z).norm();
            if best.is_none_or(|b| d < b.2) {
                best = Some((t, seg, d));
            }
        }
        match best {
            Some((t, seg, d)) if d <= 1e-6 * s => failures.push((t, seg, f.z)),
            _ => return Err(Error::Excision(format!("failure at {} is not a path discontinuity", f.z))),
        }
    }
    failures.sort_by(|a, b| a.0.total_cmp(&b.0));
    for &(t, seg, w) in &failures {
        let mut radius = epsilon.min(0.45 * (w - r.frame.z0).norm());
        for o in &others {
            let d = (o - w).norm();
            if d > 1e-6 * s {
                radius = radius.min(0.45 * d);
            }
        }
        let bridge = build_bridge(atlas, &mut r, t, seg, w, radius)?;
        r.bridges.push(bridge);
    }
    Ok(field(atlas, Strategy::Excised, FieldKind::Radial(Box::new(r))))
}

/// Path parameter where the boundary leaves the disk of `radius` about
/// `w`, searching away from `t` in `direction`.
fn disk_crossing(path: &CanonicalBoundaryPath, t: f64, w: C64, radius: f64, direction: f64) -> Result<f64> {
    let dist = |s: f64| -> Result<f64> { Ok((path.at(s)?.1 - w).norm() - radius) };
    let limit = if direction < 0.0 { 0.0 } else { 1.0 };
    let mut step = 1e-4;
    let mut far = loop {
        let cand = (t + direction * step).clamp(0.0, 1.0);
        if dist(cand)? > 0.0 {
            break cand;
        }
        if cand == limit {
            return Err(Error::Excision("disk contains the whole boundary path".into()));
        }
        step *= 1.5;
    };
    let mut near = t;
    for _ in 0..100 {
        let mid = 0.5 * (near + far);
        if dist(mid)? > 0.0 {
            far = mid;
        } else {
            near = mid;
        }
        if (far - near).abs() < 1e-15 {
            break;
        }
    }
    Ok(far)
}

fn round_theta(path: &CanonicalBoundaryPath, t: f64) -> Result<(PathPosition, f64)> {
    let pos = path.position(t);
    match &path.segments[pos.segment] {
        PathSegment::Round(_) => Ok((pos, pos.param)),
        PathSegment::Flat(_) => Err(Error::Excision("bridge endpoint falls on a flat portion".into())),
    }
}

fn simple_top(a3: &ComplexMatrix, theta: f64) -> Result<bool> {
    let (_, _, gap) = top_eigenpair(a3.rotate(theta).real_part().as_matrix())?;
    Ok(gap > SIMPLE_GAP * a3.scale().max(f64::MIN_POSITIVE))
}

fn build_bridge(atlas: &BoundaryAtlas, r: &mut RadialField, t: f64, seg: usize, w: C64, radius: f64) -> Result<Bridge> {
    let a = atlas.matrix();
    let cfg = atlas.config();
    let (mut rm, mut rp) = (radius, radius);
    for _ in 0..MAX_REPICKS {
        let tm = disk_crossing(&r.path, t, w, rm, -1.0)?;
        let tp = disk_crossing(&r.path, t, w, rp, 1.0)?;
        let (pm, theta_m) = round_theta(&r.path, tm)?;
        let (pp, theta_p) = round_theta(&r.path, tp)?;
        let (um, wm) = r.path.eval(pm)?;
        let (up, wp) = r.path.eval(pp)?;
        let (a3, v) = a.compress(&[r.x0.clone(), up.clone(), um.clone()])?;
        let ok_m = simple_top(&a3, theta_m)?;
        let ok_p = simple_top(&a3, theta_p)?;
        if !ok_m || !ok_p {
            if !ok_m {
                rm *= 0.7;
            }
            if !ok_p {
                rp *= 0.7;
            }
            continue;
        }
        let atlas3 = build_boundary_atlas(&a3, &cfg.with_grid(atlas.grid_size()))?;
        if classify_continuity(&atlas3)?.has_weak_failures() {
            return Err(Error::Excision("compression has a weak-continuity failure".into()));
        }
        let x03 = v.adjoint() * &r.x0;
        let mut path = canonical_boundary_path(&atlas3, theta_m, theta_p, &UnitVector::new(x03)?, cfg.seed)?;
        let start = &v * path.at(0.0)?.0;
        let c = match_phase(&start, &um, r.corner)?;
        path.rotate_from(0, c);
        let end = &v * path.at(1.0)?.0;
        let c = match_phase(&up, &end, r.corner)?;
        r.path.rotate_from(seg, c);
        let index = RadialIndex::new(&path, &r.frame)?;
        return Ok(Bridge {
            center: w,
            radius: rm.min(rp),
            t_minus: tm,
            t_plus: tp,
            w_minus: wm,
            w_plus: wp,
            basis: v,
            compression: a3,
            path,
            index,
        });
    }
    Err(Error::Excision(format!("bridge endpoints near {w} stay degenerate after {MAX_REPICKS} attempts")))
}

/// Unimodular `c` with `c·from = to`, rounded to `±1` unless `any_phase`.
fn match_phase(from: &CVector, to: &CVector, any_phase: bool) -> Result<C64> {
    let o = from.dotc(to);
    if (o.norm() - 1.0).abs() > 1e-6 {
        return Err(Error::Excision(format!("bridge endpoint mismatch (|<u, γ>| = {:.6})", o.norm())));
    }
    Ok(if any_phase {
        o / o.norm()
    } else if o.re < 0.0 {
        C64::new(-1.0, 0.0)
    } else {
        C64::new(1.0, 0.0)
    })
}

fn degenerate_field(atlas: &BoundaryAtlas) -> Result<SelectionField> {
    let a = atlas.matrix();
    match &atlas.degenerate {
        Degenerate::Point { .. } => {
            let e = a.real_part().hermitian_eigs()?;
            let x = e.vector(e.len() - 1);
            let z = a.quad(&x);
            Ok(field(atlas, Strategy::Point, FieldKind::Point { x, z }))
        }
        Degenerate::Segment { a: p, b: q } => {
            let d = q - p;
            let h = a.rotate(d.arg()).real_part().hermitian_eigs()?;
            let xa = h.vector(0);
            let xb = h.vector(h.len() - 1);
            let (za, zb) = (a.quad(&xa), a.quad(&xb));
            Ok(field(atlas, Strategy::Segment, FieldKind::Segment { xa, xb, a: za, b: zb }))
        }
        Degenerate::Full => Err(Error::Unsupported("numerical range is full-dimensional".into())),
    }
}

/// Builds the boundary atlas of `a` and dispatches to the matching
/// construction. `epsilon` is required when weak failures are present.
pub fn select(a: &ComplexMatrix, epsilon: Option<f64>, cfg: &ToleranceConfig) -> Result<SelectionField> {
    cfg.validate()?;
    let atlas = build_boundary_atlas(a, cfg)?;
    select_with_atlas(&atlas, epsilon)
}

pub fn select_with_atlas(atlas: &BoundaryAtlas, epsilon: Option<f64>) -> Result<SelectionField> {
    if !atlas.is_full() {
        return degenerate_field(atlas);
    }
    let report = classify_continuity(atlas)?;
    if report.has_weak_failures() {
        let eps = epsilon.ok_or(Error::MissingEpsilon)?;
        return select_excised(atlas, &report, eps);
    }
    if atlas.corners.is_empty() {
        select_no_corner(atlas, &report)
    } else {
        select_corner(atlas, &report)
    }
}

/// `(λ, t)` with `z = λz₀ + (1−λ)f_A(y(t))` along `path`, where `z₀` has
/// outward normal `theta_ref`.
pub fn radial_decompose(z: C64, z0: C64, theta_ref: f64, path: &CanonicalBoundaryPath) -> Result<(f64, f64)> {
    let frame = Frame::new(z0, theta_ref, path.matrix().scale());
    if frame.near_base(z) {
        return Err(Error::Unsupported("query coincides with the base point".into()));
    }
    let index = RadialIndex::new(path, &frame)?;
    let r = index.decompose(path, &frame, z)?;
    Ok((r.lambda, r.t))
}
