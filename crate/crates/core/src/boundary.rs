//! Boundary atlas of `F(A)`: exceptional arguments, split degrees, round
//! arcs and flat portions of the boundary, corners, and point
//! classification.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::branches::{critical_curve, CLUSTER_TOL, track_branches, BranchAtlas, BranchValues};
use crate::config::ToleranceConfig;
use crate::error::{Error, Result};
use crate::linalg::{CVector, ComplexMatrix, UnitVector, C64};

/// Inner edge of the split-degree fitting window, in grid steps.
pub const SPLIT_WINDOW_INNER: f64 = 2.0;
/// Outer edge of the split-degree fitting window, in grid steps.
pub const SPLIT_WINDOW_OUTER: f64 = 32.0;
/// Largest split degree the estimator reports as resolved.
pub const MAX_RESOLVED_DEGREE: u32 = 6;
/// Number of grid doublings attempted when tracking or fitting fails.
pub const MAX_REFINEMENTS: usize = 4;

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const THETA_TOL: f64 = 1e-11;
/// Relative size of eigenvalue gaps indistinguishable from rounding.
const NOISE_FLOOR: f64 = 1e-12;
/// Relative gap below which branch eigenvalues are resolved only through
/// the derivative split, and so are unfit for gap fitting.
const FIT_FLOOR: f64 = 10.0 * CLUSTER_TOL;
/// Relative gap at a grid sample worth refining as a possible touch.
const TOUCH_CANDIDATE: f64 = 1e-2;
/// Relative length below which a round arc is a single point.
const POINT_ARC: f64 = 1e-9;

/// Degree of the first differing Taylor coefficient of two branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitDegree {
    Finite(u32),
    /// The branches coincide on the fitting window.
    Infinite,
    /// Above the resolvable range of the numeric estimator.
    Unresolved,
}

impl SplitDegree {
    pub fn is_odd_at_least_three(self) -> bool {
        matches!(self, SplitDegree::Finite(k) if k >= 3 && k % 2 == 1)
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            SplitDegree::Finite(k) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for SplitDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitDegree::Finite(k) => write!(f, "{k}"),
            SplitDegree::Infinite => write!(f, "inf"),
            SplitDegree::Unresolved => write!(f, ">={}", MAX_RESOLVED_DEGREE + 1),
        }
    }
}

impl Serialize for SplitDegree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SplitDegree::Finite(k) => s.serialize_u32(*k),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

/// An angle where two distinct eigenvalue branches coincide.
#[derive(Debug, Clone)]
pub struct ExceptionalArgument {
    /// Angle in `[θ₀, θ₀ + 2π)` of the branch atlas.
    pub theta: f64,
    /// Branch ids on the base lap; `branch_pair.0` has the smaller
    /// derivative at `theta`.
    pub branch_pair: (usize, usize),
    pub split_degree: SplitDegree,
    /// Critical point of the first branch.
    pub z: C64,
    /// Critical point of the second branch; equals `z` unless the degree is 1.
    pub z_other: C64,
    pub involves_max: bool,
}

/// One piece of the boundary, in counterclockwise order.
#[derive(Debug, Clone)]
pub enum BoundaryArc {
    /// Critical curve of a maximal branch over `[theta_start, theta_end]`;
    /// the end may exceed the base lap.
    Round {
        branch: usize,
        theta_start: f64,
        theta_end: f64,
    },
    /// Segment with outward normal `e^{iθ}` traversed from `z_minus` to `z_plus`.
    Flat {
        theta: f64,
        z_minus: C64,
        z_plus: C64,
        x_minus: UnitVector,
        x_plus: UnitVector,
        /// Maximal classes before and after the flat, as indices at `theta`.
        branch_minus: usize,
        branch_plus: usize,
    },
}

impl BoundaryArc {
    pub fn kind(&self) -> &'static str {
        match self {
            BoundaryArc::Round { .. } => "round",
            BoundaryArc::Flat { .. } => "flat",
        }
    }
}

/// Shape class of `F(A)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Degenerate {
    Full,
    Segment { a: C64, b: C64 },
    Point { z: C64 },
}

impl Degenerate {
    pub fn kind(&self) -> &'static str {
        match self {
            Degenerate::Full => "full-dimensional",
            Degenerate::Segment { .. } => "segment",
            Degenerate::Point { .. } => "point",
        }
    }
}

/// Boundary taxonomy of a point of `∂F(A)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryPointKind {
    Corner,
    FlatInterior,
    FlatEndpointRound,
    FullyRound,
}

/// A sampled boundary point.
#[derive(Debug, Clone, Copy)]
pub struct BoundarySample {
    pub theta: f64,
    pub z: C64,
    pub arc: usize,
}

/// Boundary structure of `F(A)` built from the branch atlas.
#[derive(Debug, Clone)]
pub struct BoundaryAtlas {
    branches: Arc<BranchAtlas>,
    config: ToleranceConfig,
    /// Representative of the identical-branch class of each branch.
    classes: Vec<usize>,
    pub exceptional: Vec<ExceptionalArgument>,
    pub warnings: Vec<String>,
    pub arcs: Vec<BoundaryArc>,
    pub corners: Vec<C64>,
    pub degenerate: Degenerate,
    diameter: f64,
}

impl BoundaryAtlas {
    pub fn branches(&self) -> &BranchAtlas {
        &self.branches
    }

    pub fn shared_branches(&self) -> Arc<BranchAtlas> {
        Arc::clone(&self.branches)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.branches.matrix()
    }

    pub fn config(&self) -> &ToleranceConfig {
        &self.config
    }

    pub fn scale(&self) -> f64 {
        self.branches.scale()
    }

    pub fn grid_size(&self) -> usize {
        self.branches.grid_size()
    }

    pub fn degenerate_kind(&self) -> &'static str {
        self.degenerate.kind()
    }

    pub fn is_full(&self) -> bool {
        self.degenerate == Degenerate::Full
    }

    /// Diameter of `F(A)`.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Branches in the identical-branch class of `id`.
    pub fn class_members(&self, id: usize) -> Vec<usize> {
        let rep = self.classes[id];
        (0..self.classes.len()).filter(|&j| self.classes[j] == rep).collect()
    }

    pub fn class_of(&self, id: usize) -> usize {
        self.classes[id]
    }

    /// Flat arcs with their positions in `arcs`.
    pub fn flats(&self) -> impl Iterator<Item = (usize, &BoundaryArc)> {
        self.arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| matches!(a, BoundaryArc::Flat { .. }))
    }

    /// Largest eigenvalue of `Re(e^{-iθ}A)`.
    pub fn support(&self, theta: f64) -> f64 {
        self.branches.support(theta)
    }

    /// `min_θ (h(θ) − Re(e^{-iθ}z))` and its minimizer: zero on the
    /// boundary, positive inside, negative outside.
    pub fn support_gap(&self, z: C64) -> (f64, f64) {
        support_gap(&self.branches, z)
    }

    /// Boundary points: grid samples on round arcs and both endpoints of
    /// every flat, in counterclockwise order.
    pub fn boundary_samples(&self) -> Vec<BoundarySample> {
        let mut out = Vec::new();
        match &self.degenerate {
            Degenerate::Point { z } => {
                out.push(BoundarySample { theta: 0.0, z: *z, arc: 0 });
                return out;
            }
            Degenerate::Segment { a, b } => {
                out.push(BoundarySample { theta: 0.0, z: *a, arc: 0 });
                out.push(BoundarySample { theta: PI, z: *b, arc: 0 });
                return out;
            }
            Degenerate::Full => {}
        }
        for (k, arc) in self.arcs.iter().enumerate() {
            match arc {
                BoundaryArc::Round {
                    branch,
                    theta_start,
                    theta_end,
                } => {
                    for (theta, z) in self.round_points(*branch, *theta_start, *theta_end) {
                        out.push(BoundarySample { theta, z, arc: k });
                    }
                }
                BoundaryArc::Flat {
                    theta,
                    z_minus,
                    z_plus,
                    ..
                } => {
                    out.push(BoundarySample { theta: *theta, z: *z_minus, arc: k });
                    out.push(BoundarySample { theta: *theta, z: *z_plus, arc: k });
                }
            }
        }
        out
    }

    /// Critical-curve points of `branch` at the grid samples inside
    /// `[start, end]` together with both ends.
    pub fn round_points(&self, branch: usize, start: f64, end: f64) -> Vec<(f64, C64)> {
        let atlas = &self.branches;
        let mut pts = Vec::new();
        if let Ok(v) = atlas.evaluate(start) {
            pts.push((start, critical_curve(start, v.lambda[branch], v.derivative[branch])));
        }
        for i in interior_indices(atlas, start, end) {
            let (t, l, d, _) = atlas.sample(branch, i);
            pts.push((t, critical_curve(t, l, d)));
        }
        if let Ok(v) = atlas.evaluate(end) {
            pts.push((end, critical_curve(end, v.lambda[branch], v.derivative[branch])));
        }
        pts
    }

    /// Taxonomy of a boundary point.
    pub fn classify_boundary_point(&self, z: C64) -> Result<BoundaryPointKind> {
        let tol = 1e-7 * self.scale();
        let (gap, _) = self.support_gap(z);
        if gap.abs() > tol {
            return Err(Error::NotOnBoundary { distance: gap.abs() });
        }
        if self.corners.iter().any(|c| (c - z).norm() <= tol) {
            return Ok(BoundaryPointKind::Corner);
        }
        let mut endpoint = false;
        for (_, arc) in self.flats() {
            if let BoundaryArc::Flat { z_minus, z_plus, .. } = arc {
                if (z - z_minus).norm() <= tol || (z - z_plus).norm() <= tol {
                    endpoint = true;
                } else if segment_distance(z, *z_minus, *z_plus) <= tol {
                    return Ok(BoundaryPointKind::FlatInterior);
                }
            }
        }
        Ok(if endpoint {
            BoundaryPointKind::FlatEndpointRound
        } else {
            BoundaryPointKind::FullyRound
        })
    }

    /// Exceptional arguments whose branches both attain the maximum.
    pub fn maximal_exceptional(&self) -> impl Iterator<Item = &ExceptionalArgument> {
        self.exceptional.iter().filter(|e| e.involves_max)
    }

    /// Largest violation of convexity of the sampled boundary polygon,
    /// measured as the distance by which a vertex turns the wrong way.
    pub fn convexity_violation(&self) -> f64 {
        let pts: Vec<C64> = dedup_points(
            self.boundary_samples().into_iter().map(|s| s.z).collect(),
            1e-9 * self.scale(),
        );
        convexity_violation(&pts)
    }

    /// `max_θ |max_z Re(e^{-iθ}z) − max_j λ_j(θ)|` over the grid, with `z`
    /// ranging over the boundary samples.
    pub fn support_agreement(&self) -> f64 {
        let pts: Vec<C64> = self.boundary_samples().into_iter().map(|s| s.z).collect();
        let atlas = &self.branches;
        (0..atlas.grid_size())
            .map(|i| {
                let t = atlas.theta(i);
                let rot = C64::new(t.cos(), -t.sin());
                let best = pts
                    .iter()
                    .map(|z| (rot * z).re)
                    .fold(f64::NEG_INFINITY, f64::max);
                let top = (0..atlas.dim())
                    .map(|b| atlas.branch(b).lambda[i])
                    .fold(f64::NEG_INFINITY, f64::max);
                (best - top).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn segment_distance(z: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let s = (((z - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + d * s)).norm()
}

fn dedup_points(pts: Vec<C64>, tol: f64) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::with_capacity(pts.len());
    for p in pts {
        if out.last().is_none_or(|q| (p - q).norm() > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && (out[0] - out[out.len() - 1]).norm() <= tol {
        out.pop();
    }
    out
}

/// Largest wrong-way turn of a closed polygon traversed counterclockwise.
pub fn convexity_violation(pts: &[C64]) -> f64 {
    let m = pts.len();
    if m < 3 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for i in 0..m {
        let e1 = pts[(i + 1) % m] - pts[i];
        let e2 = pts[(i + 2) % m] - pts[(i + 1) % m];
        let cross = e1.re * e2.im - e1.im * e2.re;
        let len = e1.norm().max(e2.norm());
        if len > 0.0 {
            worst = worst.max(-cross / len);
        }
    }
    worst
}

/// Grid indices `i` (lap-aware) with `start < θ_i < end`.
pub(crate) fn interior_indices(atlas: &BranchAtlas, start: f64, end: f64) -> std::ops::Range<i64> {
    let h = atlas.step();
    let t0 = atlas.theta0();
    let first = ((start - t0) / h).floor() as i64 + 1;
    let last = ((end - t0) / h).ceil() as i64 - 1;
    let tol = 1e-12;
    let first = if t0 + first as f64 * h - start <= tol { first + 1 } else { first };
    let last = if end - (t0 + last as f64 * h) <= tol { last - 1 } else { last };
    first..(last + 1).max(first)
}

/// `min_θ (h(θ) − Re(e^{-iθ}z))` with its minimizer.
pub fn support_gap(atlas: &BranchAtlas, z: C64) -> (f64, f64) {
    let n = atlas.grid_size();
    let value = |t: f64| atlas.support(t) - (C64::new(t.cos(), -t.sin()) * z).re;
    let grid_val = |i: usize| {
        let t = atlas.theta(i);
        let top = (0..atlas.dim())
            .map(|b| atlas.branch(b).lambda[i])
            .fold(f64::NEG_INFINITY, f64::max);
        top - (C64::new(t.cos(), -t.sin()) * z).re
    };
    let (imin, _) = (0..n)
        .map(|i| (i, grid_val(i)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let t = atlas.theta(imin);
    let h = atlas.step();
    let (tmin, vmin) = golden_min(value, t - h, t + h);
    (vmin, tmin)
}

/// Golden-section minimization on `[a, b]`.
pub(crate) fn golden_min(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > THETA_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    let ft = f(t);
    [(c, fc), (d, fd), (t, ft)]
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap()
}

fn pair_gap(atlas: &BranchAtlas, a: usize, b: usize, theta: f64) -> Result<f64> {
    let v = atlas.evaluate(theta)?;
    Ok(v.lambda[a] - v.lambda[b])
}

fn grid_gap(atlas: &BranchAtlas, a: usize, b: usize, i: i64) -> f64 {
    atlas.sample(a, i).1 - atlas.sample(b, i).1
}

/// Equivalence classes of identical branches and the pairs whose gap sits
/// between the identical and crossing tolerances everywhere.
fn identical_classes(atlas: &BranchAtlas, cfg: &ToleranceConfig) -> (Vec<usize>, Vec<String>) {
    let n = atlas.dim();
    let s = atlas.scale();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut warnings = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let max_gap = (0..=atlas.grid_size())
                .map(|i| (atlas.branch(a).lambda[i] - atlas.branch(b).lambda[i]).abs())
                .fold(0.0, f64::max);
            if max_gap <= cfg.crossing_tol * s {
                if max_gap > cfg.identical_tol * s {
                    warnings.push(format!(
                        "branches {a} and {b} stay within {max_gap:.3e} of each other; treated as identical"
                    ));
                }
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let classes = (0..n).map(|j| find(&mut parent, j)).collect();
    (classes, warnings)
}

/// Split degree of branches `a`, `b` at `theta` from the log-log slope of
/// their gap over the fitting window.
pub fn estimate_split_degree(
    atlas: &BranchAtlas,
    a: usize,
    b: usize,
    theta: f64,
    cfg: &ToleranceConfig,
) -> Result<SplitDegree> {
    let h = atlas.step();
    let s = atlas.scale();
    let center = ((theta - atlas.theta0()) / h).round() as i64;
    let reach = SPLIT_WINDOW_OUTER as i64 + 2;
    let mut pts = Vec::new();
    let mut max_gap: f64 = 0.0;
    for i in (center - reach)..=(center + reach) {
        let (t, ..) = atlas.sample(a, i);
        let delta = (t - theta).abs();
        if delta < SPLIT_WINDOW_INNER * h || delta > SPLIT_WINDOW_OUTER * h {
            continue;
        }
        let gap = grid_gap(atlas, a, b, i).abs();
        max_gap = max_gap.max(gap);
        if gap > FIT_FLOOR * s {
            pts.push((delta.ln(), gap.ln()));
        }
    }
    if max_gap <= cfg.identical_tol * s {
        return Ok(SplitDegree::Infinite);
    }
    if pts.len() < 6 {
        return Ok(SplitDegree::Unresolved);
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |acc, p| {
        (acc.0 + (p.0 - mx) * (p.1 - my), acc.1 + (p.0 - mx).powi(2))
    });
    let slope = sxy / sxx;
    let k = slope.round();
    if (slope - k).abs() >= 0.25 || k < 1.0 {
        return Err(Error::AmbiguousSplitDegree { theta, slope });
    }
    if k as u32 > MAX_RESOLVED_DEGREE {
        return Ok(SplitDegree::Unresolved);
    }
    Ok(SplitDegree::Finite(k as u32))
}

/// All exceptional arguments of the branch atlas on `[θ₀, θ₀ + 2π)`.
pub fn find_exceptional_arguments(
    atlas: &BranchAtlas,
    cfg: &ToleranceConfig,
) -> Result<(Vec<ExceptionalArgument>, Vec<String>)> {
    let (classes, warnings) = identical_classes(atlas, cfg);
    let reps: BTreeSet<usize> = classes.iter().copied().collect();
    let reps: Vec<usize> = reps.into_iter().collect();
    let mut out = Vec::new();
    for (ia, &a) in reps.iter().enumerate() {
        for &b in &reps[ia + 1..] {
            let t0 = atlas.theta0();
            let mut found: Vec<ExceptionalArgument> = Vec::new();
            for theta in pair_crossings(atlas, a, b, cfg)? {
                let mut e = exceptional_at(atlas, a, b, theta, cfg)?;
                e.theta = t0 + (e.theta - t0).rem_euclid(TAU);
                let dup = found.iter().any(|f| {
                    let d = (f.theta - e.theta).rem_euclid(TAU);
                    d.min(TAU - d) < 1e-6
                });
                if !dup {
                    found.push(e);
                }
            }
            out.extend(found);
        }
    }
    out.sort_by(|x, y| x.theta.total_cmp(&y.theta));
    Ok((out, warnings))
}

/// Refined angles where the gap of `a` and `b` changes sign or touches zero.
fn pair_crossings(atlas: &BranchAtlas, a: usize, b: usize, cfg: &ToleranceConfig) -> Result<Vec<f64>> {
    let n = atlas.grid_size() as i64;
    let s = atlas.scale();
    let noise = NOISE_FLOOR * s;
    let d: Vec<f64> = (-1..=n + 1).map(|i| grid_gap(atlas, a, b, i)).collect();
    let at = |i: i64| d[(i + 1) as usize];
    let sign_change = |i: i64| (at(i) < 0.0) != (at(i + 1) < 0.0);
    let mut found = Vec::new();
    for i in 0..n {
        if sign_change(i) {
            let (mut lo, mut hi) = (atlas.sample(a, i).0, atlas.sample(a, i + 1).0);
            let lo_neg = at(i) < 0.0;
            let mut mid = 0.5 * (lo + hi);
            while hi - lo > THETA_TOL {
                mid = 0.5 * (lo + hi);
                let g = pair_gap(atlas, a, b, mid)?;
                if g.abs() <= noise {
                    break;
                }
                if (g < 0.0) == lo_neg {
                    lo = mid;
                } else {
                    hi = mid;
                }
                mid = 0.5 * (lo + hi);
            }
            found.push(mid);
        }
    }
    for i in 0..n {
        let g = at(i).abs();
        if g > TOUCH_CANDIDATE * s || g > at(i - 1).abs() || g > at(i + 1).abs() {
            continue;
        }
        if sign_change(i - 1) || sign_change(i) {
            continue;
        }
        let (lo, hi) = (atlas.sample(a, i - 1).0, atlas.sample(a, i + 1).0);
        let mut err = None;
        let (t, v) = golden_min(
            |t| match pair_gap(atlas, a, b, t) {
                Ok(g) => g.abs(),
                Err(e) => {
                    err = Some(e);
                    f64::INFINITY
                }
            },
            lo,
            hi,
        );
        if let Some(e) = err {
            return Err(e);
        }
        if v <= cfg.crossing_tol * s {
            found.push(t);
        }
    }
    let t0 = atlas.theta0();
    let mut wrapped: Vec<f64> = found
        .into_iter()
        .map(|t| t0 + (t - t0).rem_euclid(TAU))
        .collect();
    wrapped.sort_by(f64::total_cmp);
    wrapped.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
    if wrapped.len() > 1 && (wrapped[0] + TAU - wrapped[wrapped.len() - 1]).abs() < 1e-9 {
        wrapped.pop();
    }
    Ok(wrapped)
}

fn exceptional_at(
    atlas: &BranchAtlas,
    a: usize,
    b: usize,
    theta: f64,
    cfg: &ToleranceConfig,
) -> Result<ExceptionalArgument> {
    let h = atlas.step();
    let left = ((theta - atlas.theta0()) / h).floor() as i64 - 3;
    let (a, b) = if grid_gap(atlas, a, b, left) >= 0.0 { (a, b) } else { (b, a) };
    let s = atlas.scale();
    let (split_degree, theta) = match estimate_split_degree(atlas, a, b, theta, cfg) {
        Ok(SplitDegree::Finite(k)) if k >= 2 => {
            let refined = refine_multiple_root(atlas, a, b, theta, k).unwrap_or(theta);
            (SplitDegree::Finite(k), refined)
        }
        Ok(k) => (k, theta),
        Err(e) => {
            if involves_max_at(&atlas.evaluate(theta)?, a, b, cfg.crossing_tol * s) {
                return Err(e);
            }
            (SplitDegree::Unresolved, theta)
        }
    };
    let v = atlas.evaluate(theta)?;
    Ok(ExceptionalArgument {
        theta,
        branch_pair: (a, b),
        split_degree,
        z: critical_curve(theta, v.lambda[a], v.derivative[a]),
        z_other: critical_curve(theta, v.lambda[b], v.derivative[b]),
        involves_max: involves_max_at(&v, a, b, cfg.crossing_tol * s),
    })
}

fn involves_max_at(v: &BranchValues, a: usize, b: usize, tol: f64) -> bool {
    let top = v.lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top - v.lambda[a] <= tol && top - v.lambda[b] <= tol
}

/// Location of a root of multiplicity `k ≥ 2` of the branch gap: the zero
/// of the `(k−1)`-th derivative of a least-squares polynomial fitted to
/// the gap on nearby grid samples.
fn refine_multiple_root(atlas: &BranchAtlas, a: usize, b: usize, theta: f64, k: u32) -> Option<f64> {
    let h = atlas.step();
    let center = ((theta - atlas.theta0()) / h).round() as i64;
    let floor = FIT_FLOOR * atlas.scale();
    let rows: Vec<(f64, f64)> = ((center - 32)..=(center + 32))
        .map(|i| ((atlas.sample(a, i).0 - theta) / h, grid_gap(atlas, a, b, i)))
        .filter(|r| r.1.abs() > floor)
        .collect();
    let u = fitted_root(&rows, k)?;
    if u.abs() > 2.0 {
        return None;
    }
    let coarse = theta + u * h;
    // second pass on the narrowest window of off-grid evaluations that
    // still resolves the gap
    for w in [4.0 * h, 8.0 * h, 16.0 * h] {
        let rows: Vec<(f64, f64)> = (0..=48)
            .map(|j| {
                let u = j as f64 / 24.0 - 1.0;
                pair_gap(atlas, a, b, coarse + u * w).map(|g| (u, g))
            })
            .collect::<Result<Vec<_>>>()
            .ok()?
            .into_iter()
            .filter(|r| r.1.abs() > floor)
            .collect();
        if rows.len() < 24 {
            continue;
        }
        if let Some(u) = fitted_root(&rows, k) {
            if u.abs() <= 1.0 {
                return Some(coarse + u * w);
            }
        }
    }
    Some(coarse)
}

/// Zero near the origin of the `(k−1)`-th derivative of the degree `k + 2`
/// least-squares polynomial through `rows`.
fn fitted_root(rows: &[(f64, f64)], k: u32) -> Option<f64> {
    let deg = k as usize + 2;
    if rows.len() < deg + 4 {
        return None;
    }
    let m = nalgebra::DMatrix::from_fn(rows.len(), deg + 1, |r, c| rows[r].0.powi(c as i32));
    let rhs = nalgebra::DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let coef = m.svd(true, true).solve(&rhs, 1e-14).ok()?;
    let d = |u: f64, order: usize| -> f64 {
        (order..=deg)
            .map(|j| {
                let f: f64 = ((j - order + 1)..=j).map(|q| q as f64).product();
                coef[j] * f * u.powi((j - order) as i32)
            })
            .sum()
    };
    let order = k as usize - 1;
    let mut u = 0.0;
    for _ in 0..50 {
        let slope = d(u, order + 1);
        if slope == 0.0 {
            return None;
        }
        let step = d(u, order) / slope;
        u -= step;
        if step.abs() < 1e-13 {
            break;
        }
    }
    u.is_finite().then_some(u)
}

/// Index of a maximal branch.
fn argmax(v: &BranchValues) -> usize {
    (0..v.lambda.len())
        .max_by(|&p, &q| v.lambda[p].total_cmp(&v.lambda[q]))
        .unwrap()
}

/// Boundary atlas at the configured grid, doubling the grid up to four
/// times when tracking or split-degree estimation fails.
pub fn build_boundary_atlas(matrix: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<BoundaryAtlas> {
    cfg.validate()?;
    let mut grid = cfg.grid_size;
    let mut last = None;
    for _ in 0..=MAX_REFINEMENTS {
        match build_at(matrix, cfg, grid) {
            Ok(atlas) => return Ok(atlas),
            Err(e @ (Error::Tracking(_) | Error::AmbiguousSplitDegree { .. })) => {
                last = Some(e);
                grid *= 2;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap())
}

fn build_at(matrix: &ComplexMatrix, cfg: &ToleranceConfig, grid: usize) -> Result<BoundaryAtlas> {
    let branches = track_branches(matrix, grid)?;
    let s = branches.scale();
    let (classes, mut warnings) = identical_classes(&branches, cfg);
    let (exceptional, w) = find_exceptional_arguments(&branches, cfg)?;
    warnings.extend(w);

    let diameter = (0..grid / 2)
        .map(|i| {
            let top = |j: usize| {
                (0..branches.dim())
                    .map(|b| branches.branch(b).lambda[j])
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            top(i) + top(i + grid / 2)
        })
        .fold(0.0, f64::max);

    let degenerate = detect_degenerate(&branches);
    let mut atlas = BoundaryAtlas {
        branches: Arc::new(branches),
        config: *cfg,
        classes,
        exceptional,
        warnings,
        arcs: Vec::new(),
        corners: Vec::new(),
        degenerate,
        diameter,
    };
    if atlas.is_full() {
        atlas.arcs = build_arcs(&atlas, s)?;
        atlas.corners = find_corners(&atlas.arcs, 1e-7 * s);
    }
    Ok(atlas)
}

fn detect_degenerate(atlas: &BranchAtlas) -> Degenerate {
    let s = atlas.scale();
    let pts: Vec<C64> = (0..atlas.grid_size())
        .map(|i| {
            let b = (0..atlas.dim())
                .max_by(|&p, &q| atlas.branch(p).lambda[i].total_cmp(&atlas.branch(q).lambda[i]))
                .unwrap();
            atlas.critical_point(b, i)
        })
        .collect();
    let m = pts.len() as f64;
    let mean = pts.iter().sum::<C64>() / m;
    if pts.iter().all(|p| (p - mean).norm() <= 1e-10 * s) {
        return Degenerate::Point { z: mean };
    }
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in &pts {
        let d = p - mean;
        sxx += d.re * d.re;
        sxy += d.re * d.im;
        syy += d.im * d.im;
    }
    let phi = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let dir = C64::new(phi.cos(), phi.sin());
    let off = pts
        .iter()
        .map(|p| ((p - mean) * dir.conj()).im.abs())
        .fold(0.0, f64::max);
    if off <= 1e-8 * s {
        let along = |p: &C64| ((p - mean) * dir.conj()).re;
        let lo = pts.iter().min_by(|p, q| along(p).total_cmp(&along(q))).unwrap();
        let hi = pts.iter().max_by(|p, q| along(p).total_cmp(&along(q))).unwrap();
        return Degenerate::Segment { a: *lo, b: *hi };
    }
    Degenerate::Full
}

/// A change of the maximal class at an exceptional argument.
struct Transition {
    theta: f64,
    before: usize,
    after: usize,
}

fn build_arcs(atlas: &BoundaryAtlas, s: f64) -> Result<Vec<BoundaryArc>> {
    let ba = &atlas.branches;
    let h = ba.step();
    let events: Vec<f64> = {
        let mut t: Vec<f64> = atlas.maximal_exceptional().map(|e| e.theta).collect();
        t.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
        t
    };
    let mut transitions = Vec::new();
    for (k, &theta) in events.iter().enumerate() {
        let prev = if k == 0 { events[events.len() - 1] - TAU } else { events[k - 1] };
        let next = if k + 1 == events.len() { events[0] + TAU } else { events[k + 1] };
        let dl = (0.5 * h).min(0.45 * (theta - prev)).max(1e-9);
        let dr = (0.5 * h).min(0.45 * (next - theta)).max(1e-9);
        let before = atlas.classes[argmax(&ba.evaluate(theta - dl)?)];
        let after = atlas.classes[argmax(&ba.evaluate(theta + dr)?)];
        if before != after {
            transitions.push(Transition { theta, before, after });
        }
    }

    let mut arcs = Vec::new();
    if transitions.is_empty() {
        let t0 = ba.theta0();
        let b = atlas.classes[argmax(&ba.evaluate(t0)?)];
        arcs.push(BoundaryArc::Round {
            branch: b,
            theta_start: t0,
            theta_end: t0 + TAU,
        });
        return Ok(arcs);
    }
    let m = transitions.len();
    for k in 0..m {
        let cur = &transitions[k];
        let v = ba.evaluate(cur.theta)?;
        let (bm, bp) = (cur.before, cur.after);
        let z_minus = critical_curve(cur.theta, v.lambda[bm], v.derivative[bm]);
        let z_plus = critical_curve(cur.theta, v.lambda[bp], v.derivative[bp]);
        if (z_plus - z_minus).norm() > 1e-7 * s {
            let x_minus = unit(&v.vectors[bm]);
            let x_plus = unit(&v.vectors[bp]);
            let overlap = x_minus.inner(&x_plus).norm();
            if overlap > 1e-8 {
                return Err(Error::Tracking(format!(
                    "flat endpoint vectors at theta = {} overlap by {overlap:.3e}",
                    cur.theta
                )));
            }
            arcs.push(BoundaryArc::Flat {
                theta: cur.theta,
                z_minus: atlas.matrix().quad(x_minus.as_vector()),
                z_plus: atlas.matrix().quad(x_plus.as_vector()),
                x_minus,
                x_plus,
                branch_minus: bm,
                branch_plus: bp,
            });
        }
        let next = &transitions[(k + 1) % m];
        let end = if k + 1 == m { next.theta + TAU } else { next.theta };
        let pts = atlas.round_points(bp, cur.theta, end);
        let span = pts.iter().map(|(_, z)| (z - pts[0].1).norm()).fold(0.0, f64::max);
        if span > POINT_ARC * s {
            arcs.push(BoundaryArc::Round {
                branch: bp,
                theta_start: cur.theta,
                theta_end: end,
            });
        }
    }
    Ok(arcs)
}

fn unit(v: &CVector) -> UnitVector {
    UnitVector::new(v.clone()).expect("eigenvector is nonzero")
}

fn find_corners(arcs: &[BoundaryArc], tol: f64) -> Vec<C64> {
    let m = arcs.len();
    let mut corners = Vec::new();
    for k in 0..m {
        if let (BoundaryArc::Flat { z_plus, .. }, BoundaryArc::Flat { z_minus, .. }) =
            (&arcs[k], &arcs[(k + 1) % m])
        {
            if m > 1 && (z_plus - z_minus).norm() <= tol {
                corners.push(*z_plus);
            }
        }
    }
    corners
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_matrix;
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn triangle() -> ComplexMatrix {
        ComplexMatrix::diagonal(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]).unwrap()
    }

    fn disk() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap()
    }

    fn normalize(t: f64) -> f64 {
        t.rem_euclid(TAU)
    }

    #[test]
    fn crossings_of_hermitian_diagonal() {
        let a = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let atlas = track_branches(&a, 1024).unwrap();
        let (ex, _) = find_exceptional_arguments(&atlas, &cfg()).unwrap();
        let mut t: Vec<f64> = ex.iter().map(|e| normalize(e.theta)).collect();
        t.sort_by(f64::total_cmp);
        assert_eq!(t.len(), 2);
        assert!((t[0] - PI / 2.0).abs() < 1e-9 && (t[1] - 1.5 * PI).abs() < 1e-9);
        assert!(ex.iter().all(|e| e.split_degree == SplitDegree::Finite(1)));
    }

    #[test]
    fn nilpotent_has_no_crossings() {
        let atlas = track_branches(&disk(), 512).unwrap();
        let (ex, _) = find_exceptional_arguments(&atlas, &cfg()).unwrap();
        assert!(ex.is_empty());
    }

    #[test]
    fn triangle_crossings_match_closed_form() {
        let mu = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)];
        let atlas = track_branches(&triangle(), 2048).unwrap();
        let (ex, _) = find_exceptional_arguments(&atlas, &cfg()).unwrap();
        // Re(e^{-iθ}(μ_a − μ_b)) = 0  ⇔  θ = arg(μ_a − μ_b) ± π/2
        let mut expect = Vec::new();
        for p in 0..3 {
            for q in (p + 1)..3 {
                let d = mu[p] - mu[q];
                expect.push(normalize(d.arg() + PI / 2.0));
                expect.push(normalize(d.arg() - PI / 2.0));
            }
        }
        expect.sort_by(f64::total_cmp);
        let mut got: Vec<f64> = ex.iter().map(|e| normalize(e.theta)).collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(got.len(), expect.len());
        for e in &expect {
            let best = got
                .iter()
                .map(|g| {
                    let d = (g - e).rem_euclid(TAU);
                    d.min(TAU - d)
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9, "{e}: {best}");
        }
        assert!(ex.iter().all(|e| e.split_degree == SplitDegree::Finite(1)));
    }

    #[test]
    fn triangle_atlas() {
        let atlas = build_boundary_atlas(&triangle(), &cfg()).unwrap();
        assert_eq!(atlas.degenerate_kind(), "full-dimensional");
        assert_eq!(atlas.arcs.len(), 3);
        assert!(atlas.arcs.iter().all(|a| a.kind() == "flat"));
        let mut corners = atlas.corners.clone();
        corners.sort_by(|p, q| (p.re + 2.0 * p.im).total_cmp(&(q.re + 2.0 * q.im)));
        for (z, e) in corners.iter().zip([c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]) {
            assert!((z - e).norm() < 1e-9);
        }
        for (_, arc) in atlas.flats() {
            if let BoundaryArc::Flat { x_minus, x_plus, .. } = arc {
                assert!(x_minus.inner(x_plus).norm() <= 1e-8);
            }
        }
        assert!(atlas.support_agreement() <= 1e-7);
        assert!(atlas.convexity_violation() <= 1e-7);
    }

    #[test]
    fn disk_atlas() {
        let atlas = build_boundary_atlas(&disk(), &cfg()).unwrap();
        assert_eq!(atlas.arcs.len(), 1);
        assert!(atlas.corners.is_empty());
        match &atlas.arcs[0] {
            BoundaryArc::Round { theta_start, theta_end, .. } => {
                assert!((theta_end - theta_start - TAU).abs() < 1e-12)
            }
            _ => panic!("expected a round arc"),
        }
        for s in atlas.boundary_samples() {
            assert!((s.z.norm() - 1.0).abs() < 1e-12);
        }
        assert!((atlas.diameter() - 2.0).abs() < 1e-12);
        let z = c(0.6, 0.8);
        assert_eq!(atlas.classify_boundary_point(z).unwrap(), BoundaryPointKind::FullyRound);
        assert!(atlas.classify_boundary_point(c(0.2, 0.0)).is_err());
    }

    #[test]
    fn hermitian_segment_and_scalar_point() {
        let a = ComplexMatrix::diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let atlas = build_boundary_atlas(&a, &cfg()).unwrap();
        match atlas.degenerate {
            Degenerate::Segment { a, b } => {
                let (lo, hi) = if a.re < b.re { (a, b) } else { (b, a) };
                assert!(lo.norm() < 1e-12 && (hi - 1.0).norm() < 1e-12);
            }
            ref d => panic!("expected a segment, got {d:?}"),
        }
        let atlas = build_boundary_atlas(&ComplexMatrix::identity(3).rotate(0.0), &cfg()).unwrap();
        assert_eq!(atlas.degenerate_kind(), "point");
    }

    #[test]
    fn triangle_point_taxonomy() {
        let atlas = build_boundary_atlas(&triangle(), &cfg()).unwrap();
        assert_eq!(atlas.classify_boundary_point(c(0.0, 0.0)).unwrap(), BoundaryPointKind::Corner);
        assert_eq!(
            atlas.classify_boundary_point(c(0.5, 0.0)).unwrap(),
            BoundaryPointKind::FlatInterior
        );
    }

    #[test]
    fn support_gap_signs() {
        let atlas = build_boundary_atlas(&disk(), &cfg()).unwrap();
        let (inside, _) = atlas.support_gap(c(0.1, 0.2));
        let (on, t) = atlas.support_gap(c(0.0, -1.0));
        let (outside, _) = atlas.support_gap(c(1.5, 0.0));
        assert!(inside > 0.5 && on.abs() < 1e-12 && outside < -0.4);
        assert!((normalize(t) - 1.5 * PI).abs() < 1e-6);
    }

    #[test]
    fn random_atlases_are_convex_and_supporting() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in [2, 3, 4, 5] {
            let a = random_matrix(&mut rng, n);
            let atlas = build_boundary_atlas(&a, &cfg()).unwrap();
            let s = a.scale();
            assert!(atlas.support_agreement() <= 1e-7 * s);
            assert!(atlas.convexity_violation() <= 1e-7 * s);
            assert!(atlas.corners.is_empty());
        }
    }

    #[test]
    fn rotation_covariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let a = random_matrix(&mut rng, 3);
        let phi = 0.7;
        let base = build_boundary_atlas(&a, &cfg()).unwrap();
        let rot = build_boundary_atlas(&a.rotate(phi), &cfg()).unwrap();
        let w = C64::new(phi.cos(), -phi.sin());
        for s in base.boundary_samples().iter().step_by(37) {
            let (gap, _) = rot.support_gap(w * s.z);
            assert!(gap.abs() <= 1e-7 * a.scale());
        }
    }

    #[test]
    fn split_degree_display() {
        assert_eq!(SplitDegree::Finite(3).to_string(), "3");
        assert_eq!(SplitDegree::Infinite.to_string(), "inf");
        assert_eq!(SplitDegree::Unresolved.to_string(), ">=7");
        assert!(SplitDegree::Finite(5).is_odd_at_least_three());
        assert!(!SplitDegree::Finite(1).is_odd_at_least_three());
        assert!(!SplitDegree::Finite(4).is_odd_at_least_three());
    }
}
