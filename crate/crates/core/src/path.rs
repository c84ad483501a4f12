//! Unit-vector paths whose images traverse the boundary of `F(A)`.
//!
//! Round arcs are covered by normalized spectral projections of an anchor
//! vector, flat portions by rotating between the two endpoint preimages.
//! Every vector `y` on a path anchored at `x₀` has `<x₀, y>` real.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::boundary::{interior_indices, BoundaryArc, BoundaryAtlas};
use crate::branches::{align_phase, BranchAtlas};
use crate::error::{Error, Result};
use crate::linalg::{CVector, ComplexMatrix, UnitVector, C64};
use crate::random::random_vector;

/// Longest run of vanishing samples accepted by [`sign_continuation`].
pub const MAX_ZERO_RUN: usize = 3;
/// Draws of the free vector before giving up.
pub const MAX_REDRAWS: usize = 16;
const REAL_TOL: f64 = 1e-8;
const ORTHO_TOL: f64 = 1e-8;
const ANGLE_EPS: f64 = 1e-12;

fn rscale(v: &CVector, s: f64) -> CVector {
    v.map(|c| c * s)
}

fn normalized(v: &CVector) -> CVector {
    rscale(v, 1.0 / v.norm())
}

/// Fixes one sign per maximal run of nonvanishing samples so that
/// consecutive runs join with the smaller jump, and normalizes.
///
/// Vanishing samples (norm at most `zero_tol`) take the matching `fill`
/// vector phase-aligned with the previous output, or the normalized
/// average of their neighbours when no fill is given.
pub fn sign_continuation(samples: &[CVector], zero_tol: f64, fill: Option<&[CVector]>) -> Result<Vec<CVector>> {
    let valid: Vec<bool> = samples.iter().map(|v| v.norm() > zero_tol).collect();
    if !valid.iter().any(|&b| b) {
        return Err(Error::ProjectionVanishes);
    }
    let mut run = 0;
    let mut longest = 0;
    for &v in &valid {
        run = if v { 0 } else { run + 1 };
        longest = longest.max(run);
    }
    if longest > MAX_ZERO_RUN {
        return Err(Error::ZeroRun { len: longest });
    }

    let mut out: Vec<Option<CVector>> = vec![None; samples.len()];
    let mut sign = 1.0;
    let mut last: Option<CVector> = None;
    for (i, s) in samples.iter().enumerate() {
        if !valid[i] {
            continue;
        }
        let u = normalized(s);
        if i > 0 && !valid[i - 1] {
            if let Some(prev) = &last {
                let keep = (&u - prev).norm();
                let flip = (&u + prev).norm();
                sign = if flip < keep { -1.0 } else { 1.0 };
            }
        }
        let y = rscale(&u, sign);
        last = Some(y.clone());
        out[i] = Some(y);
    }

    let n = samples.len();
    let mut filled = Vec::with_capacity(n);
    for i in 0..n {
        if let Some(y) = &out[i] {
            filled.push(y.clone());
            continue;
        }
        let prev = (0..i).rev().find_map(|j| out[j].clone());
        let next = (i + 1..n).find_map(|j| out[j].clone());
        let y = match fill {
            Some(f) => {
                let mut v = normalized(&f[i]);
                if let Some(r) = prev.as_ref().or(next.as_ref()) {
                    align_phase(&mut v, r);
                }
                v
            }
            None => match (prev, next) {
                (Some(p), Some(q)) if (&p + &q).norm() > 1e-12 => normalized(&(p + q)),
                (Some(p), _) => p,
                (_, Some(q)) => q,
                _ => unreachable!("some sample is valid"),
            },
        };
        filled.push(y);
    }
    Ok(filled)
}

/// How the vectors of a round segment are obtained.
#[derive(Debug, Clone)]
pub enum Projection {
    /// `±P(θ)x₀/‖P(θ)x₀‖`.
    Anchored,
    /// `P(θ)w/‖P(θ)w‖` for a random `w`.
    Free { w: CVector },
}

/// Samples of a projection path over one round interval.
#[derive(Debug, Clone)]
pub struct ProjectionSegment {
    pub projection: Projection,
    /// Branches spanning the projected eigenspace, as indices of
    /// [`BranchAtlas::evaluate`].
    pub members: Vec<usize>,
    pub thetas: Vec<f64>,
    pub vectors: Vec<CVector>,
    pub points: Vec<C64>,
}

/// `y(ω) = cos ω x⁻ + sin ω x⁺` for `ω ∈ [0, π/2]`.
#[derive(Debug, Clone)]
pub struct FlatSegment {
    pub theta: f64,
    pub x_minus: CVector,
    pub x_plus: CVector,
    pub z_minus: C64,
    pub z_plus: C64,
}

impl FlatSegment {
    pub fn vector(&self, omega: f64) -> CVector {
        rscale(&self.x_minus, omega.cos()) + rscale(&self.x_plus, omega.sin())
    }
}

/// Orthogonal endpoints give a bridge whose image runs along the segment
/// from `f(x⁻)` to `f(x⁺)`.
pub fn flat_bridge(matrix: &ComplexMatrix, theta: f64, x_minus: &UnitVector, x_plus: &UnitVector) -> Result<FlatSegment> {
    let overlap = x_minus.inner(x_plus).norm();
    if overlap > ORTHO_TOL {
        return Err(Error::NonOrthogonal { overlap });
    }
    Ok(FlatSegment {
        theta,
        x_minus: x_minus.as_vector().clone(),
        x_plus: x_plus.as_vector().clone(),
        z_minus: matrix.quad(x_minus.as_vector()),
        z_plus: matrix.quad(x_plus.as_vector()),
    })
}

/// Eigenvectors of `members` over `[start, end]`: both ends evaluated,
/// grid samples in between.
fn member_samples(atlas: &BranchAtlas, members: &[usize], start: f64, end: f64) -> Result<(Vec<f64>, Vec<Vec<CVector>>)> {
    let mut thetas = vec![start];
    let mut vecs = vec![pick(&atlas.evaluate(start)?.vectors, members)];
    for i in interior_indices(atlas, start, end) {
        let mut row = Vec::with_capacity(members.len());
        let mut t = 0.0;
        for &m in members {
            let (theta, _, _, v) = atlas.sample(m, i);
            t = theta;
            row.push(v.clone());
        }
        thetas.push(t);
        vecs.push(row);
    }
    if end > start {
        thetas.push(end);
        vecs.push(pick(&atlas.evaluate(end)?.vectors, members));
    }
    Ok((thetas, vecs))
}

fn pick(all: &[CVector], members: &[usize]) -> Vec<CVector> {
    members.iter().map(|&m| all[m].clone()).collect()
}

fn project(basis: &[CVector], w: &CVector) -> CVector {
    let mut p = CVector::zeros(w.len());
    for x in basis {
        p += x * x.dotc(w);
    }
    p
}

fn check_real(x0: &CVector, vectors: &[CVector]) -> Result<()> {
    for v in vectors {
        let im = x0.dotc(v).im.abs();
        if im > REAL_TOL {
            return Err(Error::Unsupported(format!(
                "anchor inner product has imaginary part {im:.3e}"
            )));
        }
    }
    Ok(())
}

fn segment_from(atlas: &BranchAtlas, projection: Projection, members: &[usize], thetas: Vec<f64>, vectors: Vec<CVector>) -> ProjectionSegment {
    let points = vectors.iter().map(|v| atlas.matrix().quad(v)).collect();
    ProjectionSegment {
        projection,
        members: members.to_vec(),
        thetas,
        vectors,
        points,
    }
}

/// `P(θ)w/‖P(θ)w‖` over `[start, end]`, where `P` projects onto the
/// eigenspace of `members`.
pub fn spectral_projection_path(
    atlas: &BranchAtlas,
    members: &[usize],
    start: f64,
    end: f64,
    w: &CVector,
    zero_tol: f64,
) -> Result<ProjectionSegment> {
    let (thetas, vecs) = member_samples(atlas, members, start, end)?;
    let mut vectors = Vec::with_capacity(vecs.len());
    for basis in &vecs {
        let p = project(basis, w);
        if p.norm() <= zero_tol {
            return Err(Error::ProjectionVanishes);
        }
        vectors.push(normalized(&p));
    }
    Ok(segment_from(atlas, Projection::Free { w: w.clone() }, members, thetas, vectors))
}

/// `α(θ)P(θ)x₀/‖P(θ)x₀‖` over `[start, end]` with the sign `α` from
/// [`sign_continuation`].
pub fn anchored_projection_path(
    atlas: &BranchAtlas,
    members: &[usize],
    start: f64,
    end: f64,
    x0: &CVector,
    zero_tol: f64,
) -> Result<ProjectionSegment> {
    let (thetas, vecs) = member_samples(atlas, members, start, end)?;
    let raw: Vec<CVector> = vecs.iter().map(|b| project(b, x0)).collect();
    if raw.iter().all(|v| v.norm() <= zero_tol) {
        return Err(Error::ProjectionVanishes);
    }
    let fill: Vec<CVector> = vecs.iter().map(|b| b[0].clone()).collect();
    let vectors = sign_continuation(&raw, zero_tol, Some(&fill))?;
    check_real(x0, &vectors)?;
    Ok(segment_from(atlas, Projection::Anchored, members, thetas, vectors))
}

/// One piece of a canonical path.
#[derive(Debug, Clone)]
pub enum PathSegment {
    Round(ProjectionSegment),
    Flat(FlatSegment),
}

impl PathSegment {
    pub fn first_vector(&self) -> &CVector {
        match self {
            PathSegment::Round(s) => &s.vectors[0],
            PathSegment::Flat(f) => &f.x_minus,
        }
    }

    pub fn last_vector(&self) -> &CVector {
        match self {
            PathSegment::Round(s) => s.vectors.last().unwrap(),
            PathSegment::Flat(f) => &f.x_plus,
        }
    }

    fn rotate(&mut self, c: C64) {
        match self {
            PathSegment::Round(s) => s.vectors.iter_mut().for_each(|v| *v *= c),
            PathSegment::Flat(f) => {
                f.x_minus *= c;
                f.x_plus *= c;
            }
        }
    }
}

/// Location on a path: a segment and its native parameter (`θ` on round
/// segments, `ω` on flat ones).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPosition {
    pub segment: usize,
    pub param: f64,
}

/// A stored sample of a path.
#[derive(Debug, Clone)]
pub struct PathSample {
    pub t: f64,
    pub position: PathPosition,
    pub z: C64,
}

/// Piecewise path `t ↦ y(t)` over `t ∈ [0, 1]`, parametrized by the length
/// of its image.
#[derive(Debug, Clone)]
pub struct CanonicalBoundaryPath {
    atlas: Arc<BranchAtlas>,
    base: CVector,
    pub segments: Vec<PathSegment>,
    /// Start and end `t` of each segment.
    spans: Vec<(f64, f64)>,
    /// Cumulative image length along each round segment, scaled to its span.
    profiles: Vec<Vec<f64>>,
    /// Jumps of `y`, with the index of the segment that starts there.
    discontinuities: Vec<(f64, usize)>,
    zero_tol: f64,
}

#[derive(Debug, Clone)]
enum Piece {
    Round { members: Vec<usize>, start: f64, end: f64 },
    Flat { theta: f64, x_minus: CVector, x_plus: CVector },
}

impl Piece {
    fn key(&self) -> (f64, u8) {
        match self {
            Piece::Round { start, .. } => (*start, 1),
            Piece::Flat { theta, .. } => (*theta, 0),
        }
    }
}

/// Pieces of one lap of the boundary, with zero-length round pieces at
/// corners restored so that every flat has a round neighbour on each side.
fn lap_pieces(atlas: &BoundaryAtlas) -> Vec<Piece> {
    let arcs = &atlas.arcs;
    let m = arcs.len();
    let mut out = Vec::new();
    for k in 0..m {
        match &arcs[k] {
            BoundaryArc::Round {
                branch,
                theta_start,
                theta_end,
            } => out.push(Piece::Round {
                members: atlas.class_members(*branch),
                start: *theta_start,
                end: *theta_end,
            }),
            BoundaryArc::Flat {
                theta,
                x_minus,
                x_plus,
                branch_plus,
                ..
            } => {
                out.push(Piece::Flat {
                    theta: *theta,
                    x_minus: x_minus.as_vector().clone(),
                    x_plus: x_plus.as_vector().clone(),
                });
                if let BoundaryArc::Flat { theta: next, .. } = &arcs[(k + 1) % m] {
                    let end = if k + 1 == m { next + TAU } else { *next };
                    out.push(Piece::Round {
                        members: atlas.class_members(*branch_plus),
                        start: *theta,
                        end,
                    });
                }
            }
        }
    }
    out
}

/// Pieces met by normals in `[start, end]`, in order.
fn pieces_in(atlas: &BoundaryAtlas, start: f64, end: f64) -> Vec<Piece> {
    let ba = atlas.branches();
    let base = lap_pieces(atlas);
    let mut out = Vec::new();
    for lap in -2i64..=2 {
        let shift = lap as f64 * TAU;
        for p in &base {
            match p {
                Piece::Round { members, start: a, end: b } => {
                    let (a, b) = (a + shift, b + shift);
                    let (lo, hi) = (a.max(start), b.min(end));
                    if hi - lo > ANGLE_EPS || (a == b && a > start && a < end) {
                        out.push(Piece::Round {
                            members: members.iter().map(|&m| ba.branch_from_lap(m, lap)).collect(),
                            start: lo,
                            end: hi,
                        });
                    }
                }
                Piece::Flat { theta, x_minus, x_plus } => {
                    let t = theta + shift;
                    if t > start + ANGLE_EPS && t < end - ANGLE_EPS {
                        out.push(Piece::Flat {
                            theta: t,
                            x_minus: x_minus.clone(),
                            x_plus: x_plus.clone(),
                        });
                    }
                }
            }
        }
    }
    out.sort_by(|p, q| {
        let (a, ka) = p.key();
        let (b, kb) = q.key();
        a.total_cmp(&b).then(ka.cmp(&kb))
    });
    out
}

fn anchored_endpoint(x: &CVector, x0: &CVector) -> CVector {
    let o = x.dotc(x0);
    if o.norm() > 1e-12 {
        x * (o / o.norm())
    } else {
        x.clone()
    }
}

/// The canonical path over outward normals `[start, end]` (at most one
/// turn) anchored at `x0`. Random redraws for free segments are seeded by
/// `seed`.
pub fn canonical_boundary_path(
    atlas: &BoundaryAtlas,
    start: f64,
    end: f64,
    x0: &UnitVector,
    seed: u64,
) -> Result<CanonicalBoundaryPath> {
    if !atlas.is_full() {
        return Err(Error::Unsupported("numerical range has empty interior".into()));
    }
    if end - start > TAU + 1e-9 || end <= start {
        return Err(Error::InvalidConfig(format!("normal range [{start}, {end}] is not within one turn")));
    }
    let ba = atlas.shared_branches();
    let zero_tol = atlas.config().path_zero;
    let x0v = x0.as_vector();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pieces = pieces_in(atlas, start, end);
    if pieces.is_empty() {
        return Err(Error::Tracking("no boundary pieces in range".into()));
    }

    let mut segments: Vec<Option<PathSegment>> = Vec::with_capacity(pieces.len());
    for p in &pieces {
        let seg = match p {
            Piece::Round { members, start, end } => Some(PathSegment::Round(round_segment(
                &ba, members, *start, *end, x0v, zero_tol, &mut rng,
            )?)),
            Piece::Flat { .. } => None,
        };
        segments.push(seg);
    }
    let matrix = ba.matrix();
    for k in 0..pieces.len() {
        if let Piece::Flat { theta, x_minus, x_plus } = &pieces[k] {
            let xm = match k.checked_sub(1).and_then(|j| segments[j].as_ref()) {
                Some(s) => s.last_vector().clone(),
                None => anchored_endpoint(x_minus, x0v),
            };
            let xp = match segments.get(k + 1).and_then(|s| s.as_ref()) {
                Some(s) => s.first_vector().clone(),
                None => anchored_endpoint(x_plus, x0v),
            };
            let bridge = flat_bridge(matrix, *theta, &UnitVector::new(xm)?, &UnitVector::new(xp)?)?;
            segments[k] = Some(PathSegment::Flat(bridge));
        }
    }
    let segments: Vec<PathSegment> = segments.into_iter().map(|s| s.unwrap()).collect();

    let mut lengths = Vec::with_capacity(segments.len());
    let mut profiles = Vec::with_capacity(segments.len());
    for s in &segments {
        match s {
            PathSegment::Round(r) => {
                let mut acc = vec![0.0];
                for w in r.points.windows(2) {
                    acc.push(acc.last().unwrap() + (w[1] - w[0]).norm());
                }
                lengths.push(*acc.last().unwrap());
                profiles.push(acc);
            }
            PathSegment::Flat(f) => {
                lengths.push((f.z_plus - f.z_minus).norm());
                profiles.push(Vec::new());
            }
        }
    }
    let total: f64 = lengths.iter().sum();
    if total <= 0.0 {
        return Err(Error::Tracking("boundary path has zero length".into()));
    }
    let mut spans = Vec::with_capacity(segments.len());
    let mut acc = 0.0;
    for (k, len) in lengths.iter().enumerate() {
        let t0 = acc / total;
        acc += len;
        let t1 = if k + 1 == lengths.len() { 1.0 } else { acc / total };
        spans.push((t0, t1));
    }

    let mut discontinuities = Vec::new();
    for k in 1..segments.len() {
        if let (PathSegment::Round(a), PathSegment::Round(b)) = (&segments[k - 1], &segments[k]) {
            if atlas.class_of(a.members[0]) != atlas.class_of(b.members[0])
                || (a.vectors.last().unwrap() - &b.vectors[0]).norm() > 1e-6
            {
                discontinuities.push((spans[k].0, k));
            }
        }
    }
    Ok(CanonicalBoundaryPath {
        atlas: ba,
        base: x0v.clone(),
        segments,
        spans,
        profiles,
        discontinuities,
        zero_tol,
    })
}

fn round_segment(
    atlas: &BranchAtlas,
    members: &[usize],
    start: f64,
    end: f64,
    x0: &CVector,
    zero_tol: f64,
    rng: &mut ChaCha8Rng,
) -> Result<ProjectionSegment> {
    match anchored_projection_path(atlas, members, start, end, x0, zero_tol) {
        Ok(s) => return Ok(s),
        Err(Error::ProjectionVanishes) => {}
        Err(e) => return Err(e),
    }
    for _ in 0..MAX_REDRAWS {
        let w = random_vector(rng, atlas.dim());
        match spectral_projection_path(atlas, members, start, end, &w, zero_tol) {
            Ok(s) => {
                check_real(x0, &s.vectors)?;
                return Ok(s);
            }
            Err(Error::ProjectionVanishes) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ProjectionVanishes)
}

impl CanonicalBoundaryPath {
    pub fn base(&self) -> &CVector {
        &self.base
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.atlas.matrix()
    }

    pub fn branch_atlas(&self) -> &BranchAtlas {
        &self.atlas
    }

    /// `t` values where `y` jumps.
    pub fn discontinuity_ts(&self) -> Vec<f64> {
        self.discontinuities.iter().map(|d| d.0).collect()
    }

    /// Jumps of `y` together with the index of the segment starting there.
    pub fn discontinuities(&self) -> &[(f64, usize)] {
        &self.discontinuities
    }

    pub fn span(&self, segment: usize) -> (f64, f64) {
        self.spans[segment]
    }

    /// Multiplies `y` by the unimodular `c` on the segments from `segment` on.
    pub fn rotate_from(&mut self, segment: usize, c: C64) {
        for s in &mut self.segments[segment..] {
            s.rotate(c);
        }
    }

    pub fn segment_at(&self, t: f64) -> usize {
        self.position(t).segment
    }

    /// Every stored sample in path order.
    pub fn samples(&self) -> Vec<PathSample> {
        let mut out = Vec::new();
        for (k, s) in self.segments.iter().enumerate() {
            match s {
                PathSegment::Round(r) => {
                    for (j, (&theta, &z)) in r.thetas.iter().zip(&r.points).enumerate() {
                        out.push(PathSample {
                            t: self.round_t(k, j),
                            position: PathPosition { segment: k, param: theta },
                            z,
                        });
                    }
                }
                PathSegment::Flat(f) => {
                    for (param, z, t) in [(0.0, f.z_minus, self.spans[k].0), (FRAC_PI_2, f.z_plus, self.spans[k].1)] {
                        out.push(PathSample {
                            t,
                            position: PathPosition { segment: k, param },
                            z,
                        });
                    }
                }
            }
        }
        out
    }

    fn round_t(&self, k: usize, j: usize) -> f64 {
        let (t0, t1) = self.spans[k];
        let prof = &self.profiles[k];
        let len = *prof.last().unwrap();
        if len <= 0.0 {
            t0
        } else {
            t0 + (t1 - t0) * prof[j] / len
        }
    }

    /// `t` of a position.
    pub fn t_of(&self, pos: PathPosition) -> f64 {
        let k = pos.segment;
        let (t0, t1) = self.spans[k];
        match &self.segments[k] {
            PathSegment::Flat(_) => t0 + (t1 - t0) * pos.param.sin().powi(2),
            PathSegment::Round(r) => {
                let j = bracket(&r.thetas, pos.param);
                let (a, b) = (r.thetas[j], r.thetas[(j + 1).min(r.thetas.len() - 1)]);
                let (ta, tb) = (self.round_t(k, j), self.round_t(k, (j + 1).min(r.thetas.len() - 1)));
                if b > a {
                    ta + (tb - ta) * ((pos.param - a) / (b - a)).clamp(0.0, 1.0)
                } else {
                    ta
                }
            }
        }
    }

    /// Position of parameter `t`.
    pub fn position(&self, t: f64) -> PathPosition {
        let t = t.clamp(0.0, 1.0);
        let k = self
            .spans
            .iter()
            .position(|&(a, b)| t >= a && t <= b && b > a)
            .unwrap_or(self.spans.len() - 1);
        let (t0, t1) = self.spans[k];
        let s = if t1 > t0 { ((t - t0) / (t1 - t0)).clamp(0.0, 1.0) } else { 0.0 };
        match &self.segments[k] {
            PathSegment::Flat(_) => PathPosition {
                segment: k,
                param: s.sqrt().asin(),
            },
            PathSegment::Round(r) => {
                let prof = &self.profiles[k];
                let len = *prof.last().unwrap();
                let target = s * len;
                let j = bracket(prof, target);
                let j1 = (j + 1).min(prof.len() - 1);
                let frac = if prof[j1] > prof[j] { (target - prof[j]) / (prof[j1] - prof[j]) } else { 0.0 };
                PathPosition {
                    segment: k,
                    param: r.thetas[j] + frac * (r.thetas[j1] - r.thetas[j]),
                }
            }
        }
    }

    /// `y` at a position together with `f_A(y)`.
    pub fn eval(&self, pos: PathPosition) -> Result<(CVector, C64)> {
        let v = match &self.segments[pos.segment] {
            PathSegment::Flat(f) => f.vector(pos.param),
            PathSegment::Round(r) => self.round_vector(r, pos.param)?,
        };
        let z = self.matrix().quad(&v);
        Ok((v, z))
    }

    pub fn at(&self, t: f64) -> Result<(CVector, C64)> {
        self.eval(self.position(t))
    }

    fn round_vector(&self, r: &ProjectionSegment, theta: f64) -> Result<CVector> {
        let j = bracket(&r.thetas, theta);
        let j = if j + 1 < r.thetas.len() && (r.thetas[j + 1] - theta).abs() < (theta - r.thetas[j]).abs() {
            j + 1
        } else {
            j
        };
        if (r.thetas[j] - theta).abs() <= 1e-15 {
            return Ok(r.vectors[j].clone());
        }
        let near = &r.vectors[j];
        let values = self.atlas.evaluate(theta)?;
        let basis = pick(&values.vectors, &r.members);
        let anchor = match &r.projection {
            Projection::Anchored => &self.base,
            Projection::Free { w } => w,
        };
        let p = project(&basis, anchor);
        let mut u = if p.norm() > self.zero_tol {
            normalized(&p)
        } else {
            let mut u = basis[0].clone();
            align_phase(&mut u, near);
            return Ok(u);
        };
        if near.dotc(&u).re < 0.0 {
            u = -u;
        }
        Ok(u)
    }

    /// Largest `|Im <x₀, y>|` over the stored samples.
    pub fn max_anchor_imaginary(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for s in &self.segments {
            let vs: Vec<&CVector> = match s {
                PathSegment::Round(r) => r.vectors.iter().collect(),
                PathSegment::Flat(f) => vec![&f.x_minus, &f.x_plus],
            };
            for v in vs {
                worst = worst.max(self.base.dotc(v).im.abs());
            }
        }
        worst
    }
}

/// Largest `j` with `xs[j] <= x` (clamped to a valid interval start).
fn bracket(xs: &[f64], x: f64) -> usize {
    if xs.len() < 2 {
        return 0;
    }
    let j = xs.partition_point(|&v| v <= x);
    j.saturating_sub(1).min(xs.len() - 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::build_boundary_atlas;
    use crate::fixtures;
    use crate::ToleranceConfig;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn vec2(a: C64, b: C64) -> CVector {
        CVector::from_vec(vec![a, b])
    }

    #[test]
    fn no_zeros_keeps_one_sign() {
        let s: Vec<CVector> = (0..=20)
            .map(|k| {
                let t = -0.5 + k as f64 / 20.0;
                vec2(c(t, 0.0), c(1.0 - t * t, 0.0))
            })
            .collect();
        let out = sign_continuation(&s, 1e-8, None).unwrap();
        for (a, b) in s.iter().zip(&out) {
            assert!((normalized(a) - b).norm() < 1e-14);
        }
    }

    #[test]
    fn odd_zero_flips_even_zero_does_not() {
        let ts: Vec<f64> = (-10..=10).map(|k| k as f64 / 100.0).collect();
        let odd: Vec<CVector> = ts.iter().map(|&t| vec2(c(t, 0.0), c(t * t, 0.0))).collect();
        let out = sign_continuation(&odd, 1e-8, None).unwrap();
        assert!((&out[9] - vec2(c(-1.0, 0.0), c(0.0, 0.0))).norm() < 0.02);
        assert!((&out[11] - vec2(c(-1.0, 0.0), c(0.0, 0.0))).norm() < 0.02);
        assert!((&out[10] - &out[11]).norm() < 0.02);
        let even: Vec<CVector> = ts.iter().map(|&t| vec2(c(t * t, 0.0), c(t.powi(3), 0.0))).collect();
        let out = sign_continuation(&even, 1e-8, None).unwrap();
        assert!(out.iter().all(|v| v[0].re > 0.99));
    }

    #[test]
    fn long_zero_run_is_rejected() {
        let mut s = vec![vec2(c(1.0, 0.0), c(0.0, 0.0)); 10];
        for v in s.iter_mut().skip(3).take(4) {
            *v = CVector::zeros(2);
        }
        assert!(matches!(sign_continuation(&s, 1e-8, None), Err(Error::ZeroRun { len: 4 })));
    }

    #[test]
    fn bridge_on_diagonal() {
        let a = ComplexMatrix::diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let e1 = UnitVector::basis(2, 0);
        let e2 = UnitVector::basis(2, 1);
        let b = flat_bridge(&a, 0.0, &e1, &e2).unwrap();
        for k in 0..=10 {
            let w = FRAC_PI_2 * k as f64 / 10.0;
            let y = b.vector(w);
            assert!((y.norm() - 1.0).abs() < 1e-14);
            assert!((a.quad(&y) - c(w.sin().powi(2), 0.0)).norm() < 1e-14);
        }
        assert!((b.vector(0.0) - e1.as_vector()).norm() < 1e-15);
        let skew = UnitVector::new(vec2(c(1.0, 0.0), c(1.0, 0.0))).unwrap();
        assert!(flat_bridge(&a, 0.0, &e1, &skew).is_err());
    }

    fn atlas(a: &ComplexMatrix) -> BoundaryAtlas {
        build_boundary_atlas(a, &ToleranceConfig::default()).unwrap()
    }

    #[test]
    fn disk_path_traces_circle() {
        let at = atlas(&fixtures::disk());
        let ba = at.branches();
        let w = vec2(c(1.0, 0.0), c(2.0, 0.0));
        let t0 = ba.theta0();
        let s = spectral_projection_path(ba, &[1], t0, t0 + TAU, &w, 1e-8).unwrap();
        for ((th, z), v) in s.thetas.iter().zip(&s.points).zip(&s.vectors) {
            assert!((z - C64::from_polar(1.0, *th)).norm() < 1e-9);
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        let jump = s.vectors.windows(2).map(|p| (&p[1] - &p[0]).norm()).fold(0.0, f64::max);
        assert!(jump < 4.0 * ba.step());
        assert!((&s.vectors[0] - s.vectors.last().unwrap()).norm() < 1e-9);

        let x0 = at.matrix().real_part().hermitian_eigs().unwrap().vector(1);
        let p = canonical_boundary_path(&at, 0.0, TAU, &UnitVector::new(x0.clone()).unwrap(), 1).unwrap();
        assert!(p.discontinuity_ts().is_empty());
        assert!(p.max_anchor_imaginary() < 1e-12);
        assert!((&p.at(0.0).unwrap().0 - &x0).norm() < 1e-12);
        for k in 0..40 {
            let (y, z) = p.at(k as f64 / 40.0 + 0.003).unwrap();
            assert!((z.norm() - 1.0).abs() < 1e-9);
            assert!(x0.dotc(&y).im.abs() < 1e-12);
        }
    }

    #[test]
    fn vanishing_anchor_falls_back() {
        let a = ComplexMatrix::diagonal(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let at = atlas(&a);
        let ba = at.branches();
        let e1 = UnitVector::basis(3, 0);
        let out = ba.evaluate(0.3).unwrap();
        let top = (0..3).max_by(|&p, &q| out.lambda[p].total_cmp(&out.lambda[q])).unwrap();
        let r = anchored_projection_path(ba, &[top], 0.2, 0.4, e1.as_vector(), 1e-8);
        assert!(matches!(r, Err(Error::ProjectionVanishes)));
    }

    #[test]
    fn triangle_loop_is_three_bridges() {
        let at = atlas(&fixtures::triangle());
        let x0 = UnitVector::basis(3, 0);
        let theta = 1.25 * std::f64::consts::PI;
        let p = canonical_boundary_path(&at, theta, theta + TAU, &x0, 1).unwrap();
        let flats: Vec<&FlatSegment> = p
            .segments
            .iter()
            .filter_map(|s| match s {
                PathSegment::Flat(f) => Some(f),
                _ => None,
            })
            .collect();
        assert_eq!(flats.len(), 3);
        assert!(p.discontinuity_ts().is_empty());
        for f in flats {
            for k in 0..=8 {
                let y = f.vector(FRAC_PI_2 * k as f64 / 8.0);
                let z = at.matrix().quad(&y);
                let d = crate::boundary::support_gap(at.branches(), z).0.abs();
                assert!(d < 1e-9, "{d}");
            }
        }
        for s in &p.segments {
            if let PathSegment::Round(r) = s {
                let v = &r.vectors[0];
                let basis = (0..3).filter(|&k| v[k].norm() > 1.0 - 1e-9).count();
                assert_eq!(basis, 1);
            }
        }
        assert!(p.max_anchor_imaginary() < 1e-12);
    }

    #[test]
    fn odd_touch_has_one_jump() {
        let at = atlas(&fixtures::odd_touch());
        let (_, theta) = fixtures::odd_touch_point();
        let base = theta + 2.0;
        let v = at.branches().evaluate(base).unwrap();
        let top = (0..v.lambda.len()).max_by(|&p, &q| v.lambda[p].total_cmp(&v.lambda[q])).unwrap();
        let x0 = UnitVector::new(v.vectors[top].clone()).unwrap();
        let p = canonical_boundary_path(&at, base, base + TAU, &x0, 3).unwrap();
        assert_eq!(p.discontinuity_ts().len(), 1);
        assert!(p.max_anchor_imaginary() < 1e-8);
        let samples = p.samples();
        let mut worst: f64 = 0.0;
        for s in &samples {
            worst = worst.max(at.support_gap(s.z).0.abs());
        }
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn refinement_shrinks_steps() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(9);
        let a = crate::random::random_matrix(&mut rng, 3);
        let mut prev = f64::INFINITY;
        let w = random_vector(&mut rng, 3);
        for grid in [512, 2048] {
            let at = build_boundary_atlas(&a, &ToleranceConfig::default().with_grid(grid)).unwrap();
            let ba = at.branches();
            let v = ba.evaluate(0.0).unwrap();
            let top = (0..3).max_by(|&p, &q| v.lambda[p].total_cmp(&v.lambda[q])).unwrap();
            let t0 = ba.theta0();
            let s = spectral_projection_path(ba, &[top], t0, t0 + 0.5, &w, 1e-8).unwrap();
            let jump = s
                .vectors
                .windows(2)
                .map(|p| (p[1].dotc(&p[0]) - C64::new(1.0, 0.0)).norm())
                .fold(0.0, f64::max);
            assert!(jump < prev);
            prev = jump;
        }
    }
}
