//! Brute-force checks that do not use the branch atlas: preimage search on
//! the unit sphere, empirical openness probes at boundary points,
//! continuity audits of selection fields, and the Bloch map for `2×2`.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::boundary::golden_min;
use crate::error::{Error, Result};
use crate::linalg::{eigh, phase_distance, CMatrix, CVector, ComplexMatrix, UnitVector, C64};
use crate::random::random_unit_vector;
use crate::selection::SelectionField;

/// Distance modulo phase below which two preimages are merged.
pub const FIBER_MERGE: f64 = 0.05;
/// Approach directions of an openness probe.
pub const PROBE_DIRECTIONS: usize = 8;
/// Ratio between consecutive approach radii.
pub const PROBE_DECAY: f64 = 0.5;
pub const PROBE_STEPS: usize = 12;
/// Nearest-preimage distance that counts as a failure witness.
pub const FAILURE_DISTANCE: f64 = 0.1;
/// Nearest-preimage distance that counts as convergence.
pub const CONVERGED_DISTANCE: f64 = 0.05;
/// Largest fine-to-coarse jump ratio accepted by [`compare_resolutions`].
pub const AUDIT_RATIO: f64 = 0.9;
const LM_ITERATIONS: usize = 400;
const SEARCH_TOL: f64 = 1e-8;

/// `|x*Ax − z|²`.
pub fn objective(a: &ComplexMatrix, z: C64, x: &CVector) -> f64 {
    (a.quad(x) - z).norm_sqr()
}

/// Ambient gradient `g` of [`objective`], in the sense `dφ = Re<g, dx>`:
/// `g = 2(conj(q)Ax + qA*x)` with `q = x*Ax − z`.
pub fn objective_gradient(a: &ComplexMatrix, z: C64, x: &CVector) -> CVector {
    let m = a.as_matrix();
    let q = a.quad(x) - z;
    let ax = m * x;
    let ahx = m.adjoint() * x;
    (ax * q.conj() + ahx * q) * C64::new(2.0, 0.0)
}

fn re_inner(x: &CVector, y: &CVector) -> f64 {
    x.dotc(y).re
}

/// Levenberg–Marquardt on the unit sphere for the two real residuals
/// `Re q`, `Im q`. Returns the final point and `|q|`.
pub fn local_preimage(a: &ComplexMatrix, z: C64, start: &CVector) -> (CVector, f64) {
    let m = a.as_matrix();
    let mh = m.adjoint();
    let stop = 1e-15 * a.scale().max(f64::MIN_POSITIVE);
    let i = C64::i();
    let mut x = start / C64::new(start.norm(), 0.0);
    let mut q = a.quad(&x) - z;
    let mut mu = 1e-3;
    for _ in 0..LM_ITERATIONS {
        if q.norm() <= stop {
            break;
        }
        let ax = m * &x;
        let ahx = &mh * &x;
        let mut g = [&ax + &ahx, (&ahx - &ax) * i];
        for v in g.iter_mut() {
            let c = re_inner(&x, v);
            *v -= &x * C64::new(c, 0.0);
        }
        let j00 = re_inner(&g[0], &g[0]);
        let j01 = re_inner(&g[0], &g[1]);
        let j11 = re_inner(&g[1], &g[1]);
        let scale = (j00 + j11).max(f64::MIN_POSITIVE);
        let mut improved = false;
        for _ in 0..30 {
            let d = mu * scale;
            let (p, r, s) = (j00 + d, j01, j11 + d);
            let det = p * s - r * r;
            let c0 = (s * q.re - r * q.im) / det;
            let c1 = (p * q.im - r * q.re) / det;
            let step = &g[0] * C64::new(-c0, 0.0) + &g[1] * C64::new(-c1, 0.0);
            let cand = &x + step;
            let cand = &cand / C64::new(cand.norm(), 0.0);
            let qc = a.quad(&cand) - z;
            if qc.norm() < q.norm() {
                x = cand;
                q = qc;
                mu = (mu * 0.3).max(1e-12);
                improved = true;
                break;
            }
            mu *= 5.0;
        }
        if !improved {
            break;
        }
    }
    (x, q.norm())
}

/// Preimage of `w` near `y`: local searches from `y` and from perturbations
/// of `y` of size `spread`; the nearest converged result wins.
pub fn nearest_preimage(a: &ComplexMatrix, w: C64, y: &CVector, spread: f64, seed: u64) -> (CVector, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = SEARCH_TOL * a.scale();
    let mut best: Option<(CVector, f64, f64)> = None;
    for k in 0..6 {
        let start = if k == 0 {
            y.clone()
        } else {
            let v = random_unit_vector(&mut rng, a.dim());
            y + v.as_vector() * C64::new(spread, 0.0)
        };
        let (x, r) = local_preimage(a, w, &start);
        let d = phase_distance(&x, y);
        let better = match &best {
            None => true,
            Some((_, br, bd)) => match (r <= tol, *br <= tol) {
                (true, true) => d < *bd,
                (true, false) => true,
                (false, true) => false,
                (false, false) => r < *br,
            },
        };
        if better {
            best = Some((x, r, d));
        }
        if k == 0 && r <= tol && d < 1e-3 {
            break;
        }
    }
    let (x, r, _) = best.unwrap();
    (x, r)
}

#[derive(Debug, Clone)]
pub struct PreimageResult {
    pub x: UnitVector,
    pub residual: f64,
    pub restarts_used: usize,
}

/// Best of up to `restarts` local searches from seeded random unit starts,
/// stopping early once the residual is below `1e-12·‖A‖`.
pub fn preimage_search(a: &ComplexMatrix, z: C64, restarts: usize, seed: u64) -> PreimageResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let good = 1e-12 * a.scale().max(f64::MIN_POSITIVE);
    let mut best: Option<(CVector, f64)> = None;
    let mut used = 0;
    for _ in 0..restarts.max(1) {
        used += 1;
        let s = random_unit_vector(&mut rng, a.dim());
        let (x, r) = local_preimage(a, z, s.as_vector());
        if best.as_ref().is_none_or(|b| r < b.1) {
            best = Some((x, r));
        }
        if best.as_ref().unwrap().1 <= good {
            break;
        }
    }
    let (x, residual) = best.unwrap();
    PreimageResult {
        x: UnitVector::new(x).expect("iterates stay on the sphere"),
        residual,
        restarts_used: used,
    }
}

/// Representatives, modulo phase, of preimages found from `samples`
/// random starts.
pub fn enumerate_preimage_fiber(a: &ComplexMatrix, z: C64, samples: usize, seed: u64) -> Vec<UnitVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = SEARCH_TOL * a.scale();
    let found: Vec<CVector> = (0..samples)
        .filter_map(|_| {
            let s = random_unit_vector(&mut rng, a.dim());
            let (x, r) = local_preimage(a, z, s.as_vector());
            (r <= tol).then_some(x)
        })
        .collect();
    cluster(found)
        .into_iter()
        .map(|v| UnitVector::new(v).expect("unit"))
        .collect()
}

fn cluster(vs: Vec<CVector>) -> Vec<CVector> {
    let mut reps: Vec<CVector> = Vec::new();
    for v in vs {
        if reps.iter().all(|r| phase_distance(r, &v) > FIBER_MERGE) {
            reps.push(v);
        }
    }
    reps
}

/// Numerical rank of the span of `vectors`.
pub fn fiber_rank(vectors: &[UnitVector]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let n = vectors[0].dim();
    let m = CMatrix::from_fn(n, vectors.len(), |i, j| vectors[j].as_vector()[i]);
    let sv = m.singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-6 * top).count()
}

/// `√(λ_max(H(θ))` etc. computed without the atlas.
fn top_eigen(a: &ComplexMatrix, theta: f64) -> Result<(f64, Vec<f64>, CMatrix)> {
    let e = eigh(a.rotate(theta).real_part().as_matrix())?;
    let top = *e.eigenvalues.last().unwrap();
    Ok((top, e.eigenvalues.clone(), e.eigenvectors.clone()))
}

fn support(a: &ComplexMatrix, theta: f64) -> f64 {
    top_eigen(a, theta).map(|e| e.0).unwrap_or(f64::NAN)
}

/// `min_θ (h(θ) − Re(e^{-iθ}z))` over a 256-point scan refined by golden
/// section, with its minimizer.
pub fn scan_support_gap(a: &ComplexMatrix, z: C64) -> (f64, f64) {
    let n = 256;
    let gap = |t: f64| support(a, t) - (C64::from_polar(1.0, -t) * z).re;
    let (i, _) = (0..n)
        .map(|i| gap(TAU * i as f64 / n as f64))
        .enumerate()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap();
    let h = TAU / n as f64;
    let t0 = TAU * i as f64 / n as f64;
    let (t, g) = golden_min(gap, t0 - h, t0 + h);
    (g, t.rem_euclid(TAU))
}

/// `max_θ (h(θ) + h(θ+π))` over 512 normals.
pub fn scan_diameter(a: &ComplexMatrix) -> f64 {
    (0..256)
        .map(|i| {
            let t = PI * i as f64 / 256.0;
            support(a, t) + support(a, t + PI)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeVerdict {
    WeaklyContinuousEvidence,
    FailureEvidence,
    Inconclusive,
}

impl ProbeVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            ProbeVerdict::WeaklyContinuousEvidence => "weakly-continuous-evidence",
            ProbeVerdict::FailureEvidence => "failure-evidence",
            ProbeVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// One approach sequence `z_k → z` with the nearest-preimage distance
/// from the witness vector at each step.
#[derive(Debug, Clone)]
pub struct Approach {
    pub label: String,
    pub points: Vec<C64>,
    pub distances: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl Approach {
    fn last_distance(&self) -> Option<f64> {
        self.distances.last().copied()
    }
}

#[derive(Debug, Clone)]
pub struct OpennessProbe {
    pub target: C64,
    pub normal: f64,
    pub verdict: ProbeVerdict,
    /// `min_y max_k` of the final nearest-preimage distances over the
    /// sampled fiber at the target.
    pub distance: f64,
    pub witness: UnitVector,
    pub approaches: Vec<Approach>,
}

/// Unit vectors spanning the eigenspace of the largest eigenvalue of
/// `Re(e^{-iθ}A)` (within `tol`).
fn top_space(a: &ComplexMatrix, theta: f64, tol: f64) -> Result<CMatrix> {
    let (top, vals, vecs) = top_eigen(a, theta)?;
    let cols: Vec<usize> = (0..vals.len()).filter(|&j| top - vals[j] <= tol).collect();
    Ok(CMatrix::from_fn(a.dim(), cols.len(), |i, j| vecs[(i, cols[j])]))
}

/// Nearest preimage of `w` to `y` inside the range of `v`.
fn nearest_in_space(a: &ComplexMatrix, v: &CMatrix, w: C64, y: &CVector) -> (f64, f64) {
    if v.ncols() == 1 {
        let x = v.column(0).into_owned();
        return (phase_distance(&x, y), (a.quad(&x) - w).norm());
    }
    let ac = ComplexMatrix::new(v.adjoint() * a.as_matrix() * v).expect("finite");
    let mut start = v.adjoint() * y;
    if start.norm() < 1e-8 {
        start = CVector::from_element(v.ncols(), C64::new(1.0, 0.0));
    }
    let (x, r) = local_preimage(&ac, w, &start);
    (phase_distance(&(v * x), y), r)
}

#[derive(Debug, Clone, Copy)]
enum Route {
    /// Along the boundary: over a flat (`Some(τ)`) or by turning the normal.
    Boundary { sign: f64, flat: Option<C64>, reach: f64 },
    Interior(C64),
}

/// Empirical openness of `f_A` at the boundary point `z`: for every
/// sampled `y` in the fiber at `z`, finds how close preimages of nearby
/// points come to `y` along eight approach sequences.
pub fn openness_probe(a: &ComplexMatrix, z: C64, seed: u64) -> Result<OpennessProbe> {
    let s = a.scale();
    let (gap, theta) = scan_support_gap(a, z);
    if gap.abs() > 1e-6 * s {
        return Err(Error::NotOnBoundary { distance: gap.abs() });
    }
    let diam = scan_diameter(a);
    let r0 = 0.02 * diam;
    let space = top_space(a, theta, 1e-7 * s)?;
    let tangent = C64::new(0.0, 1.0) * C64::from_polar(1.0, theta);

    let mut routes = Vec::with_capacity(PROBE_DIRECTIONS);
    let (kmin, kmax, sz) = if space.ncols() > 1 {
        let ac = ComplexMatrix::new(space.adjoint() * a.as_matrix() * &space)?;
        let e = eigh(ac.rotate(theta + 0.5 * PI).real_part().as_matrix())?;
        (e.eigenvalues[0], *e.eigenvalues.last().unwrap(), (tangent.conj() * z).re)
    } else {
        (0.0, 0.0, 0.0)
    };
    for sign in [1.0, -1.0] {
        let extent = if sign > 0.0 { kmax - sz } else { sz - kmin };
        let flat = (extent > 1e-6 * s).then_some(tangent * sign);
        let reach = if flat.is_some() { r0.min(0.5 * extent) } else { 0.1 };
        routes.push((format!("boundary{}", if sign > 0.0 { "+" } else { "-" }), Route::Boundary { sign, flat, reach }));
    }
    let inward = -C64::from_polar(1.0, theta);
    for deg in [-75.0f64, -45.0, -15.0, 15.0, 45.0, 75.0] {
        routes.push((format!("interior{deg:+}"), Route::Interior(inward * C64::from_polar(1.0, deg.to_radians()))));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fiber: Vec<CVector> = if space.ncols() == 1 {
        vec![space.column(0).into_owned()]
    } else {
        let ac = ComplexMatrix::new(space.adjoint() * a.as_matrix() * &space)?;
        let found: Vec<CVector> = (0..24)
            .filter_map(|_| {
                let st = random_unit_vector(&mut rng, space.ncols());
                let (x, r) = local_preimage(&ac, z, st.as_vector());
                (r <= SEARCH_TOL * s).then(|| &space * x)
            })
            .collect();
        cluster(found)
    };
    if fiber.is_empty() {
        return Err(Error::Unsupported("no preimage found at the target".into()));
    }

    let tol = SEARCH_TOL * s;
    let in_range = |w: C64| scan_support_gap(a, w).0 > 0.0;
    let probe_one = |y: &CVector| -> Result<Vec<Approach>> {
        let mut out = Vec::new();
        for (label, route) in &routes {
            let mut ap = Approach {
                label: label.clone(),
                points: Vec::new(),
                distances: Vec::new(),
                residuals: Vec::new(),
            };
            for k in 0..PROBE_STEPS {
                let f = PROBE_DECAY.powi(k as i32);
                let (w, d, r) = match *route {
                    Route::Boundary { flat: Some(dir), reach, .. } => {
                        let w = z + dir * (reach * f);
                        let (d, r) = nearest_in_space(a, &space, w, y);
                        (w, d, r)
                    }
                    Route::Boundary { sign, flat: None, reach } => {
                        let t = theta + sign * reach * f;
                        let v = top_space(a, t, 1e-7 * s)?;
                        let x = v.column(0).into_owned();
                        let w = a.quad(&x);
                        let (d, r) = nearest_in_space(a, &v, w, y);
                        (w, d, r)
                    }
                    Route::Interior(dir) => {
                        let w = z + dir * (r0 * f);
                        if !in_range(w) {
                            continue;
                        }
                        let spread = (r0 * f / s).sqrt();
                        let (x, r) = nearest_preimage(a, w, y, spread, seed ^ k as u64);
                        (w, phase_distance(&x, y), r)
                    }
                };
                ap.points.push(w);
                ap.distances.push(d);
                ap.residuals.push(r);
            }
            out.push(ap);
        }
        Ok(out)
    };

    let mut best: Option<(f64, bool, usize, Vec<Approach>)> = None;
    for (idx, y) in fiber.iter().enumerate() {
        let aps = probe_one(y)?;
        let reliable = aps
            .iter()
            .all(|ap| ap.residuals.last().is_none_or(|&r| r <= tol));
        let worst = aps
            .iter()
            .filter_map(|ap| ap.last_distance())
            .fold(0.0, f64::max);
        if best.as_ref().is_none_or(|b| worst < b.0) {
            best = Some((worst, reliable, idx, aps));
        }
    }
    let (distance, reliable, idx, approaches) = best.unwrap();
    let verdict = if !reliable {
        ProbeVerdict::Inconclusive
    } else if distance >= FAILURE_DISTANCE {
        ProbeVerdict::FailureEvidence
    } else if distance <= CONVERGED_DISTANCE {
        ProbeVerdict::WeaklyContinuousEvidence
    } else {
        ProbeVerdict::Inconclusive
    };
    Ok(OpennessProbe {
        target: z,
        normal: theta,
        verdict,
        distance,
        witness: UnitVector::new(fiber[idx].clone())?,
        approaches,
    })
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub h: f64,
    pub points: usize,
    pub pairs: usize,
    pub max_jump: f64,
    /// Grid pair attaining `max_jump`.
    pub jump_at: (C64, C64),
    pub max_residual: f64,
    pub max_norm_deviation: f64,
    /// Grid points where the field could not be evaluated.
    pub failures: Vec<(C64, String)>,
}

/// Lower-left corner and extent of the bounding box of the boundary.
fn bounding_box(field: &SelectionField) -> (C64, C64) {
    let at = field.atlas();
    let mut lo = C64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let pts: Vec<C64> = if at.is_full() {
        at.boundary_samples().into_iter().map(|s| s.z).collect()
    } else {
        let (z, _) = field.base();
        match &at.degenerate {
            crate::boundary::Degenerate::Segment { a, b } => vec![*a, *b],
            _ => vec![z],
        }
    };
    for p in pts {
        lo = C64::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = C64::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    (lo, hi)
}

/// Square grid of spacing `h` anchored at the lower-left corner of the
/// bounding box, as `(i, j, z)`.
pub fn audit_grid(field: &SelectionField, h: f64) -> Vec<(i64, i64, C64)> {
    let (lo, hi) = bounding_box(field);
    let ni = ((hi.re - lo.re) / h).floor() as i64;
    let nj = ((hi.im - lo.im) / h).floor() as i64;
    let mut out = Vec::new();
    for i in 0..=ni {
        for j in 0..=nj {
            let z = lo + C64::new(i as f64 * h, j as f64 * h);
            if field.in_domain(z) {
                out.push((i, j, z));
            }
        }
    }
    out
}

fn segment_meets_disk(p: C64, q: C64, c: C64, r: f64) -> bool {
    let d = q - p;
    let s = if d.norm_sqr() > 0.0 {
        (((c - p) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p + d * s - c).norm() < r
}

/// Evaluates `g` on the in-domain grid of spacing `h` and measures the
/// largest jump between horizontally or vertically adjacent points.
pub fn continuity_audit(field: &SelectionField, h: f64) -> AuditReport {
    continuity_audit_with(field, h, |z| field.evaluate(z))
}

/// [`continuity_audit`] of an arbitrary map on the domain of `field`.
pub fn continuity_audit_with<F>(field: &SelectionField, h: f64, eval: F) -> AuditReport
where
    F: Fn(C64) -> Result<CVector> + Sync,
{
    let grid = audit_grid(field, h);
    let a = field.matrix();
    let values: Vec<std::result::Result<CVector, String>> = grid
        .par_iter()
        .map(|&(_, _, z)| eval(z).map_err(|e| e.to_string()))
        .collect();
    let mut report = AuditReport {
        h,
        points: grid.len(),
        pairs: 0,
        max_jump: 0.0,
        jump_at: (C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
        max_residual: 0.0,
        max_norm_deviation: 0.0,
        failures: Vec::new(),
    };
    let mut at = std::collections::HashMap::new();
    for (k, ((i, j, z), v)) in grid.iter().zip(&values).enumerate() {
        match v {
            Ok(g) => {
                report.max_residual = report.max_residual.max((a.quad(g) - z).norm());
                report.max_norm_deviation = report.max_norm_deviation.max((g.norm() - 1.0).abs());
                at.insert((*i, *j), k);
            }
            Err(e) => report.failures.push((*z, e.clone())),
        }
    }
    let disks = field.excised();
    for (&(i, j), &k) in &at {
        for (di, dj) in [(1, 0), (0, 1)] {
            if let Some(&m) = at.get(&(i + di, j + dj)) {
                let (p, q) = (grid[k].2, grid[m].2);
                if disks.iter().any(|&(c, r)| segment_meets_disk(p, q, c, r)) {
                    continue;
                }
                let (gp, gq) = (values[k].as_ref().unwrap(), values[m].as_ref().unwrap());
                let jump = (gp - gq).norm();
                report.pairs += 1;
                if jump > report.max_jump {
                    report.max_jump = jump;
                    report.jump_at = (p, q);
                }
            }
        }
    }
    report
}

#[derive(Debug, Clone)]
pub struct AuditComparison {
    pub coarse: AuditReport,
    pub fine: AuditReport,
    pub ratio: f64,
    pub passed: bool,
}

/// Audits at `h = D/100` and `D/200` and requires the largest jump to
/// shrink by at least [`AUDIT_RATIO`], with all residuals within the
/// field tolerance and unit norms within `1e-10`.
pub fn compare_resolutions(field: &SelectionField) -> AuditComparison {
    compare_resolutions_with(field, |z| field.evaluate(z))
}

/// [`compare_resolutions`] of an arbitrary map on the domain of `field`.
pub fn compare_resolutions_with<F>(field: &SelectionField, eval: F) -> AuditComparison
where
    F: Fn(C64) -> Result<CVector> + Sync,
{
    let d = match field.atlas().is_full() {
        true => field.atlas().diameter(),
        false => scan_diameter(field.matrix()),
    };
    let d = if d > 0.0 { d } else { 1.0 };
    let coarse = continuity_audit_with(field, d / 100.0, &eval);
    let fine = continuity_audit_with(field, d / 200.0, &eval);
    let ratio = if coarse.max_jump > 0.0 { fine.max_jump / coarse.max_jump } else { 0.0 };
    let tol = field.tolerance();
    let clean = |r: &AuditReport| r.failures.is_empty() && r.max_residual <= tol && r.max_norm_deviation <= 1e-10;
    let passed = clean(&coarse) && clean(&fine) && (ratio <= AUDIT_RATIO || coarse.max_jump <= 1e-12);
    AuditComparison {
        coarse,
        fine,
        ratio,
        passed,
    }
}

/// Bloch vector `(<xx*, X₁>, <xx*, X₂>, <xx*, X₃>)` of `x ∈ ℂ²` with
/// `X₁ = [[0,1],[1,0]]`, `X₂ = [[0,i],[−i,0]]`, `X₃ = [[1,0],[0,−1]]`.
pub fn bloch_map(x: &UnitVector) -> Result<[f64; 3]> {
    if x.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: x.dim(),
        });
    }
    let v = x.as_vector();
    let ab = v[0].conj() * v[1];
    Ok([2.0 * ab.re, -2.0 * ab.im, v[0].norm_sqr() - v[1].norm_sqr()])
}

/// Bloch vector of a `2×2` Hermitian matrix: `(tr YX₁, tr YX₂, tr YX₃)`.
pub fn bloch_map_matrix(y: &ComplexMatrix) -> Result<[f64; 3]> {
    if y.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: y.dim(),
        });
    }
    let m = y.as_matrix();
    let i = C64::i();
    let x1 = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let x2 = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), i, -i, C64::new(0.0, 0.0)]);
    let x3 = CMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]);
    let ip = |x: &CMatrix| (m * x).trace().re;
    Ok([ip(&x1), ip(&x2), ip(&x3)])
}
