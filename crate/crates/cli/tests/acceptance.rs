//! One line per acceptance criterion; exits non-zero if any fails.

use std::f64::consts::TAU;
use std::time::Instant;

use nrsel::boundary::build_boundary_atlas;
use nrsel::branches::track_branches;
use nrsel::chord::{chord_beta, chord_residual, ChordConstant};
use nrsel::continuity::classify_continuity;
use nrsel::fixtures;
use nrsel::linalg::CVector;
use nrsel::oracle::{compare_resolutions, compare_resolutions_with, openness_probe, ProbeVerdict};
use nrsel::random::{random_matrix, random_nonnormal_2x2, random_normal_matrix};
use nrsel::selection::{select, select_with_atlas, SelectionField, Strategy};
use nrsel::{ComplexMatrix, ToleranceConfig, C64};
use nrsel_cli::commands::evaluate_grid;
use nrsel_cli::MatrixFile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CRITICAL_CURVE_TOL: f64 = 1e-9;
const CHORD_TOL: f64 = 1e-8;
const SELECTION_TOL: f64 = 1e-7;
const NORM_TOL: f64 = 1e-10;
const AUDIT_RATIO: f64 = 0.9;
const SUPPORT_TOL: f64 = 1e-7;
const EXCISION_FRACTION: f64 = 0.05;
const QUERY_GRID: usize = 100;

type Check = fn() -> Outcome;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// Eigenvalue of `Re(e^{-iθ}A)` whose eigenvector best matches `x`.
fn matched_eigenvalue(a: &ComplexMatrix, theta: f64, x: &CVector) -> f64 {
    let e = a.rotate(theta).real_part().hermitian_eigs().unwrap();
    let j = (0..e.len())
        .max_by(|&p, &q| e.vector(p).dotc(x).norm().total_cmp(&e.vector(q).dotc(x).norm()))
        .unwrap();
    e.eigenvalues[j]
}

/// Richardson-extrapolated central difference of the branch through `x`.
fn fd_derivative(a: &ComplexMatrix, theta: f64, x: &CVector) -> f64 {
    let d = 1e-4;
    let c = |h: f64| (matched_eigenvalue(a, theta + h, x) - matched_eigenvalue(a, theta - h, x)) / (2.0 * h);
    (4.0 * c(d / 2.0) - c(d)) / 3.0
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut direct, mut fd): (f64, f64) = (0.0, 0.0);
    for k in 0..50 {
        let a = random_matrix(&mut rng, 2 + k % 5);
        let atlas = track_branches(&a, 2048).expect("tracking");
        let s = a.scale();
        for b in atlas.branches() {
            for i in 0..atlas.grid_size() {
                let theta = atlas.theta(i);
                let x = &b.vectors[i];
                let z = a.quad(x);
                direct = direct.max((atlas.critical_point(b.id, i) - z).norm() / s);
                let lambda = matched_eigenvalue(&a, theta, x);
                let curve = C64::from_polar(1.0, theta) * C64::new(lambda, fd_derivative(&a, theta, x));
                fd = fd.max((curve - z).norm() / s);
            }
        }
    }
    outcome(
        direct <= CRITICAL_CURVE_TOL && fd <= CRITICAL_CURVE_TOL,
        format!(
            "critical curve vs f_A(x) over 50 matrices: tracked derivative {direct:.2e}, finite-difference derivative {fd:.2e} (tol {CRITICAL_CURVE_TOL:.0e})"
        ),
    )
}

fn top_vector(a: &ComplexMatrix, theta: f64) -> CVector {
    let e = a.rotate(theta).real_part().hermitian_eigs().unwrap();
    e.vector(e.len() - 1)
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let lambdas: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
    let (mut squared, mut unsquared): (f64, f64) = (0.0, 0.0);
    let mut unsquared_failures = 0;
    let mut used = 0;
    while used < 200 {
        let a = random_nonnormal_2x2(&mut rng);
        let t1 = rng.random::<f64>() * TAU;
        let t2 = t1 + 0.3 + rng.random::<f64>() * 2.5;
        let (x, y) = (top_vector(&a, t1), top_vector(&a, t2));
        let Ok(beta) = chord_beta(&x, &y, true) else { continue };
        used += 1;
        let s = a.scale();
        let r = chord_residual(&a, &x, &y, beta, &lambdas, ChordConstant::Squared).unwrap() / s;
        let u = chord_residual(&a, &x, &y, beta, &lambdas, ChordConstant::Unsquared).unwrap() / s;
        squared = squared.max(r);
        unsquared = unsquared.max(u);
        if u > CHORD_TOL {
            unsquared_failures += 1;
        }
    }
    outcome(
        squared <= CHORD_TOL && unsquared_failures > 0,
        format!(
            "chord residual: squared constant max {squared:.2e} (tol {CHORD_TOL:.0e}); unsquared constant fails on {unsquared_failures}/200 (max {unsquared:.2e})"
        ),
    )
}

struct FieldCheck {
    residual: f64,
    norm: f64,
    ratio: f64,
    audit_passed: bool,
    points: usize,
}

fn check_field(f: &SelectionField) -> FieldCheck {
    let s = f.matrix().scale();
    let (points, _) = evaluate_grid(f, QUERY_GRID);
    let residual = points.iter().map(|p| p.residual).fold(0.0, f64::max) / s;
    let norm = points
        .iter()
        .map(|p| (p.g.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs())
        .fold(0.0, f64::max);
    let cmp = compare_resolutions(f);
    FieldCheck {
        residual,
        norm,
        ratio: cmp.ratio,
        audit_passed: cmp.passed,
        points: points.len(),
    }
}

fn criterion_3() -> Outcome {
    let cfg = ToleranceConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut cases: Vec<(String, ComplexMatrix)> = (0..30).map(|k| (format!("random n={}", 2 + k % 2), random_matrix(&mut rng, 2 + k % 2))).collect();
    cases.extend((0..10).map(|k| (format!("normal n={}", 2 + k % 5), random_normal_matrix(&mut rng, 2 + k % 5))));
    let (mut residual, mut norm, mut ratio): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut bad = Vec::new();
    for (k, (name, a)) in cases.iter().enumerate() {
        let f = match select(a, None, &cfg) {
            Ok(f) => f,
            Err(e) => {
                bad.push(format!("#{k} {name}: {e}"));
                continue;
            }
        };
        let c = check_field(&f);
        residual = residual.max(c.residual);
        norm = norm.max(c.norm);
        ratio = ratio.max(c.ratio);
        if !(c.residual <= SELECTION_TOL && c.norm <= NORM_TOL && c.audit_passed && c.ratio <= AUDIT_RATIO && c.points > 0) {
            bad.push(format!("#{k} {name} ({}): residual {:.2e} norm {:.2e} ratio {:.3}", f.strategy().as_str(), c.residual, c.norm, c.ratio));
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "selection on 40 matrices: max residual {residual:.2e} (tol {SELECTION_TOL:.0e}), norm dev {norm:.2e} (tol {NORM_TOL:.0e}), max jump ratio {ratio:.3} (tol {AUDIT_RATIO}){}",
            if bad.is_empty() { String::new() } else { format!("; failing: {}", bad.join(", ")) }
        ),
    )
}

fn criterion_4() -> Outcome {
    let cfg = ToleranceConfig::default();
    let a = fixtures::odd_touch();
    let atlas = build_boundary_atlas(&a, &cfg).unwrap();
    let report = classify_continuity(&atlas).unwrap();
    let (w, _) = fixtures::odd_touch_point();
    let degree_ok = report.weak_failures.len() == 1
        && report.weak_failures[0].split_degree.is_odd_at_least_three()
        && (report.weak_failures[0].z - w).norm() < 1e-6;
    let probe = openness_probe(&a, w, cfg.seed).unwrap();
    let probe_ok = probe.verdict == ProbeVerdict::FailureEvidence;
    let eps = EXCISION_FRACTION * atlas.diameter();
    let f = match select_with_atlas(&atlas, Some(eps)) {
        Ok(f) => f,
        Err(e) => return outcome(false, format!("excised selection failed: {e}")),
    };
    let c = check_field(&f);
    let excised_ok = f.strategy() == Strategy::Excised && f.excised().len() == 1 && !f.in_domain(w);
    outcome(
        degree_ok && probe_ok && excised_ok && c.residual <= SELECTION_TOL && c.norm <= NORM_TOL && c.audit_passed,
        format!(
            "excised fixture: split degree {} at touch point, probe {} (distance {:.3}), residual {:.2e}, norm dev {:.2e}, jump ratio {:.3}, audit {}",
            report.weak_failures.first().map_or("none".into(), |f| f.split_degree.to_string()),
            probe.verdict.as_str(),
            probe.distance,
            c.residual,
            c.norm,
            c.ratio,
            if c.audit_passed { "passed" } else { "failed" }
        ),
    )
}

fn criterion_5() -> Outcome {
    let cfg = ToleranceConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let suite: Vec<(&str, ComplexMatrix)> = vec![
        ("normal", random_normal_matrix(&mut rng, 3)),
        ("random n=3", random_matrix(&mut rng, 3)),
        ("disk", fixtures::disk()),
        ("degree-1 flat", fixtures::stadium()),
        ("degree-3 touch", fixtures::odd_touch()),
    ];
    let mut checked = 0;
    let mut inconclusive = 0;
    let mut contradictions = Vec::new();
    for (name, a) in &suite {
        let atlas = build_boundary_atlas(a, &cfg).unwrap();
        let report = classify_continuity(&atlas).unwrap();
        let mut targets: Vec<(C64, bool)> = report.points.iter().map(|p| (p.z, p.weakly_continuous)).collect();
        if targets.is_empty() {
            let s = atlas.boundary_samples();
            targets.push((s[s.len() / 3].z, true));
        }
        for (z, weak) in targets {
            checked += 1;
            let verdict = match openness_probe(a, z, cfg.seed) {
                Ok(p) => p.verdict,
                Err(e) => {
                    contradictions.push(format!("{name}: probe error {e}"));
                    continue;
                }
            };
            match (weak, verdict) {
                (true, ProbeVerdict::FailureEvidence) | (false, ProbeVerdict::WeaklyContinuousEvidence) => {
                    contradictions.push(format!("{name} at ({:.4}, {:.4}): classifier weak={weak}, probe {}", z.re, z.im, verdict.as_str()))
                }
                (false, ProbeVerdict::Inconclusive) => contradictions.push(format!("{name}: inconclusive on the failure set")),
                (true, ProbeVerdict::Inconclusive) => inconclusive += 1,
                _ => {}
            }
        }
    }
    outcome(
        contradictions.is_empty(),
        format!(
            "classifier vs probe: {checked} points on 5 fixtures, {} contradictions, {inconclusive} inconclusive off the failure set{}",
            contradictions.len(),
            if contradictions.is_empty() { String::new() } else { format!(": {}", contradictions.join("; ")) }
        ),
    )
}

fn criterion_6() -> Outcome {
    let cfg = ToleranceConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let suite = vec![
        fixtures::disk(),
        fixtures::triangle(),
        fixtures::stadium(),
        fixtures::ellipse(),
        fixtures::odd_touch(),
        fixtures::even_touch(),
        fixtures::double_odd_touch(),
        random_normal_matrix(&mut rng, 4),
        random_matrix(&mut rng, 3),
    ];
    let (mut support, mut convexity): (f64, f64) = (0.0, 0.0);
    for a in &suite {
        let atlas = build_boundary_atlas(a, &cfg).unwrap();
        support = support.max(atlas.support_agreement() / a.scale());
        convexity = convexity.max(atlas.convexity_violation() / a.scale());
    }
    outcome(
        support <= SUPPORT_TOL && convexity <= SUPPORT_TOL,
        format!("boundary atlas on {} fixtures: support agreement {support:.2e}, convexity violation {convexity:.2e} (tol {SUPPORT_TOL:.0e})", suite.len()),
    )
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["nrsel"];
    argv.extend_from_slice(args);
    let code = nrsel_cli::run(argv, &mut out, &mut err);
    (code, out, String::from_utf8_lossy(&err).into_owned())
}

fn criterion_7() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("triangle.json");
    std::fs::write(&m, serde_json::to_string(&MatrixFile::from_matrix(&fixtures::triangle(), None)).unwrap()).unwrap();
    let sel = dir.path().join("sel.json");
    let (code, _, _) = run_cli(&["select", m.to_str().unwrap(), "--grid", "40", "--no-audit", "--out", sel.to_str().unwrap()]);
    let (clean, _, _) = run_cli(&["verify", m.to_str().unwrap(), sel.to_str().unwrap(), "--no-audit"]);
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sel).unwrap()).unwrap();
    let k = v["points"].as_array().unwrap().len() / 3;
    v["points"][k]["g"][0] = serde_json::Value::from(v["points"][k]["g"][0].as_f64().unwrap() + 0.5);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();
    let (corrupted, _, _) = run_cli(&["verify", m.to_str().unwrap(), bad.to_str().unwrap(), "--no-audit"]);

    let f = select(&fixtures::disk(), None, &ToleranceConfig::default()).unwrap();
    let flip = compare_resolutions_with(&f, |z| {
        let g = f.evaluate(z)?;
        Ok(if z.im > 0.0 { -g } else { g })
    });
    let jump = flip.fine.max_jump;
    outcome(
        code == 0 && clean == 0 && corrupted == 5 && !flip.passed && jump >= 1.0,
        format!("negative controls: clean verify exit {clean}, corrupted verify exit {corrupted}, sign-flip audit fine jump {jump:.3} ({})", if flip.passed { "not flagged" } else { "flagged" }),
    )
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("odd.json");
    std::fs::write(&m, serde_json::to_string(&MatrixFile::from_matrix(&fixtures::odd_touch(), None)).unwrap()).unwrap();
    let eps = format!("{}", 0.2);
    let args = ["--seed", "17", "select", m.to_str().unwrap(), "--grid", "30", "--epsilon", &eps];
    let (c1, o1, _) = run_cli(&args);
    let (c2, o2, _) = run_cli(&args);
    let m2 = dir.path().join("tri.json");
    std::fs::write(&m2, serde_json::to_string(&MatrixFile::from_matrix(&fixtures::triangle(), None)).unwrap()).unwrap();
    let args = ["select", m2.to_str().unwrap(), "--grid", "30"];
    let (c3, o3, _) = run_cli(&args);
    let (c4, o4, _) = run_cli(&args);
    outcome(
        c1 == 0 && c3 == 0 && c1 == c2 && c3 == c4 && o1 == o2 && o3 == o4 && !o1.is_empty(),
        format!("determinism: excised select outputs identical ({} bytes), corner select outputs identical ({} bytes)", o1.len(), o3.len()),
    )
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("1", criterion_1),
        ("2", criterion_2),
        ("3", criterion_3),
        ("4", criterion_4),
        ("5", criterion_5),
        ("6", criterion_6),
        ("7", criterion_7),
        ("8", criterion_8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        if !o.passed {
            failed += 1;
        }
        println!("criterion {id}: {} ({:.1}s) {}", if o.passed { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64(), o.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
