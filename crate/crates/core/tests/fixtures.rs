use std::f64::consts::{PI, TAU};

use nrsel::boundary::{build_boundary_atlas, BoundaryArc, SplitDegree};
use nrsel::continuity::classify_continuity;
use nrsel::fixtures::*;
use nrsel::{ToleranceConfig, C64};

fn disk_support(center: C64, r: f64, t: f64) -> f64 {
    (C64::from_polar(1.0, -t) * center).re + r
}

fn ellipse_support(t: f64) -> f64 {
    (ELLIPSE_A.powi(2) * t.cos().powi(2) + ELLIPSE_B.powi(2) * t.sin().powi(2)).sqrt()
}

fn osculating_support(s: f64, t: f64) -> f64 {
    let (p, phi, rho) = ellipse_point(s);
    disk_support(p - C64::from_polar(rho, phi), rho, t)
}

type Support = Box<dyn Fn(f64) -> f64>;

fn cases() -> Vec<(&'static str, nrsel::ComplexMatrix, Support)> {
    vec![
        ("disk", disk(), Box::new(|t| disk_support(C64::new(0.0, 0.0), 1.0, t))),
        ("triangle", triangle(), Box::new(|t: f64| t.cos().max(t.sin()).max(0.0))),
        (
            "stadium",
            stadium(),
            Box::new(|t| disk_support(C64::new(0.0, 0.0), 1.0, t).max(disk_support(C64::new(3.0, 0.0), 1.0, t))),
        ),
        ("ellipse", ellipse(), Box::new(ellipse_support)),
        (
            "odd-touch",
            odd_touch(),
            Box::new(|t| ellipse_support(t).max(osculating_support(ODD_TOUCH_T, t))),
        ),
        (
            "even-touch",
            even_touch(),
            Box::new(|t| ellipse_support(t).max(osculating_support(0.0, t))),
        ),
    ]
}

#[test]
fn support_functions_match_closed_forms() {
    let cfg = ToleranceConfig::default();
    for (name, a, h) in cases() {
        let atlas = build_boundary_atlas(&a, &cfg).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..997 {
            let t = TAU * k as f64 / 997.0;
            worst = worst.max((atlas.support(t) - h(t)).abs());
        }
        assert!(worst <= 1e-9, "{name}: {worst}");
        let hull: f64 = atlas
            .boundary_samples()
            .iter()
            .map(|s| {
                (0..360)
                    .map(|k| {
                        let t = TAU * k as f64 / 360.0;
                        (C64::from_polar(1.0, -t) * s.z).re - h(t)
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(hull <= 1e-7, "{name}: boundary sample outside by {hull}");
        assert!(atlas.convexity_violation() <= 1e-7, "{name}");
        assert!(atlas.support_agreement() <= 1e-7 * a.scale(), "{name}");
    }
}

#[test]
fn boundary_shapes() {
    let cfg = ToleranceConfig::default();
    let t = build_boundary_atlas(&triangle(), &cfg).unwrap();
    assert_eq!(t.corners.len(), 3);
    assert_eq!(t.flats().count(), 3);
    let s = build_boundary_atlas(&stadium(), &cfg).unwrap();
    assert_eq!(s.corners.len(), 0);
    assert_eq!(s.flats().count(), 2);
    for (_, arc) in s.flats() {
        if let BoundaryArc::Flat { theta, .. } = arc {
            let d = (theta - PI / 2.0).rem_euclid(PI);
            assert!(d.min(PI - d) < 1e-9);
        }
    }
    let d = build_boundary_atlas(&disk(), &cfg).unwrap();
    assert!(d.corners.is_empty() && d.flats().count() == 0);
    assert!((d.diameter() - 2.0).abs() < 1e-9);
}

#[test]
fn classification_of_touching_configurations() {
    let cfg = ToleranceConfig::default();
    let odd = classify_continuity(&build_boundary_atlas(&odd_touch(), &cfg).unwrap()).unwrap();
    assert_eq!(odd.weak_failures.len(), 1);
    let (p, phi) = odd_touch_point();
    let f = &odd.weak_failures[0];
    assert!((f.z - p).norm() < 1e-6);
    let dt = (f.theta - phi).rem_euclid(TAU);
    assert!(dt.min(TAU - dt) < 1e-6);
    assert_eq!(f.split_degree, SplitDegree::Finite(3));

    let even = classify_continuity(&build_boundary_atlas(&even_touch(), &cfg).unwrap()).unwrap();
    assert!(even.weak_failures.is_empty());
    assert!(!even.strong_failures.is_empty());

    let two = classify_continuity(&build_boundary_atlas(&double_odd_touch(), &cfg).unwrap()).unwrap();
    assert_eq!(two.weak_failures.len(), 2);
    for q in double_odd_touch_points() {
        assert!(two.weak_failures.iter().any(|f| (f.z - q).norm() < 1e-6));
    }

    for a in [disk(), triangle(), ellipse()] {
        let r = classify_continuity(&build_boundary_atlas(&a, &cfg).unwrap()).unwrap();
        assert!(r.weak_failures.is_empty() && r.strong_failures.is_empty());
    }
}
