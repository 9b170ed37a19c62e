//! The generalized Bessel family through the public API: traced graphs,
//! mass split between short trajectories, densities and zero clustering.

use std::f64::consts::TAU;

use num_complex::Complex64 as CPoint;

use qdflow::bessel::{family_quaddiff, overlay_distance, FamilyParameter};
use qdflow::motherbody::AlgebraicEquation;
use qdflow::quaddiff::{critical_graph, CriticalGraph, TraceConfig};

fn c(re: f64, im: f64) -> CPoint {
    CPoint::new(re, im)
}

fn family_graph(a: CPoint) -> (FamilyParameter, CriticalGraph) {
    let fa = FamilyParameter::new(a).unwrap();
    let qd = family_quaddiff(fa).unwrap();
    let cfg = TraceConfig::default();
    (fa, critical_graph(&qd, cfg.default_budget(&qd), &cfg).unwrap())
}

fn masses(g: &CriticalGraph) -> Vec<f64> {
    let mut m: Vec<f64> = g.short_trajectories.iter().map(|s| s.integral.norm() / TAU).collect();
    m.sort_by(f64::total_cmp);
    m
}

#[test]
fn real_a_beyond_minus_one_splits_mass_one_and_a_plus_one() {
    for (a, big) in [(3.0, 4.0), (5.0, 6.0)] {
        let (_, g) = family_graph(c(a, 0.0));
        assert_eq!(g.short_trajectories.len(), 2);
        assert!(g.short_trajectories.iter().all(|s| !s.is_loop()));
        let m = masses(&g);
        assert!((m[0] - 1.0).abs() < 1e-6 && (m[1] - big).abs() < 1e-6, "{m:?}");
    }
}

#[test]
fn real_a_below_minus_one_has_a_segment_and_a_loop() {
    let (_, g) = family_graph(c(-1.01, 0.0));
    assert_eq!(g.short_trajectories.len(), 2);
    let lp = g.short_trajectories.iter().find(|s| s.is_loop()).expect("loop");
    let seg = g.short_trajectories.iter().find(|s| !s.is_loop()).expect("segment");
    assert!((seg.integral.norm() / TAU - 0.01).abs() < 1e-6);
    assert!((lp.integral.norm() / TAU - 0.99).abs() < 1e-6);
}

#[test]
fn complex_a_has_one_short_trajectory_of_unit_mass() {
    for a in [c(-1.0, 0.1), c(-2.0, 2.0), c(1.0, 1.0)] {
        let (fa, g) = family_graph(a);
        assert_eq!(g.short_trajectories.len(), 1, "A = {a}");
        let s = &g.short_trajectories[0];
        let d = fa.equation().density_along(&s.trajectory).unwrap();
        assert!((d.total_mass - 1.0).abs() < 1e-3, "A = {a}: {}", d.total_mass);
        assert!(d.min_weight() > -1e-9, "negative weight for A = {a}");
    }
}

#[test]
fn motherbody_equation_of_the_family_matches() {
    let eq = AlgebraicEquation::new(c(-3.0, 0.0), c(-1.0, 0.0), c(-4.0, 0.0)).unwrap();
    let fam = FamilyParameter::new(c(3.0, 0.0)).unwrap().equation();
    assert_eq!((eq.p(), eq.q(), eq.r()), (fam.p(), fam.q(), fam.r()));
    let m = eq.masses();
    assert!(m.real_mass_exists);
    let mut re = [m.m_plus.re, m.m_minus.re];
    re.sort_by(f64::total_cmp);
    assert_eq!(re, [-4.0, 1.0]);
}

#[test]
fn zeros_approach_the_short_trajectory() {
    let fa = FamilyParameter::new(c(-2.0, 2.0)).unwrap();
    let cfg = TraceConfig::default();
    let m20 = overlay_distance(fa, 20, &cfg).unwrap();
    let m80 = overlay_distance(fa, 80, &cfg).unwrap();
    assert_eq!(m80.short_trajectories, 1);
    assert!(m80.max_dist < m20.max_dist && m80.max_dist < 0.01, "{m20:?} {m80:?}");
}
