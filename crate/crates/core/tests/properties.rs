//! Property tests over the public API of `qdflow`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as CPoint;
use proptest::prelude::*;

use qdflow::bessel::{EmpiricalMeasure, FamilyParameter};
use qdflow::cxnum::Path;
use qdflow::quaddiff::{
    critical_graph, Branch, EndpointClass, LaunchData, QuadDiff, TraceConfig, TrajectoryKind, TrajectoryPath,
    DEFAULT_GATE_TOL,
};
use qdflow::render::{render_svg, MarkerKind, Scene, StyleClass, Viewport};

/// Closed forms evaluated twice in different but equivalent ways.
const CLOSED_FORM_TOL: f64 = 1e-12;
/// Vieta sum of certified zeros, relative.
const VIETA_TOL: f64 = 1e-8;

fn polar(r: f64, t: f64) -> CPoint {
    CPoint::from_polar(r, t)
}

/// (λ, a, b) with moduli in [0.3, 3] and zeros kept apart.
fn params() -> impl Strategy<Value = QuadDiff> {
    (0.3..3.0f64, 0.0..TAU, 0.3..3.0f64, 0.0..TAU, 0.3..3.0f64, 0.0..TAU)
        .prop_filter_map("distinct zeros", |(rl, tl, ra, ta, rb, tb)| {
            let (a, b) = (polar(ra, ta), polar(rb, tb));
            if (a - b).norm() < 0.1 {
                return None;
            }
            QuadDiff::new(polar(rl, tl), a, b).ok()
        })
}

fn rel(x: CPoint, y: CPoint) -> f64 {
    (x - y).norm() / y.norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn period_difference_is_two_pi_i_lambda(qd in params()) {
        let gap = qd.period(Branch::Plus) - qd.period(Branch::Minus);
        prop_assert!(rel(gap, qd.lambda() * CPoint::new(0.0, TAU)) < CLOSED_FORM_TOL);
    }

    #[test]
    fn gate_values_and_periods_are_scale_invariant(qd in params(), t in 0.05..20.0f64) {
        let s = qd.scaled(t).unwrap();
        let (g, h) = (qd.gate_values(), s.gate_values());
        prop_assert!(rel(h.v_plus, g.v_plus) < CLOSED_FORM_TOL);
        prop_assert!(rel(h.v_minus, g.v_minus) < CLOSED_FORM_TOL);
        for br in [Branch::Plus, Branch::Minus] {
            prop_assert!(rel(s.period(br), qd.period(br)) < CLOSED_FORM_TOL);
        }
    }

    #[test]
    fn phi_transforms_covariantly(qd in params(), t in 0.05..20.0f64, r in 0.2..4.0f64, th in 0.0..TAU) {
        // φ_t(tz) t² = φ(z).
        let z = polar(r, th);
        let s = qd.scaled(t).unwrap();
        prop_assert!(rel(s.phi(z * t) * t * t, qd.phi(z)) < CLOSED_FORM_TOL);
    }

    #[test]
    fn gate_ignores_sign_of_lambda_and_order_of_zeros(qd in params()) {
        let neg = QuadDiff::new(-qd.lambda(), qd.a(), qd.b()).unwrap();
        let swapped = QuadDiff::new(qd.lambda(), qd.b(), qd.a()).unwrap();
        let d = qd.short_trajectory_exists(DEFAULT_GATE_TOL).exists;
        prop_assert_eq!(neg.short_trajectory_exists(DEFAULT_GATE_TOL).exists, d);
        prop_assert_eq!(swapped.short_trajectory_exists(DEFAULT_GATE_TOL).exists, d);
        prop_assert!((neg.gate_margin() - qd.gate_margin()).abs() < CLOSED_FORM_TOL);
    }

    #[test]
    fn constructed_gate_fires(ra in 0.3..3.0f64, ta in 0.0..TAU, rb in 0.3..3.0f64, tb in 0.0..TAU, y in 0.2..3.0f64, plus: bool) {
        let (a, b) = (polar(ra, ta), polar(rb, tb));
        prop_assume!((a - b).norm() > 0.1);
        let w = (a + b) / (a * b).sqrt() + if plus { 2.0 } else { -2.0 };
        prop_assume!(w.norm() > 1e-3);
        let qd = QuadDiff::new(CPoint::new(0.0, y) / w, a, b).unwrap();
        prop_assert!(qd.short_trajectory_exists(DEFAULT_GATE_TOL).exists);
    }

    #[test]
    fn launch_directions_are_a_third_turn_apart(qd in params()) {
        for zero in qd.zeros() {
            let d = qd.launch_directions(zero).unwrap();
            for k in 0..3 {
                let gap = (d[(k + 1) % 3] - d[k]).rem_euclid(TAU);
                prop_assert!((gap - TAU / 3.0).abs() < 1e-9, "{d:?}");
            }
        }
    }

    #[test]
    fn cauchy_transform_weights_each_point_equally(pts in prop::collection::vec((0.1..2.0f64, 0.0..TAU), 1..20), r in 3.0..6.0f64, th in 0.0..TAU) {
        let mu = EmpiricalMeasure::new(pts.iter().map(|&(r, t)| polar(r, t)).collect());
        let z = polar(r, th);
        let want: CPoint = mu.points().iter().map(|p| 1.0 / (z - p)).sum::<CPoint>() / mu.len() as f64;
        prop_assert!(rel(mu.cauchy_transform(z).unwrap(), want) < CLOSED_FORM_TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn vieta_sum_of_family_zeros(re in -6.0..6.0f64, im in -3.0..3.0f64, n in 2usize..40) {
        let a = CPoint::new(re, im);
        prop_assume!((a + 1.0).norm() > 0.05 && (a + 2.0).norm() > 0.05);
        let p = FamilyParameter::new(a).unwrap().polynomial(n);
        let mu = p.zeros().unwrap();
        prop_assert_eq!(mu.len(), n);
        let sum: CPoint = mu.points().iter().sum();
        prop_assert!(rel(sum, p.zero_sum()) < VIETA_TOL, "sum {} vs {}", sum, p.zero_sum());
        for &z in mu.points() {
            prop_assert!(p.relative_value(z) <= qdflow::bessel::CERT_TOL);
        }
    }
}

fn polyline(points: Vec<CPoint>) -> TrajectoryPath {
    TrajectoryPath {
        path: Path::new(points.clone(), false).unwrap(),
        kind: TrajectoryKind::Horizontal,
        launch: LaunchData { zero: None, point: points[0], angle: 0.0 },
        endpoint: EndpointClass::Closed,
        arc_length: 0.0,
        steps: points.len(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rendering_is_deterministic(curves in prop::collection::vec(prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 2..30), 1..6), fixed: bool) {
        let mut scene = Scene::default();
        for c in &curves {
            scene.curves.push((polyline(c.iter().map(|&(x, y)| CPoint::new(x, y)).collect()), StyleClass::Critical));
        }
        scene.markers.push((CPoint::new(0.0, 0.0), MarkerKind::Pole));
        if fixed {
            scene.viewport = Viewport::Fixed { center: CPoint::new(0.5, -0.5), half_width: 3.0 };
        }
        let first = render_svg(&scene).unwrap();
        prop_assert_eq!(&first, &render_svg(&scene.clone()).unwrap());
        prop_assert!(std::str::from_utf8(&first).unwrap().ends_with("</svg>\n"));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn short_trajectory_count_is_scale_invariant(a_re in -4.0..4.0f64, a_im in 0.2..3.0f64, t in 0.2..5.0f64) {
        // Family parameters A with Im A ≠ 0 have exactly one short trajectory.
        let fa = FamilyParameter::new(CPoint::new(a_re, a_im)).unwrap();
        let qd = qdflow::bessel::family_quaddiff(fa).unwrap();
        let cfg = TraceConfig::default();
        let count = |q: &QuadDiff| critical_graph(q, cfg.default_budget(q), &cfg).unwrap().short_trajectories.len();
        let base = count(&qd);
        prop_assert_eq!(base, 1);
        prop_assert_eq!(count(&qd.scaled(t).unwrap()), base);
    }
}

#[test]
fn scaled_graph_is_the_scaled_picture() {
    let qd = QuadDiff::new(CPoint::new(0.0, 1.0), CPoint::new(1.0, 0.0), CPoint::new(4.0, 0.0)).unwrap();
    let cfg = TraceConfig::default();
    let g = critical_graph(&qd, cfg.default_budget(&qd), &cfg).unwrap();
    let t = 2.5;
    let s = qd.scaled(t).unwrap();
    let h = critical_graph(&s, cfg.default_budget(&s), &cfg).unwrap();
    assert_eq!(g.short_trajectories.len(), h.short_trajectories.len());
    for (x, y) in g.short_trajectories.iter().zip(&h.short_trajectories) {
        assert!(rel(y.integral, x.integral) < 1e-6, "{} {}", x.integral, y.integral);
        let len = |p: &TrajectoryPath| p.path.length();
        assert!((len(&y.trajectory) / len(&x.trajectory) - t).abs() < 1e-4);
    }
    // The segment [1, 4] carries |∫| = π/4.
    assert!(g.short_trajectories.iter().any(|s| (s.integral.norm() - PI / 4.0).abs() < 1e-6));
}
