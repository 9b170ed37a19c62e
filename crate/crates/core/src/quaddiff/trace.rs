//! Trajectory tracing.
//!
//! The path follows dz/ds = ρ·conj(w)/|w| with w a branch-tracked √φ(z)
//! (ρ = 1 horizontal, ρ = i vertical). Each Dormand–Prince predictor step is
//! followed by a corrector that moves the new point along the normal so that the
//! accumulated `∫ w dz` keeps its level (imaginary part for horizontal paths,
//! real part for vertical ones) at the launch value.

use serde::{Deserialize, Serialize};

use super::{InfinityForm, QdError, QuadDiff};
use crate::cxnum::{continuation_ok, nearest_root, ode_step_adaptive, BranchTracker, CPoint, GaussLegendre, NumError, Path};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    Horizontal,
    Vertical,
}

impl TrajectoryKind {
    fn rotation(self) -> CPoint {
        match self {
            TrajectoryKind::Horizontal => CPoint::new(1.0, 0.0),
            TrajectoryKind::Vertical => CPoint::new(0.0, 1.0),
        }
    }

    /// The conserved component of ∫ w dz.
    pub fn level(self, phi: CPoint) -> f64 {
        (phi * self.rotation().conj()).im
    }
}

/// Which simple zero a trajectory is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroId {
    A,
    B,
}

impl ZeroId {
    pub fn other(self) -> ZeroId {
        match self {
            ZeroId::A => ZeroId::B,
            ZeroId::B => ZeroId::A,
        }
    }

    pub fn locate(self, qd: &QuadDiff) -> CPoint {
        match self {
            ZeroId::A => qd.a(),
            ZeroId::B => qd.b(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaunchData {
    /// Zero the path starts from, if any.
    pub zero: Option<ZeroId>,
    /// First integrated point (offset from the zero when launched from one).
    pub point: CPoint,
    /// Launch direction, radians.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum EndpointClass {
    HitsZero { zero: ZeroId, distance: f64 },
    ToOrigin { asymptote: f64 },
    ToInfinity { form: InfinityForm },
    Closed,
    Truncated { arc_length: f64, reason: String },
}

impl EndpointClass {
    pub fn is_truncated(&self) -> bool {
        matches!(self, EndpointClass::Truncated { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            EndpointClass::HitsZero { .. } => "hits_zero",
            EndpointClass::ToOrigin { .. } => "to_origin",
            EndpointClass::ToInfinity { .. } => "to_infinity",
            EndpointClass::Closed => "closed",
            EndpointClass::Truncated { .. } => "truncated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPath {
    pub path: Path,
    pub kind: TrajectoryKind,
    pub launch: LaunchData,
    pub endpoint: EndpointClass,
    pub arc_length: f64,
    pub steps: usize,
}

impl TrajectoryPath {
    pub fn points(&self) -> &[CPoint] {
        self.path.points()
    }

    pub fn start(&self) -> CPoint {
        self.path.points()[0]
    }

    pub fn end(&self) -> CPoint {
        *self.path.points().last().expect("paths have at least two points")
    }

    /// Largest deviation of the conserved component of λ∫√((t−a)(t−b))/t² dt
    /// from its starting value, recomputed by quadrature along the polyline.
    ///
    /// Each sample is divided by max(1, |∫|) so that paths running into the
    /// origin, where the integral grows like 1/|z|, are measured relatively.
    /// Segments ending at a critical point are excluded.
    pub fn level_deviation(&self, qd: &QuadDiff) -> Result<f64, NumError> {
        let pts = self.path.points();
        let mut lo = 0;
        let mut hi = pts.len();
        if self.launch.zero.is_some() {
            lo = 1;
        }
        if matches!(self.endpoint, EndpointClass::HitsZero { .. }) {
            hi -= 1;
        }
        if hi <= lo + 1 {
            return Ok(0.0);
        }
        let rule = GaussLegendre::new(16);
        let first = qd.integrand(pts[lo]);
        let mut tracker = BranchTracker::seeded(first);
        let mut acc = CPoint::new(0.0, 0.0);
        let mut worst: f64 = 0.0;
        for w in pts[lo..hi].windows(2) {
            let mut f = |z: CPoint| {
                tracker.sqrt_continuous(qd.phi(z)).unwrap_or(CPoint::new(f64::NAN, f64::NAN))
            };
            acc += rule.segment(&mut f, w[0], w[1])?;
            let dev = self.kind.level(acc).abs() / acc.norm().max(1.0);
            worst = worst.max(dev);
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    /// Local error tolerance of the predictor.
    pub path_tol: f64,
    /// Steps never exceed this fraction of the distance to the nearest finite critical point.
    pub step_ratio: f64,
    /// Proximity to a zero that ends a path.
    pub eps_zero: f64,
    /// |z| below which a monotone approach counts as reaching the origin.
    pub eps_origin: f64,
    /// Consecutive decreases of |z| required before declaring `to_origin`.
    pub origin_run: usize,
    /// R_max = factor · max(|a|, |b|, 1).
    pub r_max_factor: f64,
    /// Launch offset δ = factor · max(1, |a−b|).
    pub launch_offset: f64,
    /// A pass within factor · |a−b| of a zero counts as hitting it.
    pub capture_rel: f64,
    pub max_steps: usize,
    /// Gauss–Legendre order of the per-step corrector quadrature.
    pub corrector_nodes: usize,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            path_tol: 1e-9,
            step_ratio: 0.2,
            eps_zero: 1e-8,
            eps_origin: 1e-6,
            origin_run: 50,
            r_max_factor: 1e6,
            launch_offset: 1e-6,
            capture_rel: 1e-5,
            max_steps: 400_000,
            corrector_nodes: 8,
        }
    }
}

impl TraceConfig {
    pub fn tightened(&self, factor: f64) -> Self {
        Self { path_tol: self.path_tol / factor, ..*self }
    }

    pub fn r_max(&self, qd: &QuadDiff) -> f64 {
        self.r_max_factor * qd.a().norm().max(qd.b().norm()).max(1.0)
    }

    /// Arc-length budget that comfortably covers an escape to R_max.
    pub fn default_budget(&self, qd: &QuadDiff) -> f64 {
        1e4 * self.r_max(qd)
    }
}

/// Traces a critical trajectory from one of the zeros along `angle`.
pub fn trace_from_zero(
    qd: &QuadDiff,
    zero: ZeroId,
    angle: f64,
    kind: TrajectoryKind,
    budget: f64,
    cfg: &TraceConfig,
) -> Result<TrajectoryPath, QdError> {
    let origin = zero.locate(qd);
    let delta = cfg.launch_offset * qd.scale();
    let start = origin + CPoint::from_polar(delta, angle);
    Tracer::new(qd, kind, cfg, budget).run(Some((zero, origin)), start, angle)
}

/// Traces the trajectory through `start` heading (as closely as the field
/// allows) along `direction`. Starting exactly at a zero launches from it.
pub fn trace(
    qd: &QuadDiff,
    start: CPoint,
    direction: f64,
    kind: TrajectoryKind,
    budget: f64,
    cfg: &TraceConfig,
) -> Result<TrajectoryPath, QdError> {
    if start.norm() < 1e-300 || !start.norm().is_finite() {
        return Err(QdError::LaunchFromPole);
    }
    let snap = 1e-12 * qd.scale();
    for zero in [ZeroId::A, ZeroId::B] {
        if (start - zero.locate(qd)).norm() <= snap {
            return trace_from_zero(qd, zero, direction, kind, budget, cfg);
        }
    }
    Tracer::new(qd, kind, cfg, budget).run(None, start, direction)
}

struct Tracer<'a> {
    qd: &'a QuadDiff,
    kind: TrajectoryKind,
    cfg: &'a TraceConfig,
    budget: f64,
    rule: GaussLegendre,
    rho: CPoint,
}

#[derive(Default, Clone, Copy)]
struct ZoneWatch {
    armed: bool,
    min_dist: f64,
    min_idx: usize,
}

impl<'a> Tracer<'a> {
    fn new(qd: &'a QuadDiff, kind: TrajectoryKind, cfg: &'a TraceConfig, budget: f64) -> Self {
        Self { qd, kind, cfg, budget, rule: GaussLegendre::new(cfg.corrector_nodes), rho: kind.rotation() }
    }

    fn direction(&self, w: CPoint) -> CPoint {
        self.rho * w.conj() / w.norm()
    }

    fn normal(&self, w: CPoint) -> CPoint {
        CPoint::new(0.0, 1.0) * self.rho * w.conj() / w.norm()
    }

    /// ∫ w dz over the segment and the continued w at its end.
    fn segment(&self, z: CPoint, w: CPoint, zn: CPoint) -> Result<(CPoint, CPoint), NumError> {
        let mut tracker = BranchTracker::seeded(w);
        let qd = self.qd;
        let mut f = |p: CPoint| tracker.sqrt_continuous(qd.phi(p)).unwrap_or(CPoint::new(f64::NAN, f64::NAN));
        let dphi = self.rule.segment(&mut f, z, zn)?;
        let wn = tracker.peek(qd.phi(zn))?;
        Ok((dphi, wn))
    }

    fn crit_distance(&self, z: CPoint) -> f64 {
        (z - self.qd.a()).norm().min((z - self.qd.b()).norm()).min(z.norm())
    }

    fn run(&self, from_zero: Option<(ZeroId, CPoint)>, start: CPoint, angle: f64) -> Result<TrajectoryPath, QdError> {
        let qd = self.qd;
        let cfg = self.cfg;
        if !(self.budget > 0.0) {
            return Err(QdError::Numeric(NumError::InvalidArgument("arc-length budget must be positive")));
        }
        if start.norm() == 0.0 {
            return Err(QdError::LaunchFromPole);
        }
        let r_max = cfg.r_max(qd);
        let ab = (qd.a() - qd.b()).norm();
        let capture = cfg.capture_rel * ab;
        let zeros = [(ZeroId::A, qd.a()), (ZeroId::B, qd.b())];
        let zone_radius = |zero: CPoint| 0.1 * ab.min(zero.norm());

        let heading = CPoint::from_polar(1.0, angle);
        let mut w = qd.phi(start).sqrt();
        if w == CPoint::new(0.0, 0.0) {
            return Err(QdError::Numeric(NumError::BranchPoint));
        }
        if (self.direction(w) * heading.conj()).re < 0.0 {
            w = -w;
        }

        let mut points = Vec::with_capacity(1024);
        if let Some((_, p)) = from_zero {
            points.push(p);
        }
        points.push(start);
        let launch = LaunchData { zero: from_zero.map(|(id, _)| id), point: start, angle };

        let mut watch = [ZoneWatch { armed: false, min_dist: f64::INFINITY, min_idx: 0 }; 2];
        for (k, (_, p)) in zeros.iter().enumerate() {
            let own = from_zero.is_some_and(|(_, q)| q == *p);
            watch[k].armed = !own && (start - p).norm() > 1e-3 * zone_radius(*p);
        }
        let mut closed_armed = false;
        let start_scale = self.crit_distance(start);

        let mut z = start;
        let mut phi_acc = CPoint::new(0.0, 0.0);
        let mut arc = 0.0;
        let mut steps = 0usize;
        let mut decreasing = 0usize;
        let mut h = cfg.step_ratio * self.crit_distance(z);

        let finish = |points: Vec<CPoint>, endpoint: EndpointClass, arc: f64, steps: usize| -> Result<TrajectoryPath, QdError> {
            Ok(TrajectoryPath { path: Path::new(points, false)?, kind: self.kind, launch, endpoint, arc_length: arc, steps })
        };

        loop {
            if steps >= cfg.max_steps {
                let reason = format!("step limit {} reached", cfg.max_steps);
                return finish(points, EndpointClass::Truncated { arc_length: arc, reason }, arc, steps);
            }
            if arc >= self.budget {
                let reason = "arc-length budget exhausted".to_string();
                return finish(points, EndpointClass::Truncated { arc_length: arc, reason }, arc, steps);
            }
            let cap = cfg.step_ratio * self.crit_distance(z);
            h = h.min(cap).min(self.budget - arc + 1e-300);

            let wref = w;
            let field = |p: CPoint| self.direction(nearest_root(qd.phi(p).sqrt(), wref));
            let step = match ode_step_adaptive(field, z, h, cfg.path_tol) {
                Ok(s) => s,
                Err(NumError::StepUnderflow { z: at, h: hh }) => {
                    let reason = format!("step underflow (h = {hh:e}) at {at}");
                    return finish(points, EndpointClass::Truncated { arc_length: arc, reason }, arc, steps);
                }
                Err(e) => return Err(e.into()),
            };
            let mut zn = step.z_next;
            let wn0 = nearest_root(qd.phi(zn).sqrt(), w);
            if !continuation_ok(w, wn0) {
                h = 0.5 * step.h_used;
                continue;
            }

            // Corrector: restore the conserved level by moving along the normal.
            let target = 0.0;
            let mut accepted = None;
            for iter in 0..4 {
                let (dphi, wn) = match self.segment(z, w, zn) {
                    Ok(v) => v,
                    Err(_) => break,
                };
                let total = phi_acc + dphi;
                let resid = target - self.kind.level(total);
                if resid.abs() <= 1e-15 * total.norm().max(1.0) || iter == 3 {
                    accepted = Some((zn, wn, total));
                    break;
                }
                let eta = resid / wn.norm();
                if eta.abs() > 0.25 * step.h_used {
                    break;
                }
                zn += self.normal(wn) * eta;
            }
            let Some((zn, wn, total)) = accepted else {
                h = 0.5 * step.h_used;
                if h < crate::cxnum::MIN_STEP {
                    let reason = format!("corrector failed near {z}");
                    return finish(points, EndpointClass::Truncated { arc_length: arc, reason }, arc, steps);
                }
                continue;
            };

            let seg_len = (zn - z).norm();
            let prev = z;
            z = zn;
            w = wn;
            phi_acc = total;
            arc += seg_len;
            steps += 1;
            h = step.h_next;
            points.push(z);

            if z.norm() > r_max {
                return finish(points, EndpointClass::ToInfinity { form: qd.infinity_form() }, arc, steps);
            }

            if z.norm() < prev.norm() {
                decreasing += 1;
            } else {
                decreasing = 0;
            }
            if z.norm() < cfg.eps_origin && decreasing >= cfg.origin_run {
                return finish(points, EndpointClass::ToOrigin { asymptote: z.arg() }, arc, steps);
            }

            for (k, (id, p)) in zeros.iter().enumerate() {
                let d = (z - p).norm();
                let r_zone = zone_radius(*p);
                let wz = &mut watch[k];
                if !wz.armed {
                    if d > r_zone {
                        wz.armed = true;
                    }
                    continue;
                }
                if d >= r_zone {
                    wz.min_dist = f64::INFINITY;
                    continue;
                }
                if d < wz.min_dist {
                    wz.min_dist = d;
                    wz.min_idx = points.len() - 1;
                }
                let hit = if d < cfg.eps_zero {
                    Some(points.len() - 1)
                } else if wz.min_dist < capture && d > 2.0 * wz.min_dist {
                    Some(wz.min_idx)
                } else {
                    None
                };
                if let Some(idx) = hit {
                    let distance = wz.min_dist;
                    points.truncate(idx + 1);
                    points.push(*p);
                    let arc_hit: f64 = points.windows(2).map(|s| (s[1] - s[0]).norm()).sum();
                    return finish(points, EndpointClass::HitsZero { zero: *id, distance }, arc_hit, steps);
                }
            }

            if from_zero.is_none() {
                let d_start = (z - start).norm();
                if !closed_armed {
                    if d_start > 0.5 * start_scale.min(1.0) {
                        closed_armed = true;
                    }
                } else if segment_distance(start, prev, z) < cfg.eps_zero * start.norm().max(1.0) {
                    points.pop();
                    points.push(start);
                    return finish(points, EndpointClass::Closed, arc, steps);
                }
            }
        }
    }
}

/// Distance from `p` to the segment `a → b`.
pub(crate) fn segment_distance(p: CPoint, a: CPoint, b: CPoint) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// Distance from `p` to a polyline.
pub fn polyline_distance(p: CPoint, pts: &[CPoint]) -> f64 {
    if pts.len() == 1 {
        return (p - pts[0]).norm();
    }
    pts.windows(2).map(|w| segment_distance(p, w[0], w[1])).fold(f64::INFINITY, f64::min)
}
