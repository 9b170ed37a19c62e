//! Critical graph: the six critical trajectories and the short ones among them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trace::{trace_from_zero, EndpointClass, TraceConfig, TrajectoryKind, TrajectoryPath, ZeroId};
use super::{Branch, GateDecision, GateValues, QdError, QuadDiff, DEFAULT_GATE_TOL};
use crate::cxnum::{BranchTracker, CPoint, GaussLegendre, NumError, Path};

/// One of the three trajectories launched from a zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracedCritical {
    pub zero: ZeroId,
    /// Position in the sorted launch angles of that zero (0, 1, 2).
    pub index: usize,
    pub trajectory: TrajectoryPath,
}

/// A trajectory whose two ends are finite critical points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortTrajectory {
    /// Oriented from `a` to `b`, or from the zero back to itself for a loop.
    pub trajectory: TrajectoryPath,
    /// Indices into `CriticalGraph::trajectories` of the traced halves it was built from.
    pub sources: Vec<usize>,
    /// λ∫ √((t−a)(t−b))/t² dt along the polyline, branch continued from the launch.
    pub integral: CPoint,
    /// Closed-form period whose modulus matches `integral`; `None` for loops.
    pub branch: Option<Branch>,
    /// Set when both ends are the same zero.
    pub loop_at: Option<ZeroId>,
}

impl ShortTrajectory {
    pub fn is_loop(&self) -> bool {
        self.loop_at.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalGraph {
    pub qd: QuadDiff,
    pub kind: TrajectoryKind,
    pub trajectories: Vec<TracedCritical>,
    pub short_trajectories: Vec<ShortTrajectory>,
    pub gate_values: GateValues,
    pub gate: GateDecision,
    pub warnings: Vec<String>,
}

impl CriticalGraph {
    /// Indices of trajectories with the given endpoint label.
    pub fn with_endpoint(&self, label: &str) -> Vec<usize> {
        (0..self.trajectories.len()).filter(|&i| self.trajectories[i].trajectory.endpoint.label() == label).collect()
    }
}

/// Traces the six horizontal critical trajectories and extracts short trajectories.
pub fn critical_graph(qd: &QuadDiff, budget: f64, cfg: &TraceConfig) -> Result<CriticalGraph, QdError> {
    critical_graph_of_kind(qd, TrajectoryKind::Horizontal, budget, cfg)
}

/// Same as [`critical_graph`] for either trajectory kind.
pub fn critical_graph_of_kind(
    qd: &QuadDiff,
    kind: TrajectoryKind,
    budget: f64,
    cfg: &TraceConfig,
) -> Result<CriticalGraph, QdError> {
    let mut jobs = Vec::with_capacity(6);
    for zero in [ZeroId::A, ZeroId::B] {
        let angles = qd.launch_directions_for(zero.locate(qd), kind)?;
        for (index, angle) in angles.into_iter().enumerate() {
            jobs.push((zero, index, angle));
        }
    }
    let mut trajectories: Vec<TracedCritical> = jobs
        .par_iter()
        .map(|&(zero, index, angle)| {
            trace_from_zero(qd, zero, angle, kind, budget, cfg).map(|trajectory| TracedCritical { zero, index, trajectory })
        })
        .collect::<Result<_, _>>()?;

    // Re-trace candidate connections with a tighter tolerance.
    let fine = cfg.tightened(10.0);
    let refined: Vec<Option<TrajectoryPath>> = trajectories
        .par_iter()
        .map(|t| {
            if hit_zero(t).is_some() {
                trace_from_zero(qd, t.zero, t.trajectory.launch.angle, kind, budget, &fine).ok()
            } else {
                None
            }
        })
        .collect();
    for (t, r) in trajectories.iter_mut().zip(refined) {
        if let Some(r) = r {
            t.trajectory = r;
        }
    }

    let mut warnings = Vec::new();
    for t in &trajectories {
        if let EndpointClass::Truncated { arc_length, reason } = &t.trajectory.endpoint {
            warnings.push(format!(
                "trajectory from {:?} at angle {:.6} truncated after arc length {arc_length:.3e}: {reason}",
                t.zero, t.trajectory.launch.angle
            ));
        }
    }

    let short_trajectories = extract_short(qd, &trajectories)?;
    Ok(CriticalGraph {
        qd: *qd,
        kind,
        trajectories,
        short_trajectories,
        gate_values: qd.gate_values(),
        gate: qd.short_trajectory_exists(DEFAULT_GATE_TOL),
        warnings,
    })
}

fn hit_zero(t: &TracedCritical) -> Option<ZeroId> {
    match t.trajectory.endpoint {
        EndpointClass::HitsZero { zero, .. } => Some(zero),
        _ => None,
    }
}

/// Closest approach of the trajectories launched from `a` to the zero `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Approach {
    /// Index into `CriticalGraph::trajectories`.
    pub source: usize,
    pub point: CPoint,
    pub distance: f64,
    /// Conserved component of λ∫√((t−a)(t−b))/t² dt from `a` along the
    /// trajectory to `point`, then straight to `b`. It vanishes exactly when
    /// the trajectory runs into `b` and changes sign as it crosses over.
    pub level: f64,
}

impl CriticalGraph {
    pub fn closest_approach(&self) -> Result<Approach, QdError> {
        let b = self.qd.b();
        let nearest = |i: usize| self.trajectories[i].trajectory.points().iter().map(|p| (p - b).norm()).fold(f64::INFINITY, f64::min);
        let source = (0..self.trajectories.len())
            .filter(|&i| self.trajectories[i].zero == ZeroId::A)
            .min_by(|&i, &j| nearest(i).total_cmp(&nearest(j)))
            .expect("three trajectories launch from a");
        self.approach_from(source)
    }

    /// Same as [`closest_approach`](Self::closest_approach) for one given trajectory from `a`.
    pub fn approach_from(&self, source: usize) -> Result<Approach, QdError> {
        let qd = &self.qd;
        let b = qd.b();
        let t = self.trajectories.get(source).ok_or(QdError::Numeric(NumError::InvalidArgument("trajectory index out of range")))?;
        if t.zero != ZeroId::A {
            return Err(QdError::Numeric(NumError::InvalidArgument("approach is measured from a trajectory launched at a")));
        }
        let all = t.trajectory.points();
        let (k, distance) = all
            .iter()
            .map(|p| (p - b).norm())
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (k, d)| if d < acc.1 { (k, d) } else { acc });
        let pts = &all[..=k];
        let mut route = pts.to_vec();
        if distance > 0.0 {
            let n = 64;
            let p = pts[k];
            route.extend((1..=n).map(|j| p + (b - p) * (j as f64 / n as f64)));
        }
        let rule = GaussLegendre::new(16);
        let (z0, z1) = (route[0], route[1]);
        let mid = 0.5 * (z0 + z1);
        let mut root = ((mid - qd.a()) * (mid - b)).sqrt();
        // Orient the branch so that w·dz points along the trajectory's kind.
        let rho = match self.kind {
            TrajectoryKind::Horizontal => CPoint::new(1.0, 0.0),
            TrajectoryKind::Vertical => CPoint::new(0.0, 1.0),
        };
        if (qd.lambda() * root / (mid * mid) * (z1 - z0) * rho.conj()).re < 0.0 {
            root = -root;
        }
        let mut tracker = BranchTracker::seeded(root);
        let mut acc = CPoint::new(0.0, 0.0);
        for w in route.windows(2) {
            let mut f = |z: CPoint| {
                tracker.sqrt_continuous((z - qd.a()) * (z - b)).unwrap_or(CPoint::new(f64::NAN, f64::NAN)) / (z * z)
            };
            acc += rule.segment(&mut f, w[0], w[1])?;
        }
        let level = self.kind.level(qd.lambda() * acc);
        Ok(Approach { source, point: pts[k], distance, level })
    }
}

/// Direction from the end zero to the trajectory, read at a small distance from the zero.
fn arrival_angle(pts: &[CPoint], radius: f64) -> f64 {
    let end = *pts.last().unwrap();
    let p = pts.iter().rev().find(|p| (*p - end).norm() >= radius).unwrap_or(&pts[0]);
    (p - end).arg()
}

fn angle_gap(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Groups traced halves describing the same curve: a path arriving at a zero
/// along one of its launch rays is the reverse of the trajectory launched there.
fn extract_short(qd: &QuadDiff, trajectories: &[TracedCritical]) -> Result<Vec<ShortTrajectory>, QdError> {
    let radius = 0.02 * (qd.a() - qd.b()).norm().min(qd.a().norm()).min(qd.b().norm());
    let hits: Vec<usize> = (0..trajectories.len()).filter(|&i| hit_zero(&trajectories[i]).is_some()).collect();
    let mut used = vec![false; trajectories.len()];
    let mut out = Vec::new();
    for &i in &hits {
        if used[i] {
            continue;
        }
        used[i] = true;
        let t = &trajectories[i];
        let target = hit_zero(t).expect("filtered");
        let arrive = arrival_angle(t.trajectory.points(), radius);
        let partner = hits
            .iter()
            .copied()
            .filter(|&j| !used[j] && trajectories[j].zero == target && hit_zero(&trajectories[j]) == Some(t.zero))
            .min_by(|&x, &y| {
                angle_gap(trajectories[x].trajectory.launch.angle, arrive)
                    .total_cmp(&angle_gap(trajectories[y].trajectory.launch.angle, arrive))
            })
            .filter(|&j| angle_gap(trajectories[j].trajectory.launch.angle, arrive) < 0.5);
        let p = t.trajectory.points();
        let (mut pts, sources) = match partner {
            Some(j) => {
                used[j] = true;
                (splice(p, trajectories[j].trajectory.points()), vec![i, j])
            }
            None => (p.to_vec(), vec![i]),
        };
        let loop_at = (target == t.zero).then_some(t.zero);
        if loop_at.is_none() && t.zero == ZeroId::B {
            pts.reverse();
        }
        out.push(build_short(qd, &t.trajectory, pts, sources, loop_at)?);
    }
    Ok(out)
}

fn build_short(
    qd: &QuadDiff,
    base: &TrajectoryPath,
    pts: Vec<CPoint>,
    sources: Vec<usize>,
    loop_at: Option<ZeroId>,
) -> Result<ShortTrajectory, QdError> {
    let path = Path::new(pts, false)?;
    let arc_length = path.length();
    let integral = short_integral(qd, path.points())?;
    let branch = loop_at.is_none().then(|| {
        let dp = (integral.norm() - qd.period(Branch::Plus).norm()).abs();
        let dm = (integral.norm() - qd.period(Branch::Minus).norm()).abs();
        if dp <= dm {
            Branch::Plus
        } else {
            Branch::Minus
        }
    });
    let (start, end) = match loop_at {
        Some(z) => (z, z),
        None => (ZeroId::A, ZeroId::B),
    };
    let endpoint = EndpointClass::HitsZero { zero: end, distance: 0.0 };
    let mut launch = base.launch;
    if launch.zero != Some(start) || (path.points()[1] - launch.point).norm() > 0.0 {
        launch.zero = Some(start);
        launch.point = path.points()[1];
        launch.angle = (path.points()[1] - path.points()[0]).arg().rem_euclid(std::f64::consts::TAU);
    }
    let trajectory = TrajectoryPath { path, kind: base.kind, launch, endpoint, arc_length, steps: base.steps };
    Ok(ShortTrajectory { trajectory, sources, integral, branch, loop_at })
}

/// λ∫√((t−a)(t−b))/t² dt along a polyline from zero to zero.
fn short_integral(qd: &QuadDiff, pts: &[CPoint]) -> Result<CPoint, QdError> {
    let rule = GaussLegendre::new(16);
    let mid = 0.5 * (pts[0] + pts[1]);
    let mut tracker = BranchTracker::seeded(((mid - qd.a()) * (mid - qd.b())).sqrt());
    let mut acc = CPoint::new(0.0, 0.0);
    for w in pts.windows(2) {
        let mut f = |z: CPoint| {
            let r = tracker.sqrt_continuous((z - qd.a()) * (z - qd.b())).unwrap_or(CPoint::new(f64::NAN, f64::NAN));
            r / (z * z)
        };
        acc += rule.segment(&mut f, w[0], w[1])?;
    }
    Ok(qd.lambda() * acc)
}

fn arc_midpoint_index(pts: &[CPoint]) -> usize {
    let total: f64 = pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let mut acc = 0.0;
    for (k, w) in pts.windows(2).enumerate() {
        acc += (w[1] - w[0]).norm();
        if acc >= 0.5 * total {
            return k + 1;
        }
    }
    pts.len() - 1
}

/// First half of `p` (from a) joined to the reversed part of `q` (from b) beyond the junction.
fn splice(p: &[CPoint], q: &[CPoint]) -> Vec<CPoint> {
    let i = arc_midpoint_index(p);
    let join = p[i];
    let j = (0..q.len())
        .min_by(|&x, &y| (q[x] - join).norm().total_cmp(&(q[y] - join).norm()))
        .unwrap_or(0);
    let mut out: Vec<CPoint> = p[..=i].to_vec();
    out.extend(q[..j].iter().rev());
    out
}
