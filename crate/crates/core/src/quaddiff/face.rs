//! Sum-rule check for ϖ-polygons bounded by traced trajectories.
//!
//! For a domain Ω whose boundary consists of trajectory arcs, with boundary
//! singular points z_j of multiplicity n_j and interior angles θ_j:
//!
//! Σ (1 − θ_j (n_j + 2)/2π) = 2 + Σ n_i,
//!
//! the right-hand sum running over singular points inside Ω. The face is the
//! region to the left of the supplied boundary; when that region is unbounded it
//! contains the pole at infinity (multiplicity −2).

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::graph::CriticalGraph;
use super::trace::EndpointClass;
use super::{QdError, QuadDiff};
use crate::cxnum::CPoint;

/// Faces whose residual stays below this are accepted.
pub const FACE_RESIDUAL_LIMIT: f64 = 0.05;

/// Junctions further apart than this leave the boundary open.
const CLOSURE_TOL: f64 = 1e-6;

/// Reference to a boundary arc taken from a critical graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacePiece {
    /// Entry of `CriticalGraph::trajectories`, traversed forward or reversed.
    Critical { index: usize, reversed: bool },
    /// Entry of `CriticalGraph::short_trajectories` (oriented a → b, or zero to itself for a loop).
    Short { index: usize, reversed: bool },
}

/// Cyclic list of arcs; the end of each piece must meet the start of the next.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceInput {
    pub pieces: Vec<FacePiece>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub point: CPoint,
    /// 0 at regular points, +1 at zeros, −4 at the origin.
    pub multiplicity: i32,
    /// Interior angle, radians.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceReport {
    pub boundary: Vec<FacePiece>,
    /// Corner j sits at the end of piece j.
    pub corners: Vec<Corner>,
    pub interior_multiplicity_sum: i32,
    /// Whether the face is the bounded side of its boundary.
    pub bounded: bool,
    pub sum_rule_residual: f64,
    pub valid: bool,
}

impl FaceReport {
    pub fn corner_angles(&self) -> Vec<f64> {
        self.corners.iter().map(|c| c.angle).collect()
    }

    pub fn corner_multiplicities(&self) -> Vec<i32> {
        self.corners.iter().map(|c| c.multiplicity).collect()
    }
}

/// |Σ(1 − θ_j(n_j+2)/2π) − 2 − Σn_i| for corners given as (θ_j, n_j).
pub fn sum_rule_residual(corners: &[(f64, i32)], interior_sum: i32) -> f64 {
    let lhs: f64 = corners.iter().map(|&(theta, n)| 1.0 - theta * f64::from(n + 2) / TAU).sum();
    (lhs - 2.0 - f64::from(interior_sum)).abs()
}

pub fn validate_face(graph: &CriticalGraph, face: &FaceInput) -> Result<FaceReport, QdError> {
    if face.pieces.is_empty() {
        return Err(QdError::InvalidFace("a face needs at least one boundary piece".into()));
    }
    let qd = &graph.qd;
    let arcs: Vec<Vec<CPoint>> = face.pieces.iter().map(|p| piece_points(graph, p)).collect::<Result<_, _>>()?;

    let m = arcs.len();
    for j in 0..m {
        let end = *arcs[j].last().expect("pieces are non-empty");
        let next = arcs[(j + 1) % m][0];
        let gap = (end - next).norm();
        if gap > CLOSURE_TOL {
            return Err(QdError::OpenBoundary { piece: j, gap });
        }
    }

    // Closed polyline: concatenation of the arcs.
    let mut ring: Vec<CPoint> = Vec::new();
    for arc in &arcs {
        for &p in arc {
            if ring.last().is_none_or(|&q: &CPoint| q != p) {
                ring.push(p);
            }
        }
    }
    if ring.len() > 1 && ring[0] == *ring.last().unwrap() {
        ring.pop();
    }
    if ring.len() < 2 {
        return Err(QdError::InvalidFace("boundary degenerates to a point".into()));
    }

    let bounded = signed_area(&ring) > 0.0;

    // Turning inside each arc and at each junction.
    let mut smooth = 0.0;
    for arc in &arcs {
        for w in arc.windows(3) {
            let d0 = w[1] - w[0];
            let d1 = w[2] - w[1];
            if d0.norm() > 0.0 && d1.norm() > 0.0 {
                smooth += (d1 / d0).arg();
            }
        }
    }
    // At a zero the exact tangents are the launch rays; snap measured ones to them.
    let snap_ray = |at: CPoint, ray: CPoint| -> CPoint {
        let Ok(angles) = qd.launch_directions_for(at, graph.kind) else { return ray };
        angles
            .iter()
            .map(|&t| CPoint::from_polar(1.0, t))
            .find(|r| (r * ray.conj()).arg().abs() < 0.1)
            .unwrap_or(ray)
    };
    let mut ext: Vec<f64> = (0..m)
        .map(|j| {
            let at = *arcs[j].last().unwrap();
            let d_in = -snap_ray(at, -last_direction(&arcs[j]));
            let d_out = snap_ray(at, first_direction(&arcs[(j + 1) % m]));
            (d_out / d_in).arg()
        })
        .collect();

    // Cusps (turning ±π) are resolved by the total turning ±2π of a simple closed curve.
    let target = if bounded { TAU } else { -TAU };
    let cusp: Vec<usize> = (0..m).filter(|&j| PI - ext[j].abs() < 0.3).collect();
    if !cusp.is_empty() {
        let fixed: f64 = smooth + (0..m).filter(|j| !cusp.contains(j)).map(|j| ext[j]).sum::<f64>();
        let mut best = (f64::INFINITY, 0usize);
        for mask in 0..(1usize << cusp.len()) {
            let s: f64 = cusp.iter().enumerate().map(|(k, _)| if mask >> k & 1 == 1 { PI } else { -PI }).sum();
            let err = (fixed + s - target).abs();
            if err < best.0 {
                best = (err, mask);
            }
        }
        for (k, &j) in cusp.iter().enumerate() {
            ext[j] = if best.1 >> k & 1 == 1 { PI } else { -PI };
        }
    }

    let scale = qd.scale();
    let corners: Vec<Corner> = (0..m)
        .map(|j| {
            let point = *arcs[j].last().unwrap();
            let (point, multiplicity) = classify(qd, point, scale);
            Corner { point, multiplicity, angle: PI - ext[j] }
        })
        .collect();

    let mut interior = if bounded { 0 } else { -2 };
    for (p, n) in [(qd.a(), 1), (qd.b(), 1), (CPoint::new(0.0, 0.0), -4)] {
        if corners.iter().any(|c| (c.point - p).norm() <= 1e-9 * scale) {
            continue;
        }
        let inside_ring = winding_number(&ring, p) != 0;
        if inside_ring == bounded {
            interior += n;
        }
    }

    let pairs: Vec<(f64, i32)> = corners.iter().map(|c| (c.angle, c.multiplicity)).collect();
    let residual = sum_rule_residual(&pairs, interior);
    Ok(FaceReport {
        boundary: face.pieces.clone(),
        corners,
        interior_multiplicity_sum: interior,
        bounded,
        sum_rule_residual: residual,
        valid: residual < FACE_RESIDUAL_LIMIT,
    })
}

fn piece_points(graph: &CriticalGraph, piece: &FacePiece) -> Result<Vec<CPoint>, QdError> {
    let (traj, reversed) = match *piece {
        FacePiece::Critical { index, reversed } => (
            graph.trajectories.get(index).map(|t| &t.trajectory),
            reversed,
        ),
        FacePiece::Short { index, reversed } => (
            graph.short_trajectories.get(index).map(|s| &s.trajectory),
            reversed,
        ),
    };
    let traj = traj.ok_or_else(|| QdError::InvalidFace(format!("no trajectory for {piece:?}")))?;
    let mut pts = traj.points().to_vec();
    match traj.endpoint {
        EndpointClass::ToOrigin { .. } => pts.push(CPoint::new(0.0, 0.0)),
        EndpointClass::HitsZero { .. } | EndpointClass::Closed => {}
        _ => {
            return Err(QdError::InvalidFace(format!(
                "piece {piece:?} ends with class {}, which cannot bound a face",
                traj.endpoint.label()
            )))
        }
    }
    if reversed {
        pts.reverse();
    }
    Ok(pts)
}

fn classify(qd: &QuadDiff, p: CPoint, scale: f64) -> (CPoint, i32) {
    let tol = 1e-9 * scale;
    if p.norm() <= tol {
        (CPoint::new(0.0, 0.0), -4)
    } else if (p - qd.a()).norm() <= tol {
        (qd.a(), 1)
    } else if (p - qd.b()).norm() <= tol {
        (qd.b(), 1)
    } else {
        (p, 0)
    }
}

fn first_direction(arc: &[CPoint]) -> CPoint {
    let d = arc.windows(2).map(|w| w[1] - w[0]).find(|d| d.norm() > 0.0).unwrap_or(CPoint::new(1.0, 0.0));
    d / d.norm()
}

fn last_direction(arc: &[CPoint]) -> CPoint {
    let d = arc.windows(2).rev().map(|w| w[1] - w[0]).find(|d| d.norm() > 0.0).unwrap_or(CPoint::new(1.0, 0.0));
    d / d.norm()
}

fn signed_area(ring: &[CPoint]) -> f64 {
    let n = ring.len();
    (0..n).map(|k| {
        let p = ring[k];
        let q = ring[(k + 1) % n];
        p.re * q.im - q.re * p.im
    }).sum::<f64>() / 2.0
}

fn winding_number(ring: &[CPoint], p: CPoint) -> i64 {
    let n = ring.len();
    let total: f64 = (0..n).map(|k| ((ring[(k + 1) % n] - p) / (ring[k] - p)).arg()).sum();
    (total / TAU).round() as i64
}
