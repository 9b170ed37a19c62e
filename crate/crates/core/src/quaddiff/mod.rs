//! The quadratic differential λ²(z−a)(z−b)/z⁴ dz².
//!
//! Two simple zeros `a`, `b`, a pole of order 4 at the origin and a pole of
//! order 2 at infinity. Horizontal trajectories are the curves on which
//! `Im ∫ λ√((t−a)(t−b))/t² dt` stays constant; vertical ones keep the real part
//! constant.

mod face;
mod graph;
mod oracle;
mod trace;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cxnum::{CPoint, NumError};

pub use face::{sum_rule_residual, validate_face, Corner, FaceInput, FacePiece, FaceReport, FACE_RESIDUAL_LIMIT};
pub use oracle::{path_period, period_check, PeriodCheck};
pub use graph::{critical_graph, critical_graph_of_kind, Approach, CriticalGraph, ShortTrajectory, TracedCritical};
pub use trace::{
    polyline_distance, trace, trace_from_zero, EndpointClass, LaunchData, TraceConfig, TrajectoryKind,
    TrajectoryPath, ZeroId,
};

/// Parameters closer than this to a forbidden value are rejected.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QdError {
    #[error("degenerate parameters: {0}")]
    DegenerateParameters(Degeneracy),
    #[error("cannot launch a trajectory from the pole at the origin")]
    LaunchFromPole,
    #[error("{0} is not a zero of the quadratic differential")]
    NotAZero(CPoint),
    #[error("face boundary does not close: gap {gap:e} after piece {piece}")]
    OpenBoundary { piece: usize, gap: f64 },
    #[error("invalid face description: {0}")]
    InvalidFace(String),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    LambdaZero,
    AZero,
    BZero,
    AEqualsB,
    NonFinite,
}

impl std::fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Degeneracy::LambdaZero => "lambda = 0",
            Degeneracy::AZero => "a = 0",
            Degeneracy::BZero => "b = 0",
            Degeneracy::AEqualsB => "a = b",
            Degeneracy::NonFinite => "non-finite parameter",
        };
        f.write_str(s)
    }
}

/// Asymptotic shape of trajectories near the pole at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfinityForm {
    Radial,
    Circular,
    LogSpiral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    SimpleZero,
    Pole,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Finite(CPoint),
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: Location,
    pub kind: CriticalKind,
    /// +1 for zeros; 4 for the origin and 2 for infinity (pole orders).
    pub order: u32,
}

impl CriticalPoint {
    /// Multiplicity with poles counted negatively.
    pub fn multiplicity(&self) -> i32 {
        match self.kind {
            CriticalKind::SimpleZero => self.order as i32,
            CriticalKind::Pole => -(self.order as i32),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

/// Which gate condition(s) fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateBranch {
    Plus,
    Minus,
    Both,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateValues {
    pub v_plus: CPoint,
    pub v_minus: CPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateDecision {
    pub exists: bool,
    pub branch: GateBranch,
}

/// Default relative threshold of the analytic short-trajectory gate.
pub const DEFAULT_GATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadDiff {
    lambda: CPoint,
    a: CPoint,
    b: CPoint,
}

impl QuadDiff {
    pub fn new(lambda: CPoint, a: CPoint, b: CPoint) -> Result<Self, QdError> {
        use Degeneracy::*;
        let finite = |z: CPoint| z.re.is_finite() && z.im.is_finite();
        if !(finite(lambda) && finite(a) && finite(b)) {
            return Err(QdError::DegenerateParameters(NonFinite));
        }
        if lambda.norm() <= DEGENERACY_TOL {
            return Err(QdError::DegenerateParameters(LambdaZero));
        }
        if a.norm() <= DEGENERACY_TOL {
            return Err(QdError::DegenerateParameters(AZero));
        }
        if b.norm() <= DEGENERACY_TOL {
            return Err(QdError::DegenerateParameters(BZero));
        }
        if (a - b).norm() <= DEGENERACY_TOL * a.norm().max(b.norm()).max(1.0) {
            return Err(QdError::DegenerateParameters(AEqualsB));
        }
        Ok(Self { lambda, a, b })
    }

    /// Builds from λ² using the principal square root for λ.
    pub fn from_lambda_squared(lambda2: CPoint, a: CPoint, b: CPoint) -> Result<Self, QdError> {
        Self::new(lambda2.sqrt(), a, b)
    }

    pub fn lambda(&self) -> CPoint {
        self.lambda
    }

    pub fn a(&self) -> CPoint {
        self.a
    }

    pub fn b(&self) -> CPoint {
        self.b
    }

    pub fn zeros(&self) -> [CPoint; 2] {
        [self.a, self.b]
    }

    /// Same differential with the zeros scaled by `t`.
    pub fn scaled(&self, t: f64) -> Result<Self, QdError> {
        Self::new(self.lambda, self.a * t, self.b * t)
    }

    /// φ(z) = λ²(z−a)(z−b)/z⁴.
    pub fn phi(&self, z: CPoint) -> CPoint {
        let z2 = z * z;
        self.lambda * self.lambda * (z - self.a) * (z - self.b) / (z2 * z2)
    }

    /// φ′ at one of the zeros: λ²(zero − other)/zero⁴.
    pub fn phi_prime_at_zero(&self, zero: CPoint) -> Result<CPoint, QdError> {
        let other = self.other_zero(zero)?;
        Ok(self.lambda * self.lambda * (zero - other) / zero.powi(4))
    }

    /// λ√((z−a)(z−b))/z² with the principal root of the product; callers track the branch.
    pub fn integrand(&self, z: CPoint) -> CPoint {
        self.lambda * ((z - self.a) * (z - self.b)).sqrt() / (z * z)
    }

    pub fn other_zero(&self, zero: CPoint) -> Result<CPoint, QdError> {
        let tol = 1e-12 * (self.a - self.b).norm();
        if (zero - self.a).norm() <= tol {
            Ok(self.b)
        } else if (zero - self.b).norm() <= tol {
            Ok(self.a)
        } else {
            Err(QdError::NotAZero(zero))
        }
    }

    /// Length scale used for offsets and capture radii.
    pub fn scale(&self) -> f64 {
        (self.a - self.b).norm().max(1.0)
    }

    pub fn critical_points(&self) -> [CriticalPoint; 4] {
        [
            CriticalPoint { location: Location::Finite(self.a), kind: CriticalKind::SimpleZero, order: 1 },
            CriticalPoint { location: Location::Finite(self.b), kind: CriticalKind::SimpleZero, order: 1 },
            CriticalPoint {
                location: Location::Finite(CPoint::new(0.0, 0.0)),
                kind: CriticalKind::Pole,
                order: 4,
            },
            CriticalPoint { location: Location::Infinity, kind: CriticalKind::Pole, order: 2 },
        ]
    }

    pub fn infinity_form(&self) -> InfinityForm {
        if self.lambda.im.abs() <= 1e-12 * self.lambda.norm() {
            InfinityForm::Radial
        } else if self.lambda.re.abs() <= 1e-12 * self.lambda.norm() {
            InfinityForm::Circular
        } else {
            InfinityForm::LogSpiral
        }
    }

    /// v± = λ((a+b)/√(ab) ± 2) with the principal √(ab).
    ///
    /// Flipping the sign of √(ab) negates both values, so |Re v±| does not
    /// depend on the root choice.
    pub fn gate_values(&self) -> GateValues {
        let s = (self.a * self.b).sqrt();
        let base = (self.a + self.b) / s;
        GateValues { v_plus: self.lambda * (base + 2.0), v_minus: self.lambda * (base - 2.0) }
    }

    /// Analytic test for a trajectory joining `a` and `b`.
    pub fn short_trajectory_exists(&self, tol: f64) -> GateDecision {
        let g = self.gate_values();
        let scale = 1f64.max(g.v_plus.norm()).max(g.v_minus.norm());
        let plus = g.v_plus.re.abs() < tol * scale;
        let minus = g.v_minus.re.abs() < tol * scale;
        let branch = match (plus, minus) {
            (true, true) => GateBranch::Both,
            (true, false) => GateBranch::Plus,
            (false, true) => GateBranch::Minus,
            (false, false) => GateBranch::None,
        };
        GateDecision { exists: plus || minus, branch }
    }

    /// Signed distance of the gate from firing: min |Re v±| / max(1, |v±|).
    pub fn gate_margin(&self) -> f64 {
        let g = self.gate_values();
        let scale = 1f64.max(g.v_plus.norm()).max(g.v_minus.norm());
        g.v_plus.re.abs().min(g.v_minus.re.abs()) / scale
    }

    /// Closed-form value of λ∫ (√((z−a)(z−b)))₊/z² dz over a path from `a` to `b`.
    ///
    /// `Plus` gives λ(iπ/2)((a+b)/√(ab) + 2) and `Minus` gives
    /// λ(iπ/2)((a+b)/√(ab) − 2), principal √(ab), leading sign +. In contour
    /// terms (branch ∼ z at infinity, cut along the path): `Plus` is half the
    /// counterclockwise integral around a path whose complement carries
    /// √((z−a)(z−b)) = +√(ab) at the origin, `Minus` half the clockwise
    /// integral around a path whose complement carries −√(ab).
    pub fn period(&self, sign: Branch) -> CPoint {
        let s = (self.a * self.b).sqrt();
        let base = (self.a + self.b) / s;
        let k = match sign {
            Branch::Plus => base + 2.0,
            Branch::Minus => base - 2.0,
        };
        self.lambda * CPoint::new(0.0, PI / 2.0) * k
    }

    /// The three launch angles of critical trajectories at a zero, in [0, 2π).
    ///
    /// Horizontal: 3θ + arg φ′(zero) ≡ 0 (mod 2π); vertical: ≡ π.
    pub fn launch_directions_for(&self, zero: CPoint, kind: TrajectoryKind) -> Result<[f64; 3], QdError> {
        let d = self.phi_prime_at_zero(zero)?;
        let offset = match kind {
            TrajectoryKind::Horizontal => 0.0,
            TrajectoryKind::Vertical => PI,
        };
        let base = (offset - d.arg()) / 3.0;
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            *o = (base + 2.0 * PI * k as f64 / 3.0).rem_euclid(2.0 * PI);
        }
        out.sort_by(|x, y| x.total_cmp(y));
        Ok(out)
    }

    pub fn launch_directions(&self, zero: CPoint) -> Result<[f64; 3], QdError> {
        self.launch_directions_for(zero, TrajectoryKind::Horizontal)
    }
}
