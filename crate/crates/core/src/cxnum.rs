//! Complex-arithmetic building blocks: branch-tracked square roots, Gauss–Legendre
//! quadrature along polylines and an embedded Dormand–Prince stepper for unit
//! direction fields.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point of the complex plane.
pub type CPoint = Complex64;

/// Closing tolerance for closed paths.
pub const CLOSE_TOL: f64 = 1e-12;

/// Smallest step the adaptive stepper will attempt.
pub const MIN_STEP: f64 = 1e-14;

/// Default Gauss–Legendre order per polyline segment.
pub const DEFAULT_NODES: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("branch tracker used before a seed value was set")]
    TrackerUninitialized,
    #[error("square root requested at a branch point")]
    BranchPoint,
    #[error("integrand is not finite at {0}")]
    NonFiniteSample(CPoint),
    #[error("step size fell below {MIN_STEP:e} at z = {z}")]
    StepUnderflow { z: CPoint, h: f64 },
    #[error("invalid path: {0}")]
    InvalidPath(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

pub fn is_finite(z: CPoint) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Oriented polyline, optionally closed (first point repeated at the end).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    points: Vec<CPoint>,
    closed: bool,
}

impl Path {
    /// Consecutive duplicates are removed before validation.
    pub fn new(points: Vec<CPoint>, closed: bool) -> Result<Self, NumError> {
        let mut pts: Vec<CPoint> = Vec::with_capacity(points.len());
        for p in points {
            if !is_finite(p) {
                return Err(NumError::InvalidPath("non-finite vertex"));
            }
            if pts.last().is_some_and(|q| *q == p) {
                continue;
            }
            pts.push(p);
        }
        if pts.len() < 2 {
            return Err(NumError::InvalidPath("fewer than two distinct points"));
        }
        if closed && (pts[0] - pts[pts.len() - 1]).norm() > CLOSE_TOL {
            return Err(NumError::InvalidPath("closed path does not return to its start"));
        }
        Ok(Path { points: pts, closed })
    }

    /// Closed path through `points`, appending the first point at the end.
    pub fn closed_loop(mut points: Vec<CPoint>) -> Result<Self, NumError> {
        if let Some(&first) = points.first() {
            points.push(first);
        }
        Self::new(points, true)
    }

    pub fn segment(a: CPoint, b: CPoint) -> Result<Self, NumError> {
        Self::new(vec![a, b], false)
    }

    /// Counterclockwise circle sampled with `n` chords.
    pub fn circle(center: CPoint, radius: f64, n: usize) -> Result<Self, NumError> {
        let pts = (0..n)
            .map(|k| center + CPoint::from_polar(radius, 2.0 * PI * k as f64 / n as f64))
            .collect();
        Self::closed_loop(pts)
    }

    pub fn points(&self) -> &[CPoint] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn reversed(&self) -> Path {
        let mut points = self.points.clone();
        points.reverse();
        Path { points, closed: self.closed }
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    pub fn into_points(self) -> Vec<CPoint> {
        self.points
    }
}

/// Continuation of a square root along a sequence of nearby samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BranchTracker {
    current: Option<CPoint>,
}

impl BranchTracker {
    pub fn new() -> Self {
        Self { current: None }
    }

    pub fn seeded(value: CPoint) -> Self {
        Self { current: Some(value) }
    }

    pub fn current(&self) -> Option<CPoint> {
        self.current
    }

    pub fn seed(&mut self, value: CPoint) {
        self.current = Some(value);
    }

    /// Root of `f_value` nearest to the last committed value, which it replaces.
    pub fn sqrt_continuous(&mut self, f_value: CPoint) -> Result<CPoint, NumError> {
        let w = self.peek(f_value)?;
        self.current = Some(w);
        Ok(w)
    }

    /// Same selection as [`sqrt_continuous`](Self::sqrt_continuous) without committing.
    pub fn peek(&self, f_value: CPoint) -> Result<CPoint, NumError> {
        let prev = self.current.ok_or(NumError::TrackerUninitialized)?;
        if f_value == CPoint::new(0.0, 0.0) {
            return Err(NumError::BranchPoint);
        }
        Ok(nearest_root(f_value.sqrt(), prev))
    }
}

/// `w` or `-w`, whichever is closer to `reference`.
pub fn nearest_root(w: CPoint, reference: CPoint) -> CPoint {
    if (w - reference).norm_sqr() <= (w + reference).norm_sqr() {
        w
    } else {
        -w
    }
}

/// True when the step `prev → next` is small enough for nearest-value continuation.
pub fn continuation_ok(prev: CPoint, next: CPoint) -> bool {
    (next - prev).norm() < 0.5 * (next + prev).norm()
}

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes in increasing order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫ f(z) dz over the straight segment `a → b`; nodes are visited from `a` to `b`.
    pub fn segment<F>(&self, f: &mut F, a: CPoint, b: CPoint) -> Result<CPoint, NumError>
    where
        F: FnMut(CPoint) -> CPoint,
    {
        let half = (b - a) * 0.5;
        let mid = (a + b) * 0.5;
        let mut acc = CPoint::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let z = mid + half * *x;
            let v = f(z);
            if !is_finite(v) {
                return Err(NumError::NonFiniteSample(z));
            }
            acc += v * *w;
        }
        Ok(acc * half)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre approximation of ∫ f(z) dz along `path`.
///
/// Nodes are fed to `f` in path order, so a closure that owns a
/// [`BranchTracker`] keeps its branch continuous across segments.
pub fn integrate_path<F>(mut f: F, path: &Path, nodes_per_segment: usize) -> Result<CPoint, NumError>
where
    F: FnMut(CPoint) -> CPoint,
{
    if nodes_per_segment < 2 {
        return Err(NumError::InvalidArgument("nodes_per_segment must be at least 2"));
    }
    let rule = GaussLegendre::new(nodes_per_segment);
    let mut total = CPoint::new(0.0, 0.0);
    for w in path.points().windows(2) {
        total += rule.segment(&mut f, w[0], w[1])?;
    }
    Ok(total)
}

/// Outcome of one accepted adaptive step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub z_next: CPoint,
    /// Step length actually taken.
    pub h_used: f64,
    /// Suggested length for the following step.
    pub h_next: f64,
    pub error: f64,
}

// Dormand–Prince 5(4) tableau; the fields are autonomous so the nodes c_i are not needed.
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One error-controlled Dormand–Prince step of dz/ds = field(z).
///
/// Rejected attempts shrink `h` by the usual safety rule; non-finite stage
/// values count as rejections. Fails with `StepUnderflow` once `h < MIN_STEP`.
pub fn ode_step_adaptive<F>(mut field: F, z: CPoint, h: f64, tol: f64) -> Result<Step, NumError>
where
    F: FnMut(CPoint) -> CPoint,
{
    if !(h > 0.0) || !(tol > 0.0) {
        return Err(NumError::InvalidArgument("step and tolerance must be positive"));
    }
    let scale = tol * z.norm().max(1.0);
    let mut h = h;
    loop {
        if h < MIN_STEP {
            return Err(NumError::StepUnderflow { z, h });
        }
        let mut k = [CPoint::new(0.0, 0.0); 7];
        let mut finite = true;
        for s in 0..7 {
            let mut arg = z;
            for (j, kj) in k.iter().enumerate().take(s) {
                arg += *kj * (A[s][j] * h);
            }
            k[s] = field(arg);
            if !is_finite(k[s]) {
                finite = false;
                break;
            }
        }
        if !finite {
            h *= 0.2;
            continue;
        }
        let mut d5 = CPoint::new(0.0, 0.0);
        let mut d4 = CPoint::new(0.0, 0.0);
        for s in 0..7 {
            d5 += k[s] * B5[s];
            d4 += k[s] * B4[s];
        }
        let err = ((d5 - d4) * h).norm();
        let ratio = if err == 0.0 { f64::INFINITY } else { scale / err };
        let factor = (0.9 * ratio.powf(0.2)).clamp(0.2, 5.0);
        if err <= scale {
            return Ok(Step { z_next: z + d5 * h, h_used: h, h_next: h * factor, error: err });
        }
        h *= factor;
    }
}
