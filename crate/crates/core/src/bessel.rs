//! Generalized Bessel polynomials
//!
//! B_n^{(α)}(z) = Σ_{k=0}^{n} C(n,k) (n+k+α−2)^{(k)} z^k
//!
//! with the falling factorial x^{(k)} = x(x−1)…(x−k+1), and the varying-parameter
//! family α = A·n. The zeros of B_n^{(An)} shrink like 1/n; rescaled by n they
//! accumulate on a short trajectory of −D_A(z)/z⁴ dz², D_A(z) = (A+2)²z² + 2Az + 1,
//! and their Cauchy transform approaches a solution of
//! z²C² + (Az+1)C − A − 1 = 0.
//!
//! Zeros are computed from the electrostatic characterisation of the ODE
//! z²B″ + (αz+1)B′ − n(n+α−1)B = 0: at every zero z_k,
//! 2z_k² Σ_{j≠k} 1/(z_k − z_j) + αz_k + 1 = 0. Newton's method on this system is
//! continued in α from a very large value, where the zeros are a scaled copy of
//! the Hermite zeros, down to the requested parameter.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cxnum::CPoint;
use crate::motherbody::{AlgebraicEquation, MbError};
use crate::quaddiff::{critical_graph, polyline_distance, QdError, QuadDiff, TraceConfig};

/// Parameters within this distance of a forbidden value are rejected.
pub const PARAMETER_TOL: f64 = 1e-9;

/// A zero is certified when |B(z)| ≤ CERT_TOL · Σ|c_k||z|^k.
pub const CERT_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BesselError {
    #[error("A = {0} is excluded (A must avoid -1 and -2)")]
    DegenerateParameter(CPoint),
    #[error("the leading coefficient vanishes for n = {n}, alpha = {alpha}")]
    LeadingCoefficientZero { n: usize, alpha: CPoint },
    #[error("degree must be at least {0}")]
    DegreeTooSmall(usize),
    #[error("evaluation overflow at z = {0}")]
    Overflow(CPoint),
    #[error("zero finder did not converge (worst residual {worst:e})")]
    NoConvergence { worst: f64 },
    #[error("evaluation point lies on the support")]
    SupportCollision,
    #[error("evaluation at the origin")]
    OriginEvaluation,
    #[error("the quadratic differential of this family has no short trajectory")]
    NoShortTrajectory,
    #[error(transparent)]
    QuadDiff(#[from] QdError),
    #[error(transparent)]
    MotherBody(#[from] MbError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesselPolynomial {
    n: usize,
    alpha: CPoint,
    coeffs: Vec<CPoint>,
    /// Coefficients divided by exp(log_scale), finite even when `coeffs` overflow.
    normalized: Vec<CPoint>,
    log_scale: f64,
}

/// Values of B, B′, B″ at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: CPoint,
    pub derivative: CPoint,
    pub second: CPoint,
    /// Largest coefficient modulus, used to scale the Horner recursion.
    pub scale: f64,
    /// Σ|c_k||z|^k, the natural size of rounding errors in `value`.
    pub magnitude: f64,
}

impl BesselPolynomial {
    /// Coefficients by the product rule c_k = c_{k−1}·(n−k+1)/k·(n+k+α−2).
    pub fn new(n: usize, alpha: CPoint) -> Self {
        const RESCALE: f64 = 1e200;
        let mut normalized = Vec::with_capacity(n + 1);
        normalized.push(CPoint::new(1.0, 0.0));
        let mut log_scale = 0.0;
        for k in 1..=n {
            let kf = k as f64;
            let next = normalized[k - 1] * ((n as f64 - kf + 1.0) / kf) * (n as f64 + kf + alpha - 2.0);
            normalized.push(next);
            if next.norm() > RESCALE {
                normalized.iter_mut().for_each(|c| *c /= RESCALE);
                log_scale += RESCALE.ln();
            }
        }
        let factor = log_scale.exp();
        let coeffs = normalized.iter().map(|c| c * factor).collect();
        Self { n, alpha, coeffs, normalized, log_scale }
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> CPoint {
        self.alpha
    }

    /// Ascending powers.
    pub fn coeffs(&self) -> &[CPoint] {
        &self.coeffs
    }

    pub fn leading(&self) -> CPoint {
        self.coeffs[self.n]
    }

    /// Coefficients divided by exp(`log_scale`).
    pub fn normalized_coeffs(&self) -> &[CPoint] {
        &self.normalized
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// |B(z)| / Σ|c_k||z|^k, computed without forming the coefficients.
    pub fn relative_value(&self, z: CPoint) -> f64 {
        let r = z.norm();
        let (mut p, mut m) = (CPoint::new(0.0, 0.0), 0.0);
        for c in self.normalized.iter().rev() {
            p = p * z + c;
            m = m * r + c.norm();
        }
        p.norm() / m
    }

    /// Σ of the zeros, −c_{n−1}/c_n.
    pub fn zero_sum(&self) -> CPoint {
        -self.normalized[self.n - 1] / self.normalized[self.n]
    }

    /// log of (−1)^n c_0/c_n as a complex logarithm (modulo 2πi).
    pub fn log_zero_product(&self) -> CPoint {
        let sign = if self.n.is_multiple_of(2) { 0.0 } else { std::f64::consts::PI };
        CPoint::new(-self.log_scale, sign) - self.normalized[self.n].ln()
    }

    /// Horner evaluation of B, B′ and B″ on max-normalized coefficients.
    pub fn eval(&self, z: CPoint) -> Result<Evaluation, BesselError> {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if !scale.is_finite() {
            return Err(BesselError::Overflow(z));
        }
        let zero = CPoint::new(0.0, 0.0);
        let (mut p, mut d1, mut d2) = (zero, zero, zero);
        let mut mag = 0.0;
        let r = z.norm();
        for c in self.coeffs.iter().rev() {
            d2 = d2 * z + d1;
            d1 = d1 * z + p;
            p = p * z + c / scale;
            mag = mag * r + c.norm() / scale;
        }
        let ev = Evaluation { value: p * scale, derivative: d1 * scale, second: d2 * 2.0 * scale, scale, magnitude: mag * scale };
        let finite = |w: CPoint| w.re.is_finite() && w.im.is_finite();
        if finite(ev.value) && finite(ev.derivative) && finite(ev.second) && ev.magnitude.is_finite() {
            Ok(ev)
        } else {
            Err(BesselError::Overflow(z))
        }
    }

    /// Evaluates with coefficient moduli at |z|: the three moduli bounding B, B′, B″.
    fn abs_eval(&self, r: f64) -> (f64, f64, f64) {
        let (mut p, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            d2 = d2 * r + d1;
            d1 = d1 * r + p;
            p = p * r + c.norm();
        }
        (p, d1, 2.0 * d2)
    }

    /// Relative residual of z²B″ + (αz+1)B′ − n(n+α−1)B.
    pub fn ode_residual(&self, z: CPoint) -> Result<f64, BesselError> {
        let ev = self.eval(z)?;
        let n = self.n as f64;
        let lam = n * (n + self.alpha - 1.0);
        let lin = self.alpha * z + 1.0;
        let res = z * z * ev.second + lin * ev.derivative - lam * ev.value;
        let (m0, m1, m2) = self.abs_eval(z.norm());
        let scale = z.norm_sqr() * m2 + lin.norm() * m1 + lam.norm() * m0;
        Ok(res.norm() / scale.max(f64::MIN_POSITIVE))
    }

    /// Zeros of this polynomial with uniform weights.
    pub fn zeros(&self) -> Result<EmpiricalMeasure, BesselError> {
        bessel_zeros(self)
    }
}

/// Relative residual of
/// (n+α−1)(2n+α−2)B_{n+1} = ((2n+α)(2n+α−2)z + α−2)(2n+α−1)B_n + n(2n+α)B_{n−1}.
pub fn recurrence_residual(n: usize, alpha: CPoint, z: CPoint) -> Result<f64, BesselError> {
    if n == 0 {
        return Err(BesselError::DegreeTooSmall(1));
    }
    let nf = n as f64;
    let r = z.norm();
    let terms = [n + 1, n, n - 1].map(|k| {
        let p = BesselPolynomial::new(k, alpha);
        p.eval(z).map(|e| (e.value, p.abs_eval(r).0))
    });
    let [(b_next, m_next), (b, m), (b_prev, m_prev)] = [terms[0].clone()?, terms[1].clone()?, terms[2].clone()?];
    let k_next = (nf + alpha - 1.0) * (2.0 * nf + alpha - 2.0);
    let k_mid = ((2.0 * nf + alpha) * (2.0 * nf + alpha - 2.0) * z + alpha - 2.0) * (2.0 * nf + alpha - 1.0);
    let k_prev = nf * (2.0 * nf + alpha);
    let res = k_next * b_next - k_mid * b - k_prev * b_prev;
    let scale = k_next.norm() * m_next + k_mid.norm() * m + k_prev.norm() * m_prev;
    Ok(res.norm() / scale.max(f64::MIN_POSITIVE))
}

/// Generalized Laguerre polynomial L_n^{(β)}(x) = Σ C(n+β, n−k)(−x)^k/k!, with
/// the binomial of a complex upper argument taken as a product.
pub fn laguerre(n: usize, beta: CPoint, x: CPoint) -> CPoint {
    laguerre_terms(n, beta, x).iter().sum()
}

fn laguerre_terms(n: usize, beta: CPoint, x: CPoint) -> Vec<CPoint> {
    let upper = beta + n as f64;
    (0..=n)
        .map(|k| {
            let m = n - k;
            let mut binom = CPoint::new(1.0, 0.0);
            for j in 1..=m {
                binom *= (upper - (m - j) as f64) / j as f64;
            }
            let mut pw = CPoint::new(1.0, 0.0);
            for j in 1..=k {
                pw *= -x / j as f64;
            }
            binom * pw
        })
        .collect()
}

/// Relative residual of B_n^{(α)}(z) = n!(−z)^n L_n^{(−2n−α+1)}(1/z).
pub fn laguerre_link_residual(n: usize, alpha: CPoint, z: CPoint) -> Result<f64, BesselError> {
    if z.norm() == 0.0 {
        return Err(BesselError::OriginEvaluation);
    }
    let beta = -alpha - (2 * n) as f64 + 1.0;
    let pre = (1..=n).fold(CPoint::new(1.0, 0.0), |acc, j| acc * j as f64) * (-z).powi(n as i32);
    let terms = laguerre_terms(n, beta, 1.0 / z);
    let rhs: CPoint = pre * terms.iter().sum::<CPoint>();
    let rhs_mag: f64 = pre.norm() * terms.iter().map(|t| t.norm()).sum::<f64>();
    let poly = BesselPolynomial::new(n, alpha);
    let lhs = poly.eval(z)?;
    Ok((lhs.value - rhs).norm() / lhs.magnitude.max(rhs_mag).max(f64::MIN_POSITIVE))
}

/// Uniform probability measure on a finite point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    points: Vec<CPoint>,
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<CPoint>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[CPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.points.len() as f64
    }

    /// Push-forward under z ↦ t·z.
    pub fn scaled(&self, t: f64) -> Self {
        Self { points: self.points.iter().map(|p| p * t).collect() }
    }

    /// C(z) = (1/n) Σ 1/(z − z_k).
    pub fn cauchy_transform(&self, z: CPoint) -> Result<CPoint, BesselError> {
        let mut acc = CPoint::new(0.0, 0.0);
        for p in &self.points {
            let d = z - p;
            if d.norm() <= 1e-9 {
                return Err(BesselError::SupportCollision);
            }
            acc += 1.0 / d;
        }
        Ok(acc * self.weight())
    }

    pub fn distance_to_support(&self, z: CPoint) -> f64 {
        self.points.iter().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min)
    }
}

/// All zeros of a Bessel polynomial, each certified against the coefficients.
pub fn bessel_zeros(poly: &BesselPolynomial) -> Result<EmpiricalMeasure, BesselError> {
    let n = poly.degree();
    if n == 0 {
        return Err(BesselError::DegreeTooSmall(1));
    }
    let alpha = poly.alpha();
    let nc = poly.normalized_coeffs();
    if nc[n].norm() <= PARAMETER_TOL * nc[n - 1].norm().max(nc[0].norm()) {
        return Err(BesselError::LeadingCoefficientZero { n, alpha });
    }
    let points = if n == 1 {
        vec![-1.0 / alpha]
    } else {
        let up = continue_zeros(n, alpha, 1.0);
        match up {
            Some(z) => z,
            None => continue_zeros(n, alpha, -1.0).ok_or(BesselError::NoConvergence { worst: f64::INFINITY })?,
        }
    };
    let worst = points.iter().map(|&z| poly.relative_value(z)).fold(0.0, f64::max);
    if worst > CERT_TOL || points.iter().any(|p| !(p.re.is_finite() && p.im.is_finite())) {
        return Err(BesselError::NoConvergence { worst });
    }
    Ok(EmpiricalMeasure::new(points))
}

/// Continues the equilibrium configuration from α + i·side·R down to α.
fn continue_zeros(n: usize, alpha: CPoint, side: f64) -> Option<Vec<CPoint>> {
    let nf = n as f64;
    let dir = CPoint::new(0.0, side);
    let param = |tau: f64| alpha + dir * tau.exp();
    let tau_start = (100.0 * nf * nf).max(10.0 * alpha.norm()).ln();
    let tau_end = (1e-3 * alpha.norm().max(1.0)).ln();

    let a0 = param(tau_start);
    let eps = (-2.0 / a0).sqrt();
    let start: Vec<CPoint> = hermite_zeros(n).into_iter().map(|h| (eps * h - 1.0) / a0).collect();
    let mut z = newton(start, a0, 30)?;

    let mut tau = tau_start;
    let mut h: f64 = 0.5;
    let mut attempts = 0;
    while tau > tau_end {
        attempts += 1;
        if attempts > 2000 || h < 1e-6 {
            return None;
        }
        let next = tau - h;
        let a_cur = param(tau);
        let a_next = if next <= tau_end { alpha } else { param(next) };
        // Tangent predictor: dz/dα = −J⁻¹ z.
        let (_, jac) = system(&z, a_cur);
        let rhs: Vec<CPoint> = z.iter().map(|v| -v).collect();
        let Some(dzda) = solve(jac, rhs, n) else {
            h *= 0.5;
            continue;
        };
        let pred: Vec<CPoint> = z.iter().zip(&dzda).map(|(v, d)| v + d * (a_next - a_cur)).collect();
        match newton(pred, a_next, 8) {
            Some(zn) => {
                z = zn;
                tau = if next <= tau_end { tau_end } else { next };
                h = (h * 1.5).min(2.0);
            }
            None => h *= 0.5,
        }
    }
    newton(z, alpha, 8)
}

/// F_k = 2z_k² Σ_{j≠k} 1/(z_k − z_j) + αz_k + 1 and its Jacobian (row-major).
fn system(z: &[CPoint], alpha: CPoint) -> (Vec<CPoint>, Vec<CPoint>) {
    let n = z.len();
    let zero = CPoint::new(0.0, 0.0);
    let mut f = vec![zero; n];
    let mut jac = vec![zero; n * n];
    for k in 0..n {
        let mut s = zero;
        let mut s2 = zero;
        let zk2 = z[k] * z[k];
        for j in 0..n {
            if j != k {
                let r = 1.0 / (z[k] - z[j]);
                s += r;
                s2 += r * r;
                jac[k * n + j] = 2.0 * zk2 * r * r;
            }
        }
        f[k] = 2.0 * zk2 * s + alpha * z[k] + 1.0;
        jac[k * n + k] = 4.0 * z[k] * s - 2.0 * zk2 * s2 + alpha;
    }
    (f, jac)
}

fn newton(mut z: Vec<CPoint>, alpha: CPoint, max_iter: usize) -> Option<Vec<CPoint>> {
    let n = z.len();
    let mut prev = f64::INFINITY;
    for it in 0..max_iter {
        let (f, jac) = system(&z, alpha);
        let rhs: Vec<CPoint> = f.iter().map(|v| -v).collect();
        let dz = solve(jac, rhs, n)?;
        let m = z.iter().zip(&dz).map(|(v, d)| d.norm() / v.norm()).fold(0.0, f64::max);
        if !m.is_finite() {
            return None;
        }
        for (v, d) in z.iter_mut().zip(&dz) {
            *v += d;
        }
        if m < 1e-14 {
            return Some(z);
        }
        if it >= 2 && m > 0.5 * prev {
            return (m < 1e-11).then_some(z);
        }
        prev = m;
    }
    (prev < 1e-11).then_some(z)
}

/// Gaussian elimination with partial pivoting on a row-major n×n system.
fn solve(mut a: Vec<CPoint>, mut b: Vec<CPoint>, n: usize) -> Option<Vec<CPoint>> {
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))?;
        if a[piv * n + col].norm() == 0.0 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            b.swap(piv, col);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / d;
            if factor.norm() == 0.0 {
                continue;
            }
            for j in col..n {
                let v = a[col * n + j];
                a[row * n + j] -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    let mut x = b;
    for row in (0..n).rev() {
        let mut acc = x[row];
        for j in row + 1..n {
            acc -= a[row * n + j] * x[j];
        }
        x[row] = acc / a[row * n + row];
    }
    x.iter().all(|v| v.re.is_finite() && v.im.is_finite()).then_some(x)
}

/// Zeros of the Hermite polynomial H_n: eigenvalues of the Jacobi matrix with
/// off-diagonal entries √(k/2), by implicit QL.
fn hermite_zeros(n: usize) -> Vec<f64> {
    let mut d = vec![0.0f64; n];
    let mut e: Vec<f64> = (1..=n).map(|k| if k < n { (k as f64 / 2.0).sqrt() } else { 0.0 }).collect();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    d
}

/// A parameter of the family α = A·n, excluding A = −1 and A = −2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParameter(CPoint);

impl FamilyParameter {
    pub fn new(a: CPoint) -> Result<Self, BesselError> {
        let finite = a.re.is_finite() && a.im.is_finite();
        if !finite || (a + 1.0).norm() <= PARAMETER_TOL || (a + 2.0).norm() <= PARAMETER_TOL {
            return Err(BesselError::DegenerateParameter(a));
        }
        Ok(Self(a))
    }

    pub fn value(&self) -> CPoint {
        self.0
    }

    pub fn equation(&self) -> AlgebraicEquation {
        AlgebraicEquation::bessel(self.0).expect("A ≠ −1 keeps every coefficient non-zero")
    }

    pub fn polynomial(&self, n: usize) -> BesselPolynomial {
        BesselPolynomial::new(n, self.0 * n as f64)
    }

    /// Zeros of B_n^{(An)} multiplied by n.
    pub fn scaled_zeros(&self, n: usize) -> Result<EmpiricalMeasure, BesselError> {
        Ok(bessel_zeros(&self.polynomial(n))?.scaled(n as f64))
    }
}

/// The quadratic differential −D_A(z)/z⁴ dz².
pub fn family_quaddiff(a: FamilyParameter) -> Result<QuadDiff, BesselError> {
    Ok(a.equation().to_quaddiff()?)
}

/// |z²C² + (Az+1)C − A − 1| with C the Cauchy transform of the rescaled zeros of B_n^{(An)}.
pub fn algebraic_residual(a: FamilyParameter, n: usize, z: CPoint) -> Result<f64, BesselError> {
    let mu = a.scaled_zeros(n)?;
    algebraic_residual_of(a, &mu, z)
}

/// Same as [`algebraic_residual`] for an already computed rescaled zero measure.
pub fn algebraic_residual_of(a: FamilyParameter, mu: &EmpiricalMeasure, z: CPoint) -> Result<f64, BesselError> {
    let c = mu.cauchy_transform(z)?;
    let av = a.value();
    Ok((z * z * c * c + (av * z + 1.0) * c - av - 1.0).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlayStats {
    /// Largest zero-to-curve distance divided by the curve diameter.
    pub max_dist: f64,
    pub mean_dist: f64,
    pub diameter: f64,
    pub short_trajectories: usize,
}

/// Distances from the rescaled zeros of B_n^{(An)} to the union of the traced short trajectories.
pub fn overlay_distance(a: FamilyParameter, n: usize, cfg: &TraceConfig) -> Result<OverlayStats, BesselError> {
    if n < 1 {
        return Err(BesselError::DegreeTooSmall(1));
    }
    let qd = family_quaddiff(a)?;
    let graph = critical_graph(&qd, cfg.default_budget(&qd), cfg)?;
    if graph.short_trajectories.is_empty() {
        return Err(BesselError::NoShortTrajectory);
    }
    let mu = a.scaled_zeros(n)?;
    let curves: Vec<&[crate::cxnum::CPoint]> = graph.short_trajectories.iter().map(|s| s.trajectory.points()).collect();
    Ok(overlay_stats(&mu, &curves))
}

/// Normalized distance statistics of a point set to a union of polylines.
pub fn overlay_stats(mu: &EmpiricalMeasure, curves: &[&[CPoint]]) -> OverlayStats {
    let all: Vec<CPoint> = curves.iter().flat_map(|c| c.iter().copied()).collect();
    let diameter = all
        .par_iter()
        .map(|p| all.iter().map(|q| (p - q).norm()).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max);
    let dists: Vec<f64> = mu
        .points()
        .iter()
        .map(|&z| curves.iter().map(|c| polyline_distance(z, c)).fold(f64::INFINITY, f64::min) / diameter)
        .collect();
    let max_dist = dists.iter().copied().fold(0.0, f64::max);
    let mean_dist = dists.iter().sum::<f64>() / dists.len() as f64;
    OverlayStats { max_dist, mean_dist, diameter, short_trajectories: curves.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> CPoint {
        CPoint::new(re, im)
    }

    #[test]
    fn small_coefficients() {
        assert_eq!(BesselPolynomial::new(0, c(3.0, 1.0)).coeffs(), &[c(1.0, 0.0)]);
        let al = c(0.7, -1.3);
        let p1 = BesselPolynomial::new(1, al);
        assert!((p1.coeffs()[1] - al).norm() < 1e-15);
        let p2 = BesselPolynomial::new(2, al);
        let want = [c(1.0, 0.0), 2.0 * (al + 1.0), (al + 2.0) * (al + 1.0)];
        for (g, w) in p2.coeffs().iter().zip(want) {
            assert!((g - w).norm() < 1e-14);
        }
    }

    #[test]
    fn evaluation_examples() {
        let e = BesselPolynomial::new(1, c(2.0, 0.0)).eval(c(3.0, 0.0)).unwrap();
        assert_eq!((e.value, e.derivative, e.second), (c(7.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)));
        let e = BesselPolynomial::new(2, c(1.0, 0.0)).eval(c(1.0, 0.0)).unwrap();
        assert!((e.value - c(11.0, 0.0)).norm() < 1e-14);
        assert!((e.derivative - c(16.0, 0.0)).norm() < 1e-14);
        assert!((e.second - c(12.0, 0.0)).norm() < 1e-14);
        let e = BesselPolynomial::new(17, c(-0.3, 2.0)).eval(c(0.0, 0.0)).unwrap();
        assert_eq!(e.value, c(1.0, 0.0));
    }

    #[test]
    fn ode_examples() {
        assert!(BesselPolynomial::new(1, c(0.4, 0.9)).ode_residual(c(1.0, 1.0)).unwrap() <= 1e-14);
        assert!(BesselPolynomial::new(2, c(3.0, 0.0)).ode_residual(c(2.0, 0.0)).unwrap() <= 1e-12);
    }

    #[test]
    fn recurrence_at_n1_by_hand() {
        // B_0 = 1, B_1 = 1 + 2z, B_2 = 1 + 6z + 12z² for α = 2.
        let b2 = BesselPolynomial::new(2, c(2.0, 0.0));
        assert_eq!(b2.coeffs(), &[c(1.0, 0.0), c(6.0, 0.0), c(12.0, 0.0)]);
        assert!(recurrence_residual(1, c(2.0, 0.0), c(1.0, 0.0)).unwrap() <= 1e-13);
    }

    #[test]
    fn leading_coefficient_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let falling = |x: CPoint, k: usize| (0..k).fold(c(1.0, 0.0), |acc, j| acc * (x - j as f64));
        for n in 1..=20usize {
            let al = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let nf = n as f64;
            let lhs = (nf + al - 1.0) * (2.0 * nf + al - 2.0) * falling(2.0 * nf + al, n + 1);
            let rhs = (2.0 * nf + al) * (2.0 * nf + al - 2.0) * (2.0 * nf + al - 1.0) * falling(2.0 * nf + al - 2.0, n);
            assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm(), "n = {n}");
            // and the coefficient recursion produces the same leading term
            let lead = BesselPolynomial::new(n, al).leading();
            assert!((lead - falling(2.0 * nf + al - 2.0, n)).norm() <= 1e-12 * lead.norm());
        }
    }

    #[test]
    fn laguerre_convention_locked_at_n1() {
        // B_1^{(2)}(2) = 5 and 1!·(−2)·L_1^{(−3)}(1/2) = −2·(−2 − 1/2) = 5.
        assert!((laguerre(1, c(-3.0, 0.0), c(0.5, 0.0)) - c(-2.5, 0.0)).norm() < 1e-15);
        assert!(laguerre_link_residual(1, c(2.0, 0.0), c(2.0, 0.0)).unwrap() < 1e-15);
        assert!(laguerre_link_residual(0, c(2.0, 0.0), c(2.0, 0.0)).unwrap() < 1e-15);
        // The reading z^n L_n^{(−2n−α+1)}(2/z) fails already here: 2·L_1^{(−3)}(1) = −6 ≠ 5.
        assert!((2.0 * laguerre(1, c(-3.0, 0.0), c(1.0, 0.0)) - c(-6.0, 0.0)).norm() < 1e-15);
        assert_eq!(laguerre_link_residual(3, c(1.0, 0.0), c(0.0, 0.0)), Err(BesselError::OriginEvaluation));
    }

    #[test]
    fn coefficients_positive_for_positive_alpha() {
        for al in [1.0, 2.5, 10.0] {
            for n in 0..=30 {
                assert!(BesselPolynomial::new(n, c(al, 0.0)).coeffs().iter().all(|v| v.re > 0.0 && v.im == 0.0));
            }
        }
    }

    #[test]
    fn hermite_zeros_small() {
        let h2 = hermite_zeros(2);
        assert!((h2[1] - 0.5f64.sqrt()).abs() < 1e-14 && (h2[0] + 0.5f64.sqrt()).abs() < 1e-14);
        let h3 = hermite_zeros(3);
        assert!(h3[1].abs() < 1e-14 && (h3[2] - 1.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn zeros_small_degree() {
        let z = bessel_zeros(&BesselPolynomial::new(1, c(2.0, 0.0))).unwrap();
        assert_eq!(z.points(), &[c(-0.5, 0.0)]);
        let mut z = bessel_zeros(&BesselPolynomial::new(2, c(1.0, 0.0))).unwrap().points().to_vec();
        z.sort_by(|x, y| x.im.total_cmp(&y.im));
        let s = 2f64.sqrt();
        assert!((z[0] - c(-2.0 / 6.0, -s / 6.0)).norm() < 1e-14, "{z:?}");
        assert!((z[1] - c(-2.0 / 6.0, s / 6.0)).norm() < 1e-14, "{z:?}");
        assert!(bessel_zeros(&BesselPolynomial::new(0, c(1.0, 0.0))).is_err());
    }

    #[test]
    fn vieta_sum_at_n40() {
        let p = BesselPolynomial::new(40, c(120.0, 0.0));
        let mu = bessel_zeros(&p).unwrap();
        let cf = p.coeffs();
        let want = -cf[39] / cf[40];
        let got: CPoint = mu.points().iter().sum();
        assert!((got - want).norm() <= 1e-8 * want.norm());
    }

    #[test]
    fn vieta_in_log_space_beyond_overflow() {
        let p = FamilyParameter::new(c(3.0, 0.0)).unwrap().polynomial(120);
        assert!(!p.leading().norm().is_finite());
        let mu = bessel_zeros(&p).unwrap();
        let sum: CPoint = mu.points().iter().sum();
        assert!((sum - p.zero_sum()).norm() <= 1e-8 * sum.norm());
        let log_prod: CPoint = mu.points().iter().map(|z| z.ln()).sum();
        let d = log_prod - p.log_zero_product();
        let wrapped = (d.im / std::f64::consts::TAU).round() * std::f64::consts::TAU;
        assert!(d.re.abs() < 1e-8 && (d.im - wrapped).abs() < 1e-8, "{d}");
    }

    #[test]
    fn cauchy_transform_matches_log_derivative() {
        let mu = bessel_zeros(&BesselPolynomial::new(1, c(2.0, 0.0))).unwrap();
        let z = c(0.3, 0.8);
        assert!((mu.cauchy_transform(z).unwrap() - 1.0 / (z + 0.5)).norm() < 1e-15);

        let p = BesselPolynomial::new(30, c(-9.0, 21.0));
        let mu = bessel_zeros(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let z = c(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
            if mu.distance_to_support(z) < 1e-3 {
                continue;
            }
            let e = p.eval(z).unwrap();
            let want = e.derivative / (30.0 * e.value);
            let got = mu.cauchy_transform(z).unwrap();
            assert!((got - want).norm() <= 1e-8 * want.norm(), "{got} {want}");
        }
        let far = c(1e6, 0.0);
        assert!((far * mu.cauchy_transform(far).unwrap() - 1.0).norm() < 1e-6);
        assert_eq!(mu.cauchy_transform(mu.points()[0]), Err(BesselError::SupportCollision));
    }

    #[test]
    fn family_parameter_guard() {
        assert!(FamilyParameter::new(c(-1.0, 0.0)).is_err());
        assert!(FamilyParameter::new(c(-2.0, 0.0)).is_err());
        assert!(FamilyParameter::new(c(-1.0, 0.1)).is_ok());
    }

    #[test]
    fn family_quaddiff_a3() {
        let qd = family_quaddiff(FamilyParameter::new(c(3.0, 0.0)).unwrap()).unwrap();
        assert!((qd.lambda() - c(0.0, 5.0)).norm() < 1e-14);
        assert!((qd.a() - c(-3.0, -4.0) / 25.0).norm() < 1e-12);
        assert!((qd.b() - c(-3.0, 4.0) / 25.0).norm() < 1e-12);
    }

    #[test]
    fn algebraic_residual_reference_values() {
        // Reference residuals from an independent 50-digit computation.
        let cases = [
            (c(3.0, 0.0), c(2.0, 2.0), [0.00678, 0.00336, 0.00167]),
            (c(-2.0, 2.0), c(2.0, 2.0), [0.0188, 0.0093, 0.0046]),
        ];
        for (a, z, want) in cases {
            let fa = FamilyParameter::new(a).unwrap();
            for (n, w) in [20, 40, 80].into_iter().zip(want) {
                let r = algebraic_residual(fa, n, z).unwrap();
                assert!((r - w).abs() <= 0.02 * w, "A = {a}, n = {n}: {r} vs {w}");
            }
        }
    }
}
