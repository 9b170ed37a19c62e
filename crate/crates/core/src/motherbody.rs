//! The algebraic equation z²C² − (pz+q)C + r = 0 for a Cauchy transform C.
//!
//! Its discriminant D(z) = (p²−4r)z² + 2pqz + q² defines the quadratic
//! differential −D(z)/z⁴ dz², and a real mother-body measure can only be
//! supported on short trajectories of that differential, with density
//! (1/2πi)(√D)₊/z² dz.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cxnum::{BranchTracker, CPoint, GaussLegendre, NumError};
use crate::quaddiff::{polyline_distance, EndpointClass, QdError, QuadDiff, TrajectoryPath};

/// Coefficients at or below this modulus count as zero.
const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MbError {
    #[error("coefficient {0} must be non-zero")]
    ZeroCoefficient(&'static str),
    #[error("the equation cannot be evaluated at the origin")]
    OriginEvaluation,
    #[error("degenerate discriminant: {0}")]
    DegenerateDiscriminant(&'static str),
    #[error("trajectory does not join the two roots of the discriminant")]
    NotShortTrajectory,
    #[error(transparent)]
    QuadDiff(#[from] QdError),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicEquation {
    p: CPoint,
    q: CPoint,
    r: CPoint,
}

/// D(z) = c2·z² + c1·z + c0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discriminant {
    pub c2: CPoint,
    pub c1: CPoint,
    pub c0: CPoint,
    /// Roots, present when c2 ≠ 0; the first uses −√(c1² − 4c2c0).
    pub roots: Option<(CPoint, CPoint)>,
}

impl Discriminant {
    pub fn eval(&self, z: CPoint) -> CPoint {
        (self.c2 * z + self.c1) * z + self.c0
    }

    /// max(|c2|, |c1|, |c0|).
    pub fn scale(&self) -> f64 {
        self.c2.norm().max(self.c1.norm()).max(self.c0.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassPair {
    pub m_plus: CPoint,
    pub m_minus: CPoint,
    pub real_mass_exists: bool,
}

impl MassPair {
    pub fn values(&self) -> [CPoint; 2] {
        [self.m_plus, self.m_minus]
    }
}

/// Arc-length density of the candidate measure along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    /// Mass carried by each polyline segment, oriented so the first non-zero weight is positive.
    pub weights: Vec<f64>,
    pub total_mass: f64,
    /// Largest |imaginary part| of a segment mass relative to its modulus.
    pub max_imaginary: f64,
}

impl Density {
    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl AlgebraicEquation {
    pub fn new(p: CPoint, q: CPoint, r: CPoint) -> Result<Self, MbError> {
        for (name, v) in [("p", p), ("q", q), ("r", r)] {
            if !(v.re.is_finite() && v.im.is_finite()) || v.norm() <= ZERO_TOL {
                return Err(MbError::ZeroCoefficient(name));
            }
        }
        Ok(Self { p, q, r })
    }

    /// The Bessel-family equation z²C² + (Az+1)C − A − 1 = 0.
    pub fn bessel(a: CPoint) -> Result<Self, MbError> {
        Self::new(-a, CPoint::new(-1.0, 0.0), -(a + 1.0))
    }

    pub fn p(&self) -> CPoint {
        self.p
    }

    pub fn q(&self) -> CPoint {
        self.q
    }

    pub fn r(&self) -> CPoint {
        self.r
    }

    pub fn discriminant(&self) -> Discriminant {
        let c2 = self.p * self.p - 4.0 * self.r;
        let c1 = 2.0 * self.p * self.q;
        let c0 = self.q * self.q;
        let roots = (c2.norm() > ZERO_TOL * (1.0 + c1.norm() + c0.norm())).then(|| {
            let s = (c1 * c1 - 4.0 * c2 * c0).sqrt();
            ((-c1 - s) / (2.0 * c2), (-c1 + s) / (2.0 * c2))
        });
        Discriminant { c2, c1, c0, roots }
    }

    /// Both solutions (pz+q ± √D(z))/(2z²), principal root, `+` first.
    pub fn solve_pointwise(&self, z: CPoint) -> Result<(CPoint, CPoint), MbError> {
        if z.norm() == 0.0 {
            return Err(MbError::OriginEvaluation);
        }
        let s = self.discriminant().eval(z).sqrt();
        let b = self.p * z + self.q;
        let den = 2.0 * z * z;
        Ok(((b + s) / den, (b - s) / den))
    }

    /// |z²C² − (pz+q)C + r| divided by the largest of the three terms.
    pub fn residual(&self, z: CPoint, c: CPoint) -> f64 {
        let t1 = z * z * c * c;
        let t2 = (self.p * z + self.q) * c;
        let scale = t1.norm().max(t2.norm()).max(self.r.norm());
        (t1 - t2 + self.r).norm() / scale
    }

    /// Candidate total masses (p ± √(p²−4r))/2.
    pub fn masses(&self) -> MassPair {
        let s = (self.p * self.p - 4.0 * self.r).sqrt();
        let m_plus = (self.p + s) / 2.0;
        let m_minus = (self.p - s) / 2.0;
        let real = |m: CPoint| m.im.abs() <= 1e-9 * m.norm().max(1.0);
        MassPair { m_plus, m_minus, real_mass_exists: real(m_plus) || real(m_minus) }
    }

    /// −D(z)/z⁴ dz² written as λ²(z−a)(z−b)/z⁴ with λ = i√(p²−4r).
    pub fn to_quaddiff(&self) -> Result<QuadDiff, MbError> {
        let d = self.discriminant();
        let (a, b) = d.roots.ok_or(MbError::DegenerateDiscriminant("p² − 4r = 0"))?;
        let tol = 1e-10 * (a.norm().max(b.norm())).max(1.0);
        if (a - b).norm() <= tol {
            return Err(MbError::DegenerateDiscriminant("double root"));
        }
        if a.norm() <= tol || b.norm() <= tol {
            return Err(MbError::DegenerateDiscriminant("root at the origin"));
        }
        let lambda = CPoint::new(0.0, 1.0) * d.c2.sqrt();
        Ok(QuadDiff::new(lambda, a, b)?)
    }

    /// Mass of (1/2πi)√D(z)/z² dz on each polyline segment of a short trajectory.
    ///
    /// The root is continued along the curve from its first segment; the sign is
    /// then fixed globally so that the first non-zero weight is positive.
    pub fn density_along(&self, traj: &TrajectoryPath) -> Result<Density, MbError> {
        let qd = self.to_quaddiff()?;
        let pts = traj.points();
        let tol = 1e-6 * (qd.a() - qd.b()).norm();
        let (s, e) = (pts[0], *pts.last().unwrap());
        let joins = |x: CPoint, y: CPoint| (s - x).norm() <= tol && (e - y).norm() <= tol;
        if !(joins(qd.a(), qd.b()) || joins(qd.b(), qd.a())) || !matches!(traj.endpoint, EndpointClass::HitsZero { .. }) {
            return Err(MbError::NotShortTrajectory);
        }
        let d = self.discriminant();
        let rule = GaussLegendre::new(8);
        let mid = 0.5 * (pts[0] + pts[1]);
        let mut tracker = BranchTracker::seeded(d.eval(mid).sqrt());
        let factor = CPoint::new(0.0, -1.0 / std::f64::consts::TAU);
        let mut raw = Vec::with_capacity(pts.len() - 1);
        for w in pts.windows(2) {
            let mut f = |z: CPoint| {
                tracker.sqrt_continuous(d.eval(z)).unwrap_or(CPoint::new(f64::NAN, f64::NAN)) / (z * z)
            };
            raw.push(factor * rule.segment(&mut f, w[0], w[1])?);
        }
        let sign = raw.iter().find(|m| m.re != 0.0).map_or(1.0, |m| m.re.signum());
        let max_imaginary = raw.iter().map(|m| m.im.abs() / m.norm().max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
        let weights: Vec<f64> = raw.iter().map(|m| sign * m.re).collect();
        let total_mass = weights.iter().sum();
        Ok(Density { weights, total_mass, max_imaginary })
    }

    /// Value at the origin of the root of D continued from ∞ (√D ∼ √(p²−4r)·z)
    /// along a ray that avoids the trajectory.
    pub fn origin_branch_value(&self, traj: &TrajectoryPath) -> Result<CPoint, MbError> {
        let d = self.discriminant();
        let pts = traj.points();
        let extent = pts.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let far = 100.0 * extent;
        // Pick the ray direction that stays farthest from the curve.
        let samples = 256;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for k in 0..samples {
            let t = std::f64::consts::TAU * k as f64 / samples as f64;
            let dir = CPoint::from_polar(1.0, t);
            let clearance = (1..=200)
                .map(|j| far * (j as f64 / 200.0).powi(3))
                .map(|r| polyline_distance(dir * r, pts) / r.max(1e-300))
                .fold(f64::INFINITY, f64::min);
            if clearance > best.0 {
                best = (clearance, t);
            }
        }
        let dir = CPoint::from_polar(1.0, best.1);
        let start = dir * far;
        let seed = start * d.c2.sqrt() * (d.eval(start) / (d.c2 * start * start)).sqrt();
        let mut tracker = BranchTracker::seeded(seed);
        let n = 20_000;
        let mut value = seed;
        for j in 1..=n {
            let r = far * (1.0 - j as f64 / n as f64).powi(3);
            value = tracker.sqrt_continuous(d.eval(dir * r))?;
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaddiff::{critical_graph, TraceConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> CPoint {
        CPoint::new(re, im)
    }

    #[test]
    fn rejects_zero_coefficients() {
        assert_eq!(AlgebraicEquation::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)), Err(MbError::ZeroCoefficient("p")));
        assert_eq!(AlgebraicEquation::new(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)), Err(MbError::ZeroCoefficient("q")));
        assert_eq!(AlgebraicEquation::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)), Err(MbError::ZeroCoefficient("r")));
    }

    #[test]
    fn pointwise_solutions() {
        let eq = AlgebraicEquation::new(c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        let (cp, cm) = eq.solve_pointwise(c(1.0, 0.0)).unwrap();
        let s5 = 5f64.sqrt();
        assert!((cp - c((3.0 + s5) / 2.0, 0.0)).norm() < 1e-14);
        assert!((cm - c((3.0 - s5) / 2.0, 0.0)).norm() < 1e-14);

        let eq = AlgebraicEquation::bessel(c(3.0, 0.0)).unwrap();
        let (cp, cm) = eq.solve_pointwise(c(1.0, 0.0)).unwrap();
        let s8 = 8f64.sqrt();
        let mut got = [cp.re, cm.re];
        got.sort_by(f64::total_cmp);
        assert!((got[0] - (-2.0 - s8)).abs() < 1e-14 && (got[1] - (-2.0 + s8)).abs() < 1e-14);
        assert_eq!(eq.solve_pointwise(c(0.0, 0.0)), Err(MbError::OriginEvaluation));
    }

    #[test]
    fn pointwise_residuals_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut rc = || c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        for _ in 0..20 {
            let eq = AlgebraicEquation::new(rc(), rc(), rc()).unwrap();
            let z = rc();
            let (cp, cm) = eq.solve_pointwise(z).unwrap();
            assert!(eq.residual(z, cp) <= 1e-10 && eq.residual(z, cm) <= 1e-10);
        }
    }

    #[test]
    fn discriminant_vieta() {
        let eq = AlgebraicEquation::new(c(0.3, -1.2), c(2.0, 0.5), c(-0.7, 0.4)).unwrap();
        let d = eq.discriminant();
        let (z1, z2) = d.roots.unwrap();
        for z in [z1, z2] {
            assert!(d.eval(z).norm() <= 1e-10 * d.scale());
        }
        assert!((z1 * z2 - d.c0 / d.c2).norm() <= 1e-10 * (d.c0 / d.c2).norm());
        assert!((z1 + z2 + d.c1 / d.c2).norm() <= 1e-10 * (d.c1 / d.c2).norm());
    }

    #[test]
    fn mass_examples() {
        for a in [c(3.0, 0.0), c(-1.0, 0.1), c(-2.0, 2.0), c(0.5, -4.0)] {
            let m = AlgebraicEquation::bessel(a).unwrap().masses();
            let vals = m.values();
            assert!(vals.iter().any(|v| (v - c(1.0, 0.0)).norm() < 1e-12), "{vals:?}");
            assert!(vals.iter().any(|v| (v + a + 1.0).norm() < 1e-12), "{vals:?}");
            assert!(m.real_mass_exists);
            assert!((m.m_plus + m.m_minus - AlgebraicEquation::bessel(a).unwrap().p()).norm() < 1e-12);
        }
        let m = AlgebraicEquation::new(c(0.0, 2.0), c(1.0, 0.0), c(-1.0, 0.0)).unwrap().masses();
        assert!((m.m_plus - c(0.0, 1.0)).norm() < 1e-12 && (m.m_minus - c(0.0, 1.0)).norm() < 1e-12);
        assert!(!m.real_mass_exists);
        let m = AlgebraicEquation::new(c(3.0, 0.0), c(0.7, 0.0), c(2.0, 0.0)).unwrap().masses();
        assert_eq!((m.m_plus, m.m_minus), (c(2.0, 0.0), c(1.0, 0.0)));
    }

    #[test]
    fn bessel_reduction() {
        let eq = AlgebraicEquation::bessel(c(3.0, 0.0)).unwrap();
        let qd = eq.to_quaddiff().unwrap();
        assert!((qd.lambda() - c(0.0, 5.0)).norm() < 1e-14);
        assert!((qd.a() - c(-0.12, -0.16)).norm() < 1e-14);
        assert!((qd.b() - c(-0.12, 0.16)).norm() < 1e-14);
        let d = eq.discriminant();
        let z = c(1.0, 1.0);
        let lhs = -d.eval(z) / z.powi(4);
        assert!((lhs - qd.phi(z)).norm() <= 1e-12 * lhs.norm());

        let degenerate = AlgebraicEquation::new(c(0.0, 2.0), c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        assert!(matches!(degenerate.to_quaddiff(), Err(MbError::DegenerateDiscriminant(_))));
    }

    #[test]
    fn bessel_roots_match_closed_form() {
        for a in [c(3.0, 0.0), c(-1.0, 0.1), c(-2.0, 2.0), c(1.0, 1.0)] {
            let qd = AlgebraicEquation::bessel(a).unwrap().to_quaddiff().unwrap();
            let s = (a + 1.0).sqrt();
            let i = c(0.0, 1.0);
            let zm = ((1.0 - i * s) / (a + 2.0)).powi(2);
            let zp = ((1.0 + i * s) / (a + 2.0)).powi(2);
            let ok = |x: CPoint, y: CPoint| (qd.a() - x).norm() < 1e-10 && (qd.b() - y).norm() < 1e-10;
            assert!(ok(zm, zp) || ok(zp, zm));
        }
    }

    #[test]
    fn density_on_bessel_short_trajectories() {
        let cfg = TraceConfig::default();
        for (a, expected) in [(c(-1.0, 0.1), vec![1.0]), (c(3.0, 0.0), vec![1.0, 4.0])] {
            let eq = AlgebraicEquation::bessel(a).unwrap();
            let qd = eq.to_quaddiff().unwrap();
            let g = critical_graph(&qd, cfg.default_budget(&qd), &cfg).unwrap();
            let mut masses: Vec<f64> = g
                .short_trajectories
                .iter()
                .map(|s| {
                    let d = eq.density_along(&s.trajectory).unwrap();
                    assert!(d.min_weight() >= 0.0);
                    assert!(d.max_imaginary < 1e-4, "{}", d.max_imaginary);
                    d.total_mass
                })
                .collect();
            masses.sort_by(f64::total_cmp);
            assert_eq!(masses.len(), expected.len());
            for (m, e) in masses.iter().zip(&expected) {
                assert!((m - e).abs() < 1e-3, "{masses:?}");
            }
        }
    }

    #[test]
    fn origin_branch_is_plus_one_for_the_unit_mass_arc() {
        let cfg = TraceConfig::default();
        let eq = AlgebraicEquation::bessel(c(-1.0, 0.1)).unwrap();
        let qd = eq.to_quaddiff().unwrap();
        let g = critical_graph(&qd, cfg.default_budget(&qd), &cfg).unwrap();
        let v = eq.origin_branch_value(&g.short_trajectories[0].trajectory).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 0.05, "{v}");
    }
}
