//! Periods by direct quadrature along explicit paths from `a` to `b`.

use serde::{Deserialize, Serialize};

use super::trace::segment_distance;
use super::{Branch, QdError, QuadDiff};
use crate::cxnum::{BranchTracker, CPoint, GaussLegendre, NumError};

const MIN_PIECES: usize = 64;
const MAX_PIECES: usize = 50_000;

/// λ∫ √((t−a)(t−b))/t² dt along the polyline a → via… → b, root continued
/// from the start. The overall sign depends on the seed branch.
pub fn path_period(qd: &QuadDiff, via: &[CPoint]) -> Result<CPoint, QdError> {
    let mut nodes = vec![qd.a()];
    nodes.extend_from_slice(via);
    nodes.push(qd.b());
    let last = nodes.len() - 2;
    let rule = GaussLegendre::new(16);
    let (a, b) = (qd.a(), qd.b());
    let mut tracker = BranchTracker::new();
    let mut acc = CPoint::new(0.0, 0.0);
    for (k, w) in nodes.windows(2).enumerate() {
        let (p, q) = (w[0], w[1]);
        let d = q - p;
        // s = u² near a zero at the start, s = 1 − (1−u)² near one at the end.
        let map = |u: f64| -> (f64, f64) {
            match (k == 0, k == last) {
                (true, true) => {
                    let s = 0.5 - 0.5 * (std::f64::consts::PI * u).cos();
                    (s, 0.5 * std::f64::consts::PI * (std::f64::consts::PI * u).sin())
                }
                (true, false) => (u * u, 2.0 * u),
                (false, true) => (1.0 - (1.0 - u) * (1.0 - u), 2.0 * (1.0 - u)),
                (false, false) => (u, 1.0),
            }
        };
        // The pole at the origin sets the resolution.
        let clearance = segment_distance(CPoint::new(0.0, 0.0), p, q).max(f64::MIN_POSITIVE);
        let pieces = ((16.0 * d.norm() / clearance).ceil() as usize).clamp(MIN_PIECES, MAX_PIECES);
        for j in 0..pieces {
            let (u0, u1) = (j as f64 / pieces as f64, (j + 1) as f64 / pieces as f64);
            let mut f = |u: CPoint| -> CPoint {
                let (s, ds) = map(u.re);
                let z = p + d * s;
                let fz = (z - a) * (z - b);
                let root = if tracker.current().is_none() {
                    let r = fz.sqrt();
                    tracker.seed(r);
                    r
                } else {
                    tracker.sqrt_continuous(fz).unwrap_or(CPoint::new(f64::NAN, f64::NAN))
                };
                root / (z * z) * d * ds
            };
            acc += rule.segment(&mut f, CPoint::new(u0, 0.0), CPoint::new(u1, 0.0))?;
        }
    }
    if !(acc.re.is_finite() && acc.im.is_finite()) {
        return Err(QdError::Numeric(NumError::NonFiniteSample(acc)));
    }
    Ok(qd.lambda() * acc)
}

/// Quadrature values of both homotopy classes next to the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodCheck {
    /// Along the straight segment [a, b].
    pub straight: CPoint,
    /// Along a detour a → v₁ → v₂ → v₃ → b on the far side of the origin.
    pub bent: CPoint,
    pub plus: CPoint,
    pub minus: CPoint,
    /// Largest relative mismatch after matching each quadrature value to a class up to sign.
    pub rel_error: f64,
}

/// Both periods by quadrature; the straight and the bent path lie in different classes.
///
/// Fails with `InvalidArgument` when the origin is too close to either path.
pub fn period_check(qd: &QuadDiff) -> Result<PeriodCheck, QdError> {
    let (a, b) = (qd.a(), qd.b());
    let ab = b - a;
    let t = (-(a.conj() * ab).re / ab.norm_sqr()).clamp(0.0, 1.0);
    let q = a + ab * t;
    let scale = a.norm().max(b.norm());
    if q.norm() < 1e-3 * scale {
        return Err(QdError::Numeric(NumError::InvalidArgument("origin on the segment [a, b]")));
    }
    // Detour around the far side of the origin; keep the orientation whose
    // closed loop with the segment winds once around it.
    let r = 2.0 * scale;
    let th = q.arg();
    let zero = CPoint::new(0.0, 0.0);
    let mut best: Option<(Vec<CPoint>, f64)> = None;
    for sgn in [1.0, -1.0] {
        let via: Vec<CPoint> = [0.5, 1.0, 1.5].iter().map(|k| CPoint::from_polar(r, th + sgn * k * std::f64::consts::PI)).collect();
        let mut ring = vec![a];
        ring.extend(&via);
        ring.push(b);
        let clearance = ring.windows(2).map(|w| segment_distance(zero, w[0], w[1])).fold(f64::INFINITY, f64::min);
        let mut closed = ring.clone();
        closed.push(a);
        let turn: f64 = closed.windows(2).map(|w| (w[1] / w[0]).arg()).sum();
        let winding = (turn / std::f64::consts::TAU).round().abs();
        if winding == 1.0 && best.as_ref().is_none_or(|(_, c)| clearance > *c) {
            best = Some((via, clearance));
        }
    }
    let Some((via, clearance)) = best else {
        return Err(QdError::Numeric(NumError::InvalidArgument("no detour winding once around the origin")));
    };
    if clearance < 1e-2 * scale {
        return Err(QdError::Numeric(NumError::InvalidArgument("origin too close to the detour")));
    }
    let straight = path_period(qd, &[])?;
    let bent = path_period(qd, &via)?;
    let plus = qd.period(Branch::Plus);
    let minus = qd.period(Branch::Minus);
    let err = |x: CPoint, p: CPoint| (x - p).norm().min((x + p).norm()) / p.norm().max(f64::MIN_POSITIVE);
    let rel_error = (err(straight, plus).max(err(bent, minus))).min(err(straight, minus).max(err(bent, plus)));
    Ok(PeriodCheck { straight, bent, plus, minus, rel_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> CPoint {
        CPoint::new(re, im)
    }

    #[test]
    fn segment_on_the_real_axis() {
        let qd = QuadDiff::new(c(1.0, 0.0), c(1.0, 0.0), c(4.0, 0.0)).unwrap();
        let s = path_period(&qd, &[]).unwrap();
        assert!((s.norm() - PI / 4.0).abs() < 1e-12, "{s}");
        let chk = period_check(&qd).unwrap();
        assert!(chk.rel_error < 1e-10, "{chk:?}");
    }

    #[test]
    fn generic_complex_parameters() {
        let qd = QuadDiff::new(c(0.3, -1.2), c(2.0, 1.0), c(-0.5, 0.7)).unwrap();
        let chk = period_check(&qd).unwrap();
        assert!(chk.rel_error < 1e-10, "{chk:?}");
    }
}
