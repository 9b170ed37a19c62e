//! Seeded invariant suites behind `qdflow verify`.

use std::f64::consts::TAU;

use num_complex::Complex64 as CPoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qdflow::bessel::{bessel_zeros, laguerre_link_residual, recurrence_residual, BesselPolynomial, FamilyParameter};
use qdflow::quaddiff::{critical_graph, period_check, QuadDiff, TraceConfig, DEFAULT_GATE_TOL};

/// Quadrature period against the closed form, relative.
pub const PERIOD_TOL: f64 = 1e-8;
/// period(plus) − period(minus) against λ·2πi, relative to |λ|.
pub const PERIOD_GAP_TOL: f64 = 1e-10;
/// Fraction of gate samples that must agree with the traced graph.
pub const GATE_AGREEMENT: f64 = 0.99;
/// Disagreements are tolerated only this close to the gate threshold.
pub const GATE_NEAR_THRESHOLD: f64 = 1e-3;
/// Off-threshold samples keep |Re v±| above this fraction of |v±|.
pub const GATE_SAFE_MARGIN: f64 = 0.05;
/// Recurrence, ODE and Laguerre-link residuals for n ≤ 25.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Vieta sum and product of certified zeros, relative.
pub const VIETA_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Periods,
    Gates,
    Bessel,
    All,
}

/// One row of the pass/fail table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub samples: usize,
    pub worst: f64,
    pub limit: f64,
    pub passed: bool,
    pub detail: String,
}

fn row(name: &str, samples: usize, worst: f64, limit: f64, detail: String) -> CheckRow {
    CheckRow { name: name.into(), samples, worst, limit, passed: worst <= limit, detail }
}

fn polar(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> CPoint {
    CPoint::from_polar(rng.gen_range(lo..hi), rng.gen_range(0.0..TAU))
}

/// Closed-form periods against quadrature along a straight and a detoured path.
pub fn periods(samples: usize, seed: u64) -> Vec<CheckRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = Vec::with_capacity(samples);
    while params.len() < samples {
        let (l, a, b) = (polar(&mut rng, 0.3, 3.0), polar(&mut rng, 0.2, 5.0), polar(&mut rng, 0.2, 5.0));
        if let Ok(qd) = QuadDiff::new(l, a, b) {
            params.push(qd);
        }
    }
    let results: Vec<(f64, f64)> = params
        .par_iter()
        .map(|qd| {
            let quad = period_check(qd).map(|c| c.rel_error).unwrap_or(f64::INFINITY);
            let gap = qd.period(qdflow::quaddiff::Branch::Plus) - qd.period(qdflow::quaddiff::Branch::Minus);
            let want = qd.lambda() * CPoint::new(0.0, TAU);
            (quad, (gap - want).norm() / qd.lambda().norm())
        })
        .collect();
    let worst_quad = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst_gap = results.iter().map(|r| r.1).fold(0.0, f64::max);
    vec![
        row("period quadrature", samples, worst_quad, PERIOD_TOL, "relative, both homotopy classes".into()),
        row("period gap λ·2πi", samples, worst_gap, PERIOD_GAP_TOL, "relative to |λ|".into()),
    ]
}

/// A parameter set for the gate suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSample {
    pub qd: QuadDiff,
    pub constructed_to_fire: bool,
}

/// Half the samples put Re v± = 0 by construction, the rest stay clear of the threshold.
pub fn gate_samples(samples: usize, seed: u64) -> Vec<GateSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    while out.len() < samples {
        let (a, b) = (polar(&mut rng, 0.3, 3.0), polar(&mut rng, 0.3, 3.0));
        let fire = out.len() % 2 == 0;
        let lambda = if fire {
            let s = (a * b).sqrt();
            let shift = if rng.gen_bool(0.5) { 2.0 } else { -2.0 };
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            CPoint::new(0.0, sign * rng.gen_range(0.5..2.0)) / ((a + b) / s + shift)
        } else {
            polar(&mut rng, 0.5, 2.0)
        };
        let Ok(qd) = QuadDiff::new(lambda, a, b) else { continue };
        if !fire {
            let g = qd.gate_values();
            if g.v_plus.re.abs() <= GATE_SAFE_MARGIN * g.v_plus.norm() || g.v_minus.re.abs() <= GATE_SAFE_MARGIN * g.v_minus.norm() {
                continue;
            }
        }
        out.push(GateSample { qd, constructed_to_fire: fire });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOutcome {
    pub gate: bool,
    pub traced: bool,
    pub margin: f64,
    pub constructed_to_fire: bool,
}

/// Gate decision next to the traced graph (trajectories joining `a` to `b`).
pub fn gate_outcomes(samples: &[GateSample], cfg: &TraceConfig) -> Vec<GateOutcome> {
    samples
        .par_iter()
        .map(|s| {
            let traced = critical_graph(&s.qd, cfg.default_budget(&s.qd), cfg)
                .map(|g| g.short_trajectories.iter().any(|t| !t.is_loop()))
                .unwrap_or(false);
            GateOutcome {
                gate: s.qd.short_trajectory_exists(DEFAULT_GATE_TOL).exists,
                traced,
                margin: s.qd.gate_margin(),
                constructed_to_fire: s.constructed_to_fire,
            }
        })
        .collect()
}

pub fn gates(samples: usize, seed: u64) -> Vec<CheckRow> {
    let outcomes = gate_outcomes(&gate_samples(samples, seed), &TraceConfig::default());
    let agree = outcomes.iter().filter(|o| o.gate == o.traced).count();
    let far_disagreements = outcomes.iter().filter(|o| o.gate != o.traced && o.margin >= GATE_NEAR_THRESHOLD).count();
    let need = (GATE_AGREEMENT * samples as f64).ceil() as usize;
    vec![
        CheckRow {
            name: "gate/trace agreement".into(),
            samples,
            worst: (samples - agree) as f64,
            limit: (samples - need) as f64,
            passed: agree >= need,
            detail: format!("{agree}/{samples} agree"),
        },
        CheckRow {
            name: "disagreements off threshold".into(),
            samples: samples - agree,
            worst: far_disagreements as f64,
            limit: 0.0,
            passed: far_disagreements == 0,
            detail: format!("margin ≥ {GATE_NEAR_THRESHOLD:e}"),
        },
    ]
}

/// Random (n ≤ 25, α, z) for the identity checks.
pub fn identity_samples(samples: usize, seed: u64) -> Vec<(usize, CPoint, CPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let n = rng.gen_range(1..=25);
            let alpha = CPoint::new(rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0));
            let z = polar(&mut rng, 0.05, 2.0);
            (n, alpha, z)
        })
        .collect()
}

/// Worst relative Vieta mismatch (sum, log-product) over certified zero sets.
pub fn vieta_worst(params: &[(CPoint, usize)]) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for &(a, n) in params {
        let fa = FamilyParameter::new(a).map_err(|e| e.to_string())?;
        let p = fa.polynomial(n);
        let mu = bessel_zeros(&p).map_err(|e| e.to_string())?;
        let sum: CPoint = mu.points().iter().sum();
        worst = worst.max((sum - p.zero_sum()).norm() / p.zero_sum().norm());
        let log_prod: CPoint = mu.points().iter().map(|z| z.ln()).sum();
        let d = log_prod - p.log_zero_product();
        let wrapped = d.im - (d.im / TAU).round() * TAU;
        // |Π z − P|/|P| ≈ |log Π z − log P| for small mismatch.
        worst = worst.max(CPoint::new(d.re, wrapped).norm());
    }
    Ok(worst)
}

pub const VIETA_PARAMS: [(f64, f64); 3] = [(3.0, 0.0), (-2.0, 2.0), (-1.0, 0.1)];
pub const VIETA_DEGREES: [usize; 3] = [10, 40, 80];

pub fn bessel(samples: usize, seed: u64) -> Vec<CheckRow> {
    let pts = identity_samples(samples, seed);
    let worst_of = |f: &dyn Fn(usize, CPoint, CPoint) -> f64| pts.iter().map(|&(n, a, z)| f(n, a, z)).fold(0.0, f64::max);
    let rec = worst_of(&|n, a, z| recurrence_residual(n, a, z).unwrap_or(f64::INFINITY));
    let ode = worst_of(&|n, a, z| BesselPolynomial::new(n, a).ode_residual(z).unwrap_or(f64::INFINITY));
    let lag = worst_of(&|n, a, z| laguerre_link_residual(n, a, z).unwrap_or(f64::INFINITY));
    let params: Vec<(CPoint, usize)> = VIETA_PARAMS
        .iter()
        .flat_map(|&(re, im)| VIETA_DEGREES.iter().map(move |&n| (CPoint::new(re, im), n)))
        .collect();
    let (vieta, detail) = match vieta_worst(&params) {
        Ok(w) => (w, format!("A ∈ {VIETA_PARAMS:?}, n ∈ {VIETA_DEGREES:?}")),
        Err(e) => (f64::INFINITY, e),
    };
    vec![
        row("Bessel recurrence (B_{n+1})", samples, rec, IDENTITY_TOL, "n ≤ 25".into()),
        row("Bessel ODE", samples, ode, IDENTITY_TOL, "n ≤ 25".into()),
        row("Laguerre link", samples, lag, IDENTITY_TOL, "n ≤ 25".into()),
        row("Vieta sum/product", params.len(), vieta, VIETA_TOL, detail),
    ]
}

pub fn run(suite: Suite, samples: Option<usize>, seed: u64) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    if matches!(suite, Suite::Periods | Suite::All) {
        rows.extend(periods(samples.unwrap_or(100), seed));
    }
    if matches!(suite, Suite::Gates | Suite::All) {
        rows.extend(gates(samples.unwrap_or(200), seed));
    }
    if matches!(suite, Suite::Bessel | Suite::All) {
        rows.extend(bessel(samples.unwrap_or(50), seed));
    }
    rows
}

pub fn format_table(rows: &[CheckRow]) -> String {
    let mut out = format!("{:<32} {:>8} {:>12} {:>12}  {:<6} {}\n", "check", "samples", "worst", "limit", "status", "detail");
    for r in rows {
        out.push_str(&format!(
            "{:<32} {:>8} {:>12.3e} {:>12.3e}  {:<6} {}\n",
            r.name,
            r.samples,
            r.worst,
            r.limit,
            if r.passed { "PASS" } else { "FAIL" },
            r.detail
        ));
    }
    out
}
