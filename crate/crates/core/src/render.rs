//! SVG scenes of critical graphs and zero overlays.
//!
//! The complex plane is mapped onto an 800×800 canvas with the imaginary axis
//! pointing up. Coordinates are printed with six decimals and curves are
//! clipped to the viewport, so identical scenes give identical bytes.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bessel::EmpiricalMeasure;
use crate::cxnum::CPoint;
use crate::quaddiff::{trace, CriticalGraph, QuadDiff, TraceConfig, TrajectoryKind, TrajectoryPath};

pub const CANVAS: f64 = 800.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("scene has no curves and no markers")]
    EmptyScene,
    #[error("non-finite viewport")]
    InvalidViewport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StyleClass {
    Short,
    Critical,
    Orthogonal,
    Background,
}

impl StyleClass {
    pub fn css(self) -> &'static str {
        match self {
            StyleClass::Short => "short",
            StyleClass::Critical => "critical",
            StyleClass::Orthogonal => "orthogonal",
            StyleClass::Background => "background",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkerKind {
    Zero,
    Pole,
    OverlayZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Viewport {
    Auto,
    Fixed { center: CPoint, half_width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub curves: Vec<(TrajectoryPath, StyleClass)>,
    pub markers: Vec<(CPoint, MarkerKind)>,
    pub viewport: Viewport,
}

impl Default for Scene {
    fn default() -> Self {
        Self { curves: Vec::new(), markers: Vec::new(), viewport: Viewport::Auto }
    }
}

impl Scene {
    /// Short trajectories, the remaining critical trajectories, both zeros and the pole.
    pub fn from_graph(graph: &CriticalGraph) -> Self {
        let mut scene = Scene::default();
        scene.add_graph(graph);
        scene
    }

    pub fn add_graph(&mut self, graph: &CriticalGraph) {
        let in_short: Vec<usize> = graph.short_trajectories.iter().flat_map(|s| s.sources.iter().copied()).collect();
        let style = match graph.kind {
            TrajectoryKind::Horizontal => StyleClass::Critical,
            TrajectoryKind::Vertical => StyleClass::Orthogonal,
        };
        for (i, t) in graph.trajectories.iter().enumerate() {
            if !in_short.contains(&i) {
                self.curves.push((t.trajectory.clone(), style));
            }
        }
        let short_style = match graph.kind {
            TrajectoryKind::Horizontal => StyleClass::Short,
            TrajectoryKind::Vertical => StyleClass::Orthogonal,
        };
        for s in &graph.short_trajectories {
            self.curves.push((s.trajectory.clone(), short_style));
        }
        self.add_critical_points(&graph.qd);
    }

    fn add_critical_points(&mut self, qd: &QuadDiff) {
        for (p, kind) in [(qd.a(), MarkerKind::Zero), (qd.b(), MarkerKind::Zero), (CPoint::new(0.0, 0.0), MarkerKind::Pole)] {
            if !self.markers.contains(&(p, kind)) {
                self.markers.push((p, kind));
            }
        }
    }

    pub fn add_overlay(&mut self, mu: &EmpiricalMeasure) {
        self.markers.extend(mu.points().iter().map(|&p| (p, MarkerKind::OverlayZero)));
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty() && self.markers.is_empty()
    }

    /// Center and half-width actually used for drawing.
    pub fn resolve_viewport(&self) -> Result<(CPoint, f64), RenderError> {
        let (center, half) = match self.viewport {
            Viewport::Fixed { center, half_width } => (center, half_width),
            Viewport::Auto => self.auto_viewport()?,
        };
        if !(center.re.is_finite() && center.im.is_finite() && half.is_finite() && half > 0.0) {
            return Err(RenderError::InvalidViewport);
        }
        Ok((center, half))
    }

    /// Square box holding every marker and at least 99% of the curve points, widened by 10%.
    fn auto_viewport(&self) -> Result<(CPoint, f64), RenderError> {
        if self.is_empty() {
            return Err(RenderError::EmptyScene);
        }
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for (t, _) in &self.curves {
            for p in t.points() {
                xs.push(p.re);
                ys.push(p.im);
            }
        }
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        // Dropping at most 0.25% per side and axis keeps ≥ 99% of the points.
        let drop = xs.len() / 400;
        let mut lo = CPoint::new(f64::INFINITY, f64::INFINITY);
        let mut hi = CPoint::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        if !xs.is_empty() {
            lo = CPoint::new(xs[drop], ys[drop]);
            hi = CPoint::new(xs[xs.len() - 1 - drop], ys[ys.len() - 1 - drop]);
        }
        for (p, _) in &self.markers {
            lo = CPoint::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = CPoint::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        let center = 0.5 * (lo + hi);
        let half = 0.5 * (hi.re - lo.re).max(hi.im - lo.im);
        let half = if half > 0.0 { 1.1 * half } else { 1.0 };
        Ok((center, half))
    }
}

struct Frame {
    origin: CPoint,
    half: f64,
}

impl Frame {
    fn to_canvas(&self, z: CPoint) -> (f64, f64) {
        let s = CANVAS / (2.0 * self.half);
        ((z.re - self.origin.re + self.half) * s, (self.origin.im + self.half - z.im) * s)
    }

    fn contains(&self, z: CPoint) -> bool {
        (z.re - self.origin.re).abs() <= self.half && (z.im - self.origin.im).abs() <= self.half
    }
}

/// Liang–Barsky clip of the segment p→q to the frame's square.
fn clip_segment(f: &Frame, p: CPoint, q: CPoint) -> Option<(CPoint, CPoint)> {
    let d = q - p;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let lo = f.origin - CPoint::new(f.half, f.half);
    let hi = f.origin + CPoint::new(f.half, f.half);
    for (pk, qk) in [(-d.re, p.re - lo.re), (d.re, hi.re - p.re), (-d.im, p.im - lo.im), (d.im, hi.im - p.im)] {
        if pk == 0.0 {
            if qk < 0.0 {
                return None;
            }
        } else {
            let r = qk / pk;
            if pk < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then(|| (p + d * t0, p + d * t1))
}

fn fmt(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn path_data(f: &Frame, pts: &[CPoint]) -> String {
    let mut d = String::new();
    let mut pen: Option<CPoint> = None;
    let emit = |d: &mut String, cmd: char, z: CPoint| {
        let (x, y) = f.to_canvas(z);
        if !d.is_empty() {
            d.push(' ');
        }
        let _ = write!(d, "{cmd}{},{}", fmt(x), fmt(y));
    };
    for w in pts.windows(2) {
        if let Some((s, e)) = clip_segment(f, w[0], w[1]) {
            if pen != Some(s) {
                emit(&mut d, 'M', s);
            }
            emit(&mut d, 'L', e);
            pen = Some(e);
        } else {
            pen = None;
        }
    }
    if pts.len() == 1 && f.contains(pts[0]) {
        emit(&mut d, 'M', pts[0]);
    }
    d
}

const STYLE: &str = ".trajectory{fill:none;stroke:#000;stroke-linejoin:round;stroke-linecap:round}\
.short{stroke-width:2.2}\
.critical{stroke-width:0.9}\
.orthogonal{stroke:#1f5fbf;stroke-width:0.9;stroke-dasharray:5 3}\
.background{stroke:#9a9a9a;stroke-width:0.4}\
.zero{fill:#c0392b}\
.pole{fill:none;stroke:#000;stroke-width:1.6}\
.overlay{fill:#1a7f37}";

/// Renders a scene as a standalone SVG 1.1 document.
pub fn render_svg(scene: &Scene) -> Result<Vec<u8>, RenderError> {
    if scene.is_empty() {
        return Err(RenderError::EmptyScene);
    }
    let (origin, half) = scene.resolve_viewport()?;
    let frame = Frame { origin, half };
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{c}\" height=\"{c}\" viewBox=\"0 0 {c} {c}\">",
        c = CANVAS
    );
    let _ = writeln!(
        out,
        "<desc>center {} {} half-width {}</desc>",
        fmt(origin.re),
        fmt(origin.im),
        fmt(half)
    );
    let _ = writeln!(out, "<style type=\"text/css\">{STYLE}</style>");
    let _ = writeln!(out, "<rect x=\"0\" y=\"0\" width=\"{c}\" height=\"{c}\" fill=\"#fff\"/>", c = CANVAS);
    for (t, style) in &scene.curves {
        let _ = writeln!(out, "<path class=\"trajectory {}\" d=\"{}\"/>", style.css(), path_data(&frame, t.points()));
    }
    for (p, kind) in &scene.markers {
        if !frame.contains(*p) {
            continue;
        }
        let (x, y) = frame.to_canvas(*p);
        match kind {
            MarkerKind::Zero => {
                let _ = writeln!(out, "<circle class=\"zero\" cx=\"{}\" cy=\"{}\" r=\"4.5\"/>", fmt(x), fmt(y));
            }
            MarkerKind::OverlayZero => {
                let _ = writeln!(out, "<circle class=\"overlay\" cx=\"{}\" cy=\"{}\" r=\"1.8\"/>", fmt(x), fmt(y));
            }
            MarkerKind::Pole => {
                let r = 6.0;
                let _ = writeln!(
                    out,
                    "<path class=\"pole\" d=\"M{},{} L{},{} M{},{} L{},{}\"/>",
                    fmt((x - r).max(0.0)),
                    fmt((y - r).max(0.0)),
                    fmt((x + r).min(CANVAS)),
                    fmt((y + r).min(CANVAS)),
                    fmt((x - r).max(0.0)),
                    fmt((y + r).min(CANVAS)),
                    fmt((x + r).min(CANVAS)),
                    fmt((y - r).max(0.0)),
                );
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out.into_bytes())
}

/// Non-critical trajectories through a `grid`×`grid` lattice of the viewport,
/// traced both ways for an arc length of a few viewport widths.
pub fn background_foliation(
    qd: &QuadDiff,
    kind: TrajectoryKind,
    center: CPoint,
    half_width: f64,
    grid: usize,
    cfg: &TraceConfig,
) -> Vec<TrajectoryPath> {
    let budget = 4.0 * half_width;
    let cfg = TraceConfig { max_steps: 20_000, ..*cfg };
    let starts: Vec<CPoint> = (0..grid * grid)
        .map(|k| {
            let (i, j) = ((k % grid) as f64, (k / grid) as f64);
            let g = grid as f64;
            center + CPoint::new(half_width * (2.0 * (i + 0.5) / g - 1.0), half_width * (2.0 * (j + 0.5) / g - 1.0))
        })
        .filter(|z| z.norm() > 1e-3 * half_width)
        .collect();
    starts
        .par_iter()
        .flat_map_iter(|&z| {
            [0.0, std::f64::consts::PI]
                .into_iter()
                .filter_map(move |dir| trace(qd, z, dir, kind, budget, &cfg).ok())
                .filter(|t| t.points().len() >= 2)
        })
        .collect()
}
