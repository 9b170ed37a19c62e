//! JSON documents written by the subcommands (schema `qdflow/1`).
//!
//! Every document carries the traced figure, so `qdflow render` can rebuild
//! the SVG from the JSON alone.

use num_complex::Complex64 as CPoint;
use serde::{Deserialize, Serialize};

use qdflow::bessel::EmpiricalMeasure;
use qdflow::cxnum::Path;
use qdflow::quaddiff::{
    Branch, CriticalGraph, EndpointClass, GateBranch, LaunchData, QuadDiff, TrajectoryKind, TrajectoryPath, ZeroId,
};
use qdflow::render::{MarkerKind, Scene, StyleClass};

pub const SCHEMA: &str = "qdflow/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadDiffDoc {
    pub lambda: CPoint,
    pub a: CPoint,
    pub b: CPoint,
}

impl From<&QuadDiff> for QuadDiffDoc {
    fn from(qd: &QuadDiff) -> Self {
        Self { lambda: qd.lambda(), a: qd.a(), b: qd.b() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateDoc {
    pub v_plus: CPoint,
    pub v_minus: CPoint,
    pub exists: bool,
    pub branch: GateBranch,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodsDoc {
    pub plus: CPoint,
    pub minus: CPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDoc {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub zero: Option<ZeroId>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub index: Option<usize>,
    pub kind: TrajectoryKind,
    pub launch: LaunchData,
    pub endpoint_class: EndpointClass,
    pub arc_length: f64,
    pub steps: usize,
    /// Part of a short trajectory listed separately.
    #[serde(default)]
    pub in_short: bool,
    pub points: Vec<CPoint>,
}

impl TrajectoryDoc {
    pub fn from_path(t: &TrajectoryPath, zero: Option<ZeroId>, index: Option<usize>, in_short: bool) -> Self {
        Self {
            zero,
            index,
            kind: t.kind,
            launch: t.launch,
            endpoint_class: t.endpoint.clone(),
            arc_length: t.arc_length,
            steps: t.steps,
            in_short,
            points: t.points().to_vec(),
        }
    }

    pub fn to_path(&self) -> Result<TrajectoryPath, String> {
        let path = Path::new(self.points.clone(), false).map_err(|e| e.to_string())?;
        Ok(TrajectoryPath {
            path,
            kind: self.kind,
            launch: self.launch,
            endpoint: self.endpoint_class.clone(),
            arc_length: self.arc_length,
            steps: self.steps,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortDoc {
    /// Indices into `trajectories` of the traced halves.
    pub sources: Vec<usize>,
    pub integral: CPoint,
    pub branch: Option<Branch>,
    pub loop_at: Option<ZeroId>,
    pub trajectory: TrajectoryDoc,
}

/// The traced critical graph shared by all figure-producing commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSection {
    pub quaddiff: QuadDiffDoc,
    pub gate: GateDoc,
    pub periods: PeriodsDoc,
    pub trajectories: Vec<TrajectoryDoc>,
    pub short_trajectories: Vec<ShortDoc>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub orthogonal: Vec<TrajectoryDoc>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub background: Vec<TrajectoryDoc>,
    pub warnings: Vec<String>,
}

impl GraphSection {
    pub fn new(graph: &CriticalGraph) -> Self {
        let qd = &graph.qd;
        let in_short: Vec<usize> = graph.short_trajectories.iter().flat_map(|s| s.sources.iter().copied()).collect();
        let trajectories = graph
            .trajectories
            .iter()
            .enumerate()
            .map(|(i, t)| TrajectoryDoc::from_path(&t.trajectory, Some(t.zero), Some(t.index), in_short.contains(&i)))
            .collect();
        let short_trajectories = graph
            .short_trajectories
            .iter()
            .map(|s| ShortDoc {
                sources: s.sources.clone(),
                integral: s.integral,
                branch: s.branch,
                loop_at: s.loop_at,
                trajectory: TrajectoryDoc::from_path(&s.trajectory, None, None, false),
            })
            .collect();
        let g = qd.gate_values();
        Self {
            quaddiff: qd.into(),
            gate: GateDoc {
                v_plus: g.v_plus,
                v_minus: g.v_minus,
                exists: graph.gate.exists,
                branch: graph.gate.branch,
                margin: qd.gate_margin(),
            },
            periods: PeriodsDoc { plus: qd.period(Branch::Plus), minus: qd.period(Branch::Minus) },
            trajectories,
            short_trajectories,
            orthogonal: Vec::new(),
            background: Vec::new(),
            warnings: graph.warnings.clone(),
        }
    }

    pub fn add_orthogonal(&mut self, graph: &CriticalGraph) {
        let in_short: Vec<usize> = graph.short_trajectories.iter().flat_map(|s| s.sources.iter().copied()).collect();
        for (i, t) in graph.trajectories.iter().enumerate() {
            if !in_short.contains(&i) {
                self.orthogonal.push(TrajectoryDoc::from_path(&t.trajectory, Some(t.zero), Some(t.index), false));
            }
        }
        for s in &graph.short_trajectories {
            self.orthogonal.push(TrajectoryDoc::from_path(&s.trajectory, None, None, false));
        }
        self.warnings.extend(graph.warnings.iter().map(|w| format!("orthogonal: {w}")));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayDoc {
    pub n: usize,
    pub alpha: CPoint,
    /// Zeros of B_n^{(An)} multiplied by n.
    pub zeros: Vec<CPoint>,
    pub max_dist: f64,
    pub mean_dist: f64,
    pub diameter: f64,
}

/// Fields every figure document shares; enough to redraw it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureView {
    pub schema: String,
    #[serde(flatten)]
    pub graph: GraphSection,
    #[serde(default)]
    pub overlay: Option<OverlayDoc>,
}

/// Scene for a figure: background, orthogonal, critical and short curves
/// in that order, then zeros, the pole and overlay points.
pub fn scene_of(graph: &GraphSection, overlay: Option<&OverlayDoc>) -> Result<Scene, String> {
    let mut scene = Scene::default();
    for t in &graph.background {
        scene.curves.push((t.to_path()?, StyleClass::Background));
    }
    for t in &graph.orthogonal {
        scene.curves.push((t.to_path()?, StyleClass::Orthogonal));
    }
    for t in graph.trajectories.iter().filter(|t| !t.in_short) {
        let style = match t.kind {
            TrajectoryKind::Horizontal => StyleClass::Critical,
            TrajectoryKind::Vertical => StyleClass::Orthogonal,
        };
        scene.curves.push((t.to_path()?, style));
    }
    for s in &graph.short_trajectories {
        scene.curves.push((s.trajectory.to_path()?, StyleClass::Short));
    }
    scene.markers.push((graph.quaddiff.a, MarkerKind::Zero));
    scene.markers.push((graph.quaddiff.b, MarkerKind::Zero));
    scene.markers.push((CPoint::new(0.0, 0.0), MarkerKind::Pole));
    if let Some(o) = overlay {
        scene.add_overlay(&EmpiricalMeasure::new(o.zeros.clone()));
    }
    Ok(scene)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<CPoint>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda2: Option<CPoint>,
    pub a: CPoint,
    pub b: CPoint,
    pub budget: f64,
    pub path_tol: f64,
    pub gate_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub schema: String,
    pub command: String,
    pub params: GraphParams,
    #[serde(flatten)]
    pub graph: GraphSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    #[serde(rename = "A")]
    pub a: CPoint,
    pub overlay_n: Option<usize>,
    pub verify: bool,
    pub budget: f64,
    pub path_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub z: CPoint,
    pub residual_n: f64,
    pub residual_2n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyVerification {
    pub n: usize,
    pub samples: Vec<ResidualSample>,
    pub decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassesDoc {
    pub plus: CPoint,
    pub minus: CPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDoc {
    pub schema: String,
    pub command: String,
    pub params: FamilyParams,
    /// Mass pair of the algebraic equation {1, −(A+1)}.
    pub masses: MassesDoc,
    #[serde(flatten)]
    pub graph: GraphSection,
    pub overlay: Option<OverlayDoc>,
    pub verification: Option<FamilyVerification>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotherBodyParams {
    pub p: CPoint,
    pub q: CPoint,
    pub r: CPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityDoc {
    /// Index into `graph.short_trajectories`.
    pub short_index: usize,
    pub total_mass: Option<f64>,
    pub max_imaginary: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotherBodyDoc {
    pub schema: String,
    pub command: String,
    pub params: MotherBodyParams,
    pub masses: MassesDoc,
    pub real_mass_exists: bool,
    pub densities: Vec<DensityDoc>,
    #[serde(flatten)]
    pub graph: GraphSection,
}
