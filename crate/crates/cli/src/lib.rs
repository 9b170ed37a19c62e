//! The `qdflow` command line: critical graphs, the Bessel family, mother-body
//! checks, invariant suites and re-rendering of saved figures.

pub mod doc;
pub mod verify;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as CPoint;
use serde::Serialize;

use qdflow::bessel::{algebraic_residual_of, family_quaddiff, overlay_stats, BesselError, FamilyParameter};
use qdflow::motherbody::{AlgebraicEquation, MbError};
use qdflow::quaddiff::{
    critical_graph_of_kind, CriticalGraph, QdError, QuadDiff, TraceConfig, TrajectoryKind, DEFAULT_GATE_TOL,
};
use qdflow::render::{background_foliation, render_svg, RenderError};

use doc::{
    scene_of, DensityDoc, FamilyDoc, FamilyParams, FamilyVerification, FigureView, GraphDoc, GraphParams, GraphSection,
    MassesDoc, MotherBodyDoc, MotherBodyParams, OverlayDoc, ResidualSample, TrajectoryDoc, SCHEMA,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_PARAMS: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Number of sample points on the circle used by `family --verify`.
pub const VERIFY_POINTS: usize = 8;
/// Radius of that circle relative to max(|a|, |b|).
pub const VERIFY_RADIUS: f64 = 3.0;
/// Degree compared against its double when `--overlay-n` is absent.
pub const VERIFY_DEFAULT_N: usize = 20;

/// A failure carrying its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn params(message: impl Into<String>) -> Self {
        Self { code: EXIT_PARAMS, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self { code: EXIT_NUMERIC, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<QdError> for CliError {
    fn from(e: QdError) -> Self {
        match e {
            QdError::DegenerateParameters(_) => Self::params(e.to_string()),
            _ => Self::numeric(e.to_string()),
        }
    }
}

impl From<MbError> for CliError {
    fn from(e: MbError) -> Self {
        match e {
            MbError::ZeroCoefficient(_) | MbError::DegenerateDiscriminant(_) | MbError::OriginEvaluation => {
                Self::params(e.to_string())
            }
            MbError::QuadDiff(q) => q.into(),
            _ => Self::numeric(e.to_string()),
        }
    }
}

impl From<BesselError> for CliError {
    fn from(e: BesselError) -> Self {
        match e {
            BesselError::DegenerateParameter(_) | BesselError::DegreeTooSmall(_) => Self::params(e.to_string()),
            BesselError::QuadDiff(q) => q.into(),
            BesselError::MotherBody(m) => m.into(),
            _ => Self::numeric(e.to_string()),
        }
    }
}

impl From<RenderError> for CliError {
    fn from(e: RenderError) -> Self {
        Self::numeric(e.to_string())
    }
}

/// Parses `RE,IM`.
pub fn parse_complex(s: &str) -> Result<CPoint, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected RE,IM, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    let z = CPoint::new(num(re)?, num(im)?);
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(format!("non-finite value {s:?}"));
    }
    Ok(z)
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Parser)]
#[command(name = "qdflow", version, about = "Critical graphs of λ²(z−a)(z−b)/z⁴ dz² and Bessel zero asymptotics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace the critical graph of one quadratic differential.
    Graph(GraphArgs),
    /// The quadratic differential of the generalized Bessel family, with optional zero overlay.
    Family(FamilyArgs),
    /// Mass candidates and densities for z²C² − (pz+q)C + r = 0.
    Motherbody(MotherBodyArgs),
    /// Run the seeded invariant suites.
    Verify(VerifyArgs),
    /// Re-render a saved JSON document.
    Render(RenderArgs),
}

/// Tracing and output flags shared by the figure commands.
#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    /// Arc-length budget per trajectory [default: scales with R_max].
    #[arg(long, value_parser = parse_positive)]
    pub budget: Option<f64>,
    /// Local error tolerance of the tracer.
    #[arg(long = "tol", value_parser = parse_positive, default_value_t = TraceConfig::default().path_tol)]
    pub path_tol: f64,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// JSON output; standard output when absent.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

impl TraceArgs {
    fn config(&self) -> TraceConfig {
        TraceConfig { path_tol: self.path_tol, ..TraceConfig::default() }
    }

    fn budget(&self, qd: &QuadDiff) -> f64 {
        self.budget.unwrap_or_else(|| self.config().default_budget(qd))
    }
}

#[derive(Debug, Clone, Args)]
#[command(group(clap::ArgGroup::new("scale").required(true).args(["lambda", "lambda2"])))]
pub struct GraphArgs {
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda: Option<CPoint>,
    /// λ² instead of λ; the principal root is used.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda2: Option<CPoint>,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub a: CPoint,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub b: CPoint,
    #[arg(long, value_parser = parse_positive, default_value_t = DEFAULT_GATE_TOL)]
    pub gate_tol: f64,
    /// Also trace the vertical critical graph.
    #[arg(long)]
    pub orthogonal: bool,
    /// Draw non-critical trajectories through an N×N grid.
    #[arg(long, value_name = "N")]
    pub foliation: Option<usize>,
    #[command(flatten)]
    pub trace: TraceArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    #[arg(long = "A", value_parser = parse_complex, allow_hyphen_values = true)]
    pub a: CPoint,
    /// Overlay the zeros of B_n^{(An)} multiplied by n.
    #[arg(long, value_name = "N")]
    pub overlay_n: Option<usize>,
    /// Check that the algebraic residual drops from n to 2n.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub trace: TraceArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MotherBodyArgs {
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub p: CPoint,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub q: CPoint,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub r: CPoint,
    #[command(flatten)]
    pub trace: TraceArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: verify::Suite,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Samples per suite [default: 100 periods, 200 gates, 50 Bessel].
    #[arg(long)]
    pub samples: Option<usize>,
    /// Write the table as JSON as well.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub json: PathBuf,
    #[arg(long)]
    pub svg: PathBuf,
}

/// Output of a command: what to write and the exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Graph(a) => cmd_graph(&a),
        Command::Family(a) => cmd_family(&a),
        Command::Motherbody(a) => cmd_motherbody(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Render(a) => cmd_render(&a),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::params(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(doc: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(doc).map_err(|e| CliError::numeric(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes the JSON (file or stdout) and the SVG redrawn from the same data.
fn emit<T: Serialize>(doc: &T, trace: &TraceArgs, code: i32) -> Result<Outcome, CliError> {
    let json = to_json(doc)?;
    if let Some(svg) = &trace.svg {
        write_file(svg, &svg_from_json(&json)?)?;
    }
    let stdout = match &trace.json {
        Some(p) => {
            write_file(p, json.as_bytes())?;
            String::new()
        }
        None => json,
    };
    Ok(Outcome { code, stdout })
}

/// SVG of any figure document.
pub fn svg_from_json(json: &str) -> Result<Vec<u8>, CliError> {
    let view: FigureView = serde_json::from_str(json).map_err(|e| CliError::params(format!("invalid document: {e}")))?;
    if view.schema != SCHEMA {
        return Err(CliError::params(format!("unsupported schema {:?}, expected {SCHEMA:?}", view.schema)));
    }
    let scene = scene_of(&view.graph, view.overlay.as_ref()).map_err(CliError::params)?;
    Ok(render_svg(&scene)?)
}

fn trace_graph(qd: &QuadDiff, trace: &TraceArgs, kind: TrajectoryKind) -> Result<CriticalGraph, CliError> {
    Ok(critical_graph_of_kind(qd, kind, trace.budget(qd), &trace.config())?)
}

pub fn cmd_graph(args: &GraphArgs) -> Result<Outcome, CliError> {
    let qd = match (args.lambda, args.lambda2) {
        (Some(l), None) => QuadDiff::new(l, args.a, args.b)?,
        (None, Some(l2)) => QuadDiff::from_lambda_squared(l2, args.a, args.b)?,
        _ => return Err(CliError::params("exactly one of --lambda and --lambda2 is required")),
    };
    let mut graph = trace_graph(&qd, &args.trace, TrajectoryKind::Horizontal)?;
    graph.gate = qd.short_trajectory_exists(args.gate_tol);
    let mut section = GraphSection::new(&graph);
    if args.orthogonal {
        section.add_orthogonal(&trace_graph(&qd, &args.trace, TrajectoryKind::Vertical)?);
    }
    if let Some(grid) = args.foliation.filter(|&g| g > 0) {
        let (center, half_width) = scene_of(&section, None).map_err(CliError::numeric)?.resolve_viewport()?;
        section.background = background_foliation(&qd, TrajectoryKind::Horizontal, center, half_width, grid, &args.trace.config())
            .iter()
            .map(|t| TrajectoryDoc::from_path(t, None, None, false))
            .collect();
    }
    let doc = GraphDoc {
        schema: SCHEMA.into(),
        command: "graph".into(),
        params: GraphParams {
            lambda: args.lambda,
            lambda2: args.lambda2,
            a: args.a,
            b: args.b,
            budget: args.trace.budget(&qd),
            path_tol: args.trace.path_tol,
            gate_tol: args.gate_tol,
        },
        graph: section,
    };
    emit(&doc, &args.trace, EXIT_OK)
}

/// Algebraic residuals of the rescaled zeros for n and 2n on a circle around the support.
pub fn family_verification(fa: FamilyParameter, qd: &QuadDiff, n: usize) -> Result<FamilyVerification, CliError> {
    let radius = VERIFY_RADIUS * qd.a().norm().max(qd.b().norm());
    let mu_n = fa.scaled_zeros(n)?;
    let mu_2n = fa.scaled_zeros(2 * n)?;
    let samples = (0..VERIFY_POINTS)
        .map(|k| {
            let z = CPoint::from_polar(radius, std::f64::consts::TAU * (k as f64 + 0.5) / VERIFY_POINTS as f64);
            Ok(ResidualSample {
                z,
                residual_n: algebraic_residual_of(fa, &mu_n, z)?,
                residual_2n: algebraic_residual_of(fa, &mu_2n, z)?,
            })
        })
        .collect::<Result<Vec<_>, BesselError>>()?;
    let decreasing = samples.iter().all(|s| s.residual_2n < s.residual_n);
    Ok(FamilyVerification { n, samples, decreasing })
}

pub fn cmd_family(args: &FamilyArgs) -> Result<Outcome, CliError> {
    let fa = FamilyParameter::new(args.a)?;
    let qd = family_quaddiff(fa)?;
    let graph = trace_graph(&qd, &args.trace, TrajectoryKind::Horizontal)?;
    let masses = fa.equation().masses();
    let overlay = match args.overlay_n {
        Some(n) => {
            if graph.short_trajectories.is_empty() {
                return Err(BesselError::NoShortTrajectory.into());
            }
            let mu = fa.scaled_zeros(n)?;
            let curves: Vec<&[CPoint]> = graph.short_trajectories.iter().map(|s| s.trajectory.points()).collect();
            let stats = overlay_stats(&mu, &curves);
            Some(OverlayDoc {
                n,
                alpha: fa.value() * n as f64,
                zeros: mu.points().to_vec(),
                max_dist: stats.max_dist,
                mean_dist: stats.mean_dist,
                diameter: stats.diameter,
            })
        }
        None => None,
    };
    let verification = if args.verify {
        Some(family_verification(fa, &qd, args.overlay_n.unwrap_or(VERIFY_DEFAULT_N))?)
    } else {
        None
    };
    let code = match &verification {
        Some(v) if !v.decreasing => EXIT_VERIFY,
        _ => EXIT_OK,
    };
    let doc = FamilyDoc {
        schema: SCHEMA.into(),
        command: "family".into(),
        params: FamilyParams {
            a: args.a,
            overlay_n: args.overlay_n,
            verify: args.verify,
            budget: args.trace.budget(&qd),
            path_tol: args.trace.path_tol,
        },
        masses: MassesDoc { plus: masses.m_plus, minus: masses.m_minus },
        graph: GraphSection::new(&graph),
        overlay,
        verification,
    };
    emit(&doc, &args.trace, code)
}

pub fn cmd_motherbody(args: &MotherBodyArgs) -> Result<Outcome, CliError> {
    let eq = AlgebraicEquation::new(args.p, args.q, args.r)?;
    let qd = eq.to_quaddiff()?;
    let graph = trace_graph(&qd, &args.trace, TrajectoryKind::Horizontal)?;
    let masses = eq.masses();
    let densities = graph
        .short_trajectories
        .iter()
        .enumerate()
        .map(|(i, s)| match eq.density_along(&s.trajectory) {
            Ok(d) => DensityDoc { short_index: i, total_mass: Some(d.total_mass), max_imaginary: Some(d.max_imaginary), note: None },
            Err(e) => DensityDoc { short_index: i, total_mass: None, max_imaginary: None, note: Some(e.to_string()) },
        })
        .collect();
    let doc = MotherBodyDoc {
        schema: SCHEMA.into(),
        command: "motherbody".into(),
        params: MotherBodyParams { p: args.p, q: args.q, r: args.r },
        masses: MassesDoc { plus: masses.m_plus, minus: masses.m_minus },
        real_mass_exists: masses.real_mass_exists,
        densities,
        graph: GraphSection::new(&graph),
    };
    emit(&doc, &args.trace, EXIT_OK)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let rows = verify::run(args.suite, args.samples, args.seed);
    if let Some(p) = &args.json {
        write_file(p, to_json(&rows)?.as_bytes())?;
    }
    let code = if rows.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_VERIFY };
    Ok(Outcome { code, stdout: verify::format_table(&rows) })
}

pub fn cmd_render(args: &RenderArgs) -> Result<Outcome, CliError> {
    let json = std::fs::read_to_string(&args.json)
        .map_err(|e| CliError::params(format!("cannot read {}: {e}", args.json.display())))?;
    write_file(&args.svg, &svg_from_json(&json)?)?;
    Ok(Outcome { code: EXIT_OK, stdout: String::new() })
}

/// Caps the rayon pool at `QDFLOW_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("QDFLOW_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| CliError::params(format!("QDFLOW_THREADS must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(CliError::params("QDFLOW_THREADS must be positive"));
    }
    // A pool that is already built keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `argv`, runs the command and prints its output; returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARAMS } else { EXIT_OK };
        }
    };
    let result = configure_threads().and_then(|_| run(cli));
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.stdout.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return EXIT_PARAMS;
            }
            out.code
        }
        Err(e) => {
            eprintln!("qdflow: {e}");
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_pairs() {
        assert_eq!(parse_complex("-2,-1").unwrap(), CPoint::new(-2.0, -1.0));
        assert_eq!(parse_complex(" 1.5 , 0 ").unwrap(), CPoint::new(1.5, 0.0));
        assert!(parse_complex("1").is_err());
        assert!(parse_complex("1,x").is_err());
        assert!(parse_complex("inf,0").is_err());
    }

    #[test]
    fn hyphenated_values_parse() {
        let cli = Cli::try_parse_from(["qdflow", "graph", "--lambda2", "-2,-1", "--a", "1,-1", "--b", "0,1"]).unwrap();
        let Command::Graph(g) = cli.command else { panic!() };
        assert_eq!(g.lambda2, Some(CPoint::new(-2.0, -1.0)));
        assert!(g.lambda.is_none());
    }

    #[test]
    fn lambda_flags_are_exclusive_and_required() {
        let both = ["qdflow", "graph", "--lambda", "1,0", "--lambda2", "1,0", "--a", "1,0", "--b", "2,0"];
        assert!(Cli::try_parse_from(both).is_err());
        assert!(Cli::try_parse_from(["qdflow", "graph", "--a", "1,0", "--b", "2,0"]).is_err());
    }

    #[test]
    fn error_codes() {
        let degenerate = QuadDiff::new(CPoint::new(1.0, 0.0), CPoint::new(1.0, 0.0), CPoint::new(1.0, 0.0)).unwrap_err();
        assert_eq!(CliError::from(degenerate).code, EXIT_PARAMS);
        let bad_a = FamilyParameter::new(CPoint::new(-1.0, 0.0)).unwrap_err();
        assert_eq!(CliError::from(bad_a).code, EXIT_PARAMS);
        assert_eq!(CliError::from(BesselError::NoShortTrajectory).code, EXIT_NUMERIC);
    }
}
