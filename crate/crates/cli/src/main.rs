//! `viewplan`: plan a minimal set of camera views around an object mesh.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use viewplan_core::beta_search::max_feasible_beta_with;
use viewplan_core::beta_search::BetaSearchOptions;
use viewplan_core::cover::{filter_points, CoverStatus, SolverMode};
use viewplan_core::path::{plan_path, safety_detour, DetouredPath, PathPlan};
use viewplan_core::pipeline::{
    evaluate_coverage, prepare_scene, random_scene, run_plan, BetaReport, CoverageSummary, MeshSource, PipelineConfig,
    PlanMethod, SelectionReport, SyntheticShape, PLAN_SCHEMA_VERSION,
};
use viewplan_core::view_space::{PoseRecord, ViewSpace, ViewSpaceFile};
use viewplan_core::visibility::VisibilityMatrix;

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "viewplan", version, about = "One-shot view planning for object reconstruction")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

/// Config file plus per-field overrides, shared by every subcommand.
#[derive(Args)]
struct Overrides {
    /// JSON config file; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Mesh file (.obj or ASCII .ply).
    #[arg(long, global = true, conflicts_with = "shape")]
    mesh: Option<PathBuf>,
    /// Built-in object instead of a mesh file.
    #[arg(long, global = true, value_parser = parse_shape)]
    shape: Option<SyntheticShape>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    alpha: Option<u32>,
    #[arg(long, global = true)]
    beta_resolution: Option<f64>,
    #[arg(long, global = true, value_parser = parse_solver)]
    solver: Option<SolverMode>,
    /// Number of candidate views.
    #[arg(long, global = true)]
    views: Option<usize>,
    /// Voxels per axis.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    initial_view: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline; writes plan.json.
    Plan,
    /// Visibility only; writes visibility.bin, views.json and visibility.json.
    Visibility,
    /// Cover from a saved matrix; writes solution.json.
    Solve {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long = "view-space")]
        view_space: PathBuf,
    },
    /// Path through a saved selection; writes path.json.
    Path {
        #[arg(long = "view-space")]
        view_space: PathBuf,
        /// Any report with a `selection.view_ids` field.
        #[arg(long)]
        selection: PathBuf,
    },
    /// Random baseline; writes random.json.
    Random {
        /// Number of views to draw.
        #[arg(long)]
        count: usize,
    },
    /// Coverage of a selection; writes coverage.json.
    Eval {
        #[arg(long)]
        matrix: PathBuf,
        /// Any report with a `selection.view_ids` field.
        #[arg(long, conflicts_with = "ids")]
        selection: Option<PathBuf>,
        /// Comma-separated view ids.
        #[arg(long, value_delimiter = ',')]
        ids: Vec<usize>,
    },
}

fn parse_shape(s: &str) -> Result<SyntheticShape, String> {
    serde_json::from_value(json!(s)).map_err(|_| format!("unknown shape {s:?}; expected sphere, box or l-shape"))
}

fn parse_solver(s: &str) -> Result<SolverMode, String> {
    serde_json::from_value(json!(s)).map_err(|_| format!("unknown solver {s:?}; expected exact or greedy"))
}

impl Overrides {
    fn config(&self) -> anyhow::Result<PipelineConfig> {
        let mut c: PipelineConfig = match &self.config {
            Some(p) => read_json(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(m) = &self.mesh {
            c.mesh = MeshSource::Path(m.clone());
        }
        if let Some(s) = self.shape {
            c.mesh = MeshSource::Synthetic(s);
        }
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field { c.$target = v; })*
            };
        }
        set!(seed => seed, alpha => alpha, beta_resolution => beta_resolution, solver => solver,
             views => view_count, grid => grid_dims, samples => sample_count, initial_view => initial_view);
        c.validate()?;
        Ok(c)
    }
}

/// Marks errors that come from the caller's files rather than from planning.
#[derive(Debug)]
struct InputError;

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("input error")
    }
}

impl std::error::Error for InputError {}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path)
        .map_err(anyhow::Error::from)
        .context(InputError)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(anyhow::Error::from)
        .context(InputError)
        .with_context(|| format!("parsing {}", path.display()))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn read_space(path: &Path) -> anyhow::Result<ViewSpace> {
    let file: ViewSpaceFile = read_json(path)?;
    Ok(ViewSpace::try_from(&file)?)
}

fn read_matrix(path: &Path) -> anyhow::Result<VisibilityMatrix> {
    let f = fs::File::open(path)
        .map_err(anyhow::Error::from)
        .context(InputError)
        .with_context(|| format!("opening {}", path.display()))?;
    Ok(VisibilityMatrix::read_binary(std::io::BufReader::new(f))?)
}

#[derive(Deserialize)]
struct HasSelection {
    selection: SelectionIds,
}

#[derive(Deserialize)]
struct SelectionIds {
    view_ids: Vec<usize>,
}

/// Output of `solve`.
#[derive(Serialize)]
struct SolveReport {
    schema_version: u32,
    alpha: u32,
    dropped_points: usize,
    beta: BetaReport,
    selection: SelectionReport,
    coverage: CoverageSummary,
}

/// Output of `path`.
#[derive(Serialize)]
struct PathOutput {
    schema_version: u32,
    plan: PathPlan,
    poses: Vec<PoseRecord>,
    detour: DetouredPath,
}

fn poses(space: &ViewSpace, ids: &[usize]) -> Vec<PoseRecord> {
    ids.iter().map(|&v| PoseRecord::from(&space.views()[v])).collect()
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let config = cli.overrides.config()?;
    let out = &cli.overrides.out;
    match &cli.command {
        Command::Plan => {
            let report = run_plan(&config)?;
            let path = write_json(out, "plan.json", &report)?;
            println!(
                "{} views, beta* = {}, path {:.3} m -> {}",
                report.selection.objective,
                report.beta.as_ref().map_or(0.0, |b| b.beta_star),
                report.path.movement_cost,
                path.display()
            );
            Ok(if report.budget_exhausted() { EXIT_BUDGET } else { 0 })
        }
        Command::Visibility => {
            let scene = prepare_scene(&config)?;
            fs::create_dir_all(out)?;
            let bin = out.join("visibility.bin");
            let f = fs::File::create(&bin).with_context(|| format!("writing {}", bin.display()))?;
            scene.visibility.write_binary(BufWriter::new(f))?;
            write_json(out, "views.json", &ViewSpaceFile::from(&scene.space))?;
            write_json(out, "visibility.json", &scene.visibility.summary())?;
            println!(
                "{} views x {} points -> {}",
                scene.visibility.view_count(),
                scene.visibility.point_count(),
                bin.display()
            );
            Ok(0)
        }
        Command::Solve { matrix, view_space } => {
            let vis = read_matrix(matrix)?;
            let space = read_space(view_space)?;
            let (retained, dropped) = filter_points(&vis, config.alpha);
            if retained.is_empty() {
                return Err(viewplan_core::Error::NoCoverablePoints { alpha: config.alpha }.into());
            }
            let opts = BetaSearchOptions {
                rule: config.conflict_rule,
                node_budget: config.node_budget,
                solver: config.solver,
            };
            let search = max_feasible_beta_with(&vis, &space, config.alpha, config.beta_resolution, opts)?;
            let ids = search.solution.selected_views();
            let report = SolveReport {
                schema_version: PLAN_SCHEMA_VERSION,
                alpha: config.alpha,
                dropped_points: dropped.len(),
                coverage: evaluate_coverage(&vis, &ids, config.alpha)?,
                selection: SelectionReport {
                    method: PlanMethod::Optimized,
                    status: Some(search.solution.status),
                    objective: search.solution.objective,
                    bound: search.solution.bound,
                    nodes: search.solution.nodes,
                    poses: poses(&space, &ids),
                    view_ids: ids,
                },
                beta: BetaReport {
                    beta_star: search.beta_star,
                    resolution: search.resolution,
                    ceiling_index: search.ceiling_index,
                    hit_ceiling: search.hit_ceiling,
                    probes: search.probes,
                },
            };
            let path = write_json(out, "solution.json", &report)?;
            println!("{} views, beta* = {} -> {}", report.selection.objective, report.beta.beta_star, path.display());
            let exhausted = config.solver == SolverMode::Exact && search.solution.status == CoverStatus::FeasibleHeuristic;
            Ok(if exhausted { EXIT_BUDGET } else { 0 })
        }
        Command::Path { view_space, selection } => {
            let space = read_space(view_space)?;
            let sel: HasSelection = read_json(selection)?;
            let plan = plan_path(&space, &sel.selection.view_ids, config.initial_view)?;
            let detour = safety_detour(&space, &plan, config.safety_radius)?;
            let output = PathOutput {
                schema_version: PLAN_SCHEMA_VERSION,
                poses: poses(&space, &plan.order),
                plan,
                detour,
            };
            let path = write_json(out, "path.json", &output)?;
            println!("{} stops, {:.3} m -> {}", output.plan.order.len(), output.plan.total_cost, path.display());
            Ok(0)
        }
        Command::Random { count } => {
            let scene = prepare_scene(&config)?;
            let report = random_scene(&config, &scene, *count, config.seed)?;
            let path = write_json(out, "random.json", &report)?;
            println!(
                "{} random views, min coverage {} -> {}",
                report.selection.objective,
                report.coverage.min,
                path.display()
            );
            Ok(0)
        }
        Command::Eval { matrix, selection, ids } => {
            let vis = read_matrix(matrix)?;
            let ids = match selection {
                Some(p) => read_json::<HasSelection>(p)?.selection.view_ids,
                None if !ids.is_empty() => ids.clone(),
                None => bail!(InputError),
            };
            let summary = evaluate_coverage(&vis, &ids, config.alpha)?;
            let path = write_json(out, "coverage.json", &summary)?;
            println!(
                "min {} mean {:.2} meeting alpha {:.4} -> {}",
                summary.min,
                summary.mean,
                summary.fraction_meeting_alpha,
                path.display()
            );
            Ok(0)
        }
    }
}

/// Exit code and machine-readable kind for a failure.
fn classify(err: &anyhow::Error) -> (u8, &'static str) {
    if let Some(e) = err.downcast_ref::<viewplan_core::Error>() {
        if e.is_infeasible() {
            return (EXIT_INFEASIBLE, "infeasible");
        }
        if e.is_input_error() {
            return (EXIT_INPUT, "input");
        }
        return (1, "internal");
    }
    if err.downcast_ref::<InputError>().is_some() {
        return (EXIT_INPUT, "input");
    }
    (1, "internal")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let (code, kind) = classify(&err);
            let body = json!({ "error": { "kind": kind, "exit_code": code, "message": format!("{err:#}") } });
            println!("{body}");
            ExitCode::from(code)
        }
    }
}
