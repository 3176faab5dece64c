//! End-to-end planning: mesh to selected views to path, plus the random
//! baseline and coverage evaluation.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beta_search::{max_feasible_beta_with, BetaProbe, BetaSearchOptions};
use crate::bits::BitSet;
use crate::cover::{filter_points, ConflictRule, CoverStatus, SolverMode, DEFAULT_NODE_BUDGET};
use crate::geometry::{
    load_mesh, normalize_mesh, primitives, sample_surface_points, voxelize, Aabb, SurfacePointSet, TriangleMesh,
    VoxelGrid,
};
use crate::path::{plan_path, safety_detour, DetouredPath, PathPlan};
use crate::view_space::{generate_hemisphere_views, PoseRecord, ViewSpace};
use crate::visibility::{compute_visibility, CameraModel, VisibilityMatrix};
use crate::{Error, Point3, Result, Vector3};

pub const PLAN_SCHEMA_VERSION: u32 = 1;

/// Built-in test objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticShape {
    Sphere,
    Box,
    LShape,
}

impl SyntheticShape {
    pub const ALL: [SyntheticShape; 3] = [SyntheticShape::Sphere, SyntheticShape::Box, SyntheticShape::LShape];

    /// Unnormalized mesh centered at the origin.
    pub fn mesh(self) -> TriangleMesh {
        let c = Point3::origin();
        match self {
            SyntheticShape::Sphere => primitives::icosphere(c, 1.0, 4),
            SyntheticShape::Box => primitives::cuboid(c, Vector3::new(1.0, 0.6, 0.4)),
            SyntheticShape::LShape => primitives::l_shape(c, 1.0, 0.4),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshSource {
    Path(PathBuf),
    Synthetic(SyntheticShape),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub mesh: MeshSource,
    /// Bounding-sphere radius the mesh is scaled to, meters.
    pub object_radius: f64,
    /// Workspace center; the object and the view hemisphere share it.
    pub center: [f64; 3],
    pub view_count: usize,
    pub view_radius: f64,
    /// Voxels per axis over the object's bounding cube.
    pub grid_dims: usize,
    pub sample_count: usize,
    pub camera: CameraModel,
    /// Voxels within this Chebyshev distance of a target's voxel do not
    /// occlude it.
    pub occlusion_margin: usize,
    pub alpha: u32,
    pub beta_resolution: f64,
    pub conflict_rule: ConflictRule,
    pub solver: SolverMode,
    pub node_budget: u64,
    pub initial_view: usize,
    /// Radius of the keep-out sphere around the center; 0 disables detours.
    pub safety_radius: f64,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            mesh: MeshSource::Synthetic(SyntheticShape::Sphere),
            object_radius: 0.1,
            center: [0.0; 3],
            view_count: 144,
            view_radius: 0.3,
            grid_dims: 50,
            sample_count: 200_000,
            camera: CameraModel::default(),
            occlusion_margin: 2,
            alpha: 6,
            beta_resolution: 0.1,
            conflict_rule: ConflictRule::Symmetric,
            solver: SolverMode::Exact,
            node_budget: DEFAULT_NODE_BUDGET,
            initial_view: 0,
            safety_radius: 0.15,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.object_radius > 0.0 && self.object_radius.is_finite()) {
            return bad(format!("object_radius must be positive, got {}", self.object_radius));
        }
        if !(self.view_radius > self.object_radius && self.view_radius.is_finite()) {
            return bad(format!(
                "view_radius {} must exceed object_radius {}",
                self.view_radius, self.object_radius
            ));
        }
        if self.view_count < 2 {
            return bad(format!("view_count must be at least 2, got {}", self.view_count));
        }
        if self.grid_dims == 0 || self.sample_count == 0 {
            return bad("grid_dims and sample_count must be positive".into());
        }
        if self.alpha == 0 {
            return bad("alpha must be at least 1".into());
        }
        if !(self.beta_resolution > 0.0 && self.beta_resolution.is_finite()) {
            return bad(format!("beta_resolution must be positive, got {}", self.beta_resolution));
        }
        if self.node_budget == 0 {
            return bad("node_budget must be at least 1".into());
        }
        if self.initial_view >= self.view_count {
            return Err(Error::UnknownView {
                id: self.initial_view,
                count: self.view_count,
            });
        }
        if !(self.safety_radius >= 0.0 && self.safety_radius < self.view_radius) {
            return bad(format!(
                "safety_radius {} must be in [0, view_radius)",
                self.safety_radius
            ));
        }
        self.camera.validate()
    }

    pub fn center_point(&self) -> Point3 {
        Point3::from(self.center)
    }

    fn search_options(&self) -> BetaSearchOptions {
        BetaSearchOptions {
            rule: self.conflict_rule,
            node_budget: self.node_budget,
            solver: self.solver,
        }
    }
}

/// Everything up to and including the visibility matrix.
#[derive(Debug, Clone)]
pub struct Scene {
    pub mesh: TriangleMesh,
    pub grid: VoxelGrid,
    pub points: SurfacePointSet,
    pub space: ViewSpace,
    pub visibility: VisibilityMatrix,
}

/// Wall-clock seconds per stage. Kept apart from the deterministic fields.
pub type Timings = BTreeMap<String, f64>;

struct Clock {
    last: Instant,
    timings: Timings,
}

impl Clock {
    fn new() -> Self {
        Self {
            last: Instant::now(),
            timings: Timings::new(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.insert(stage.to_string(), (now - self.last).as_secs_f64());
        info!("{stage}: {:.3} s", (now - self.last).as_secs_f64());
        self.last = now;
    }
}

fn build_scene(config: &PipelineConfig, clock: &mut Clock) -> Result<Scene> {
    config.validate()?;
    let raw = match &config.mesh {
        MeshSource::Path(p) => load_mesh(p)?,
        MeshSource::Synthetic(s) => s.mesh(),
    };
    let center = config.center_point();
    let mesh = normalize_mesh(&raw, config.object_radius, center)?;
    clock.lap("mesh");
    let samples = sample_surface_points(&mesh, config.sample_count, config.seed)?;
    let bounds = Aabb::cube(center, config.object_radius);
    let (grid, points) = voxelize(&samples, &bounds, [config.grid_dims; 3])?;
    clock.lap("voxelize");
    let space = generate_hemisphere_views(config.view_count, center, config.view_radius)?;
    let visibility = compute_visibility(&grid, &points, &space, &config.camera, config.occlusion_margin)?;
    clock.lap("visibility");
    Ok(Scene {
        mesh,
        grid,
        points,
        space,
        visibility,
    })
}

/// Loads, normalizes, samples and voxelizes the mesh, builds the view space
/// and computes visibility.
pub fn prepare_scene(config: &PipelineConfig) -> Result<Scene> {
    build_scene(config, &mut Clock::new())
}

/// Per-point coverage multiplicity of a selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub alpha: u32,
    pub selected_count: usize,
    pub total_points: usize,
    /// Points visible from at least `alpha` candidate views.
    pub retained_points: usize,
    /// `retained_points / total_points`.
    pub retained_fraction: f64,
    /// Minimum multiplicity over retained points (0 when none are retained).
    pub min: u32,
    pub mean: f64,
    /// `histogram[m]` = retained points observed by exactly `m` selected views.
    pub histogram: Vec<usize>,
    /// Fraction of retained points observed at least `alpha` times.
    pub fraction_meeting_alpha: f64,
}

/// Coverage of `selected` over the points that survive the `alpha` filter,
/// computed straight from the matrix.
pub fn evaluate_coverage(vis: &VisibilityMatrix, selected: &[usize], alpha: u32) -> Result<CoverageSummary> {
    for &v in selected {
        if v >= vis.view_count() {
            return Err(Error::UnknownView {
                id: v,
                count: vis.view_count(),
            });
        }
    }
    let mut mult = vec![0u32; vis.point_count()];
    let mut seen = BitSet::new(vis.view_count());
    for &v in selected {
        if seen.contains(v) {
            continue;
        }
        seen.insert(v);
        for p in vis.row(v).ones() {
            mult[p] += 1;
        }
    }
    let (retained, _) = filter_points(vis, alpha);
    let mut histogram = vec![0usize; seen.count_ones() + 1];
    let mut sum = 0u64;
    let mut meeting = 0usize;
    for &p in &retained {
        histogram[mult[p] as usize] += 1;
        sum += mult[p] as u64;
        meeting += (mult[p] >= alpha) as usize;
    }
    let n = retained.len();
    let ratio = |a: f64, b: usize| if b == 0 { 0.0 } else { a / b as f64 };
    Ok(CoverageSummary {
        alpha,
        selected_count: seen.count_ones(),
        total_points: vis.point_count(),
        retained_points: n,
        retained_fraction: ratio(n as f64, vis.point_count()),
        min: retained.iter().map(|&p| mult[p]).min().unwrap_or(0),
        mean: ratio(sum as f64, n),
        histogram,
        fraction_meeting_alpha: if n == 0 { 1.0 } else { meeting as f64 / n as f64 },
    })
}

/// True iff dropping any single view from `selected` leaves some retained
/// point under-covered.
pub fn is_minimal(vis: &VisibilityMatrix, selected: &[usize], alpha: u32) -> Result<bool> {
    for i in 0..selected.len() {
        let rest: Vec<usize> = selected.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
        if evaluate_coverage(vis, &rest, alpha)?.fraction_meeting_alpha >= 1.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanMethod {
    Optimized,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaReport {
    pub beta_star: f64,
    pub resolution: f64,
    pub ceiling_index: u64,
    pub hit_ceiling: bool,
    pub probes: Vec<BetaProbe>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub method: PlanMethod,
    /// Solver status; absent for the random baseline.
    pub status: Option<CoverStatus>,
    pub objective: usize,
    pub bound: Option<usize>,
    pub nodes: u64,
    pub view_ids: Vec<usize>,
    pub poses: Vec<PoseRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub plan: PathPlan,
    pub poses: Vec<PoseRecord>,
    pub detour: DetouredPath,
    /// Detoured length when any leg was detoured, else the straight cost.
    pub movement_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Independent coverage recount agrees with the solver's feasibility.
    pub coverage_matches_solver: bool,
    /// Single-view removal check; only run for proven optima.
    pub minimal: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub schema_version: u32,
    pub config: PipelineConfig,
    pub occupied_voxels: usize,
    pub dropped_points: usize,
    pub beta: Option<BetaReport>,
    pub selection: SelectionReport,
    pub path: PathReport,
    pub coverage: CoverageSummary,
    pub audit: AuditReport,
    pub timings: Timings,
}

impl PlanReport {
    /// Whether the exact search stopped at its node budget with only a
    /// heuristic answer.
    pub fn budget_exhausted(&self) -> bool {
        self.config.solver == SolverMode::Exact && self.selection.status == Some(CoverStatus::FeasibleHeuristic)
    }
}

fn poses(space: &ViewSpace, ids: &[usize]) -> Vec<PoseRecord> {
    ids.iter().map(|&v| PoseRecord::from(&space.views()[v])).collect()
}

fn path_report(space: &ViewSpace, selected: &[usize], config: &PipelineConfig) -> Result<PathReport> {
    let plan = plan_path(space, selected, config.initial_view)?;
    let detour = safety_detour(space, &plan, config.safety_radius)?;
    let movement_cost = if detour.detoured_legs > 0 {
        detour.length
    } else {
        plan.total_cost
    };
    Ok(PathReport {
        poses: poses(space, &plan.order),
        plan,
        detour,
        movement_cost,
    })
}

/// Full pipeline on an already prepared scene.
pub fn plan_scene(config: &PipelineConfig, scene: &Scene) -> Result<PlanReport> {
    let mut clock = Clock::new();
    let report = plan_scene_timed(config, scene, &mut clock)?;
    Ok(PlanReport {
        timings: clock.timings,
        ..report
    })
}

fn plan_scene_timed(config: &PipelineConfig, scene: &Scene, clock: &mut Clock) -> Result<PlanReport> {
    config.validate()?;
    let vis = &scene.visibility;
    let (retained, dropped) = filter_points(vis, config.alpha);
    if retained.is_empty() {
        return Err(Error::NoCoverablePoints { alpha: config.alpha });
    }
    let search = max_feasible_beta_with(
        vis,
        &scene.space,
        config.alpha,
        config.beta_resolution,
        config.search_options(),
    )?;
    clock.lap("cover");
    let solution = &search.solution;
    let ids = solution.selected_views();
    let path = path_report(&scene.space, &ids, config)?;
    clock.lap("path");

    let coverage = evaluate_coverage(vis, &ids, config.alpha)?;
    let minimal = if solution.status == CoverStatus::Optimal {
        Some(is_minimal(vis, &ids, config.alpha)?)
    } else {
        None
    };
    let audit = AuditReport {
        coverage_matches_solver: (coverage.fraction_meeting_alpha >= 1.0) == solution.status.is_feasible(),
        minimal,
    };
    clock.lap("audit");
    Ok(PlanReport {
        schema_version: PLAN_SCHEMA_VERSION,
        config: config.clone(),
        occupied_voxels: scene.grid.occupied_count(),
        dropped_points: dropped.len(),
        beta: Some(BetaReport {
            beta_star: search.beta_star,
            resolution: search.resolution,
            ceiling_index: search.ceiling_index,
            hit_ceiling: search.hit_ceiling,
            probes: search.probes,
        }),
        selection: SelectionReport {
            method: PlanMethod::Optimized,
            status: Some(solution.status),
            objective: solution.objective,
            bound: solution.bound,
            nodes: solution.nodes,
            poses: poses(&scene.space, &ids),
            view_ids: ids,
        },
        path,
        coverage,
        audit,
        timings: Timings::new(),
    })
}

/// Mesh to plan in one call.
pub fn run_plan(config: &PipelineConfig) -> Result<PlanReport> {
    let mut clock = Clock::new();
    let scene = build_scene(config, &mut clock)?;
    let report = plan_scene_timed(config, &scene, &mut clock)?;
    Ok(PlanReport {
        timings: clock.timings,
        ..report
    })
}

/// `n_views` distinct candidate ids drawn uniformly, in increasing order.
pub fn random_selection(view_count: usize, n_views: usize, seed: u64) -> Result<Vec<usize>> {
    if n_views > view_count {
        return Err(Error::TooManyViews {
            requested: n_views,
            available: view_count,
        });
    }
    if n_views == 0 {
        return Err(Error::EmptySelection);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = rand::seq::index::sample(&mut rng, view_count, n_views).into_vec();
    ids.sort_unstable();
    Ok(ids)
}

/// Random baseline on an already prepared scene.
pub fn random_scene(config: &PipelineConfig, scene: &Scene, n_views: usize, seed: u64) -> Result<PlanReport> {
    config.validate()?;
    let mut clock = Clock::new();
    let ids = random_selection(scene.space.len(), n_views, seed)?;
    let path = path_report(&scene.space, &ids, config)?;
    clock.lap("path");
    let coverage = evaluate_coverage(&scene.visibility, &ids, config.alpha)?;
    let (_, dropped) = filter_points(&scene.visibility, config.alpha);
    Ok(PlanReport {
        schema_version: PLAN_SCHEMA_VERSION,
        config: config.clone(),
        occupied_voxels: scene.grid.occupied_count(),
        dropped_points: dropped.len(),
        beta: None,
        selection: SelectionReport {
            method: PlanMethod::Random,
            status: None,
            objective: ids.len(),
            bound: None,
            nodes: 0,
            poses: poses(&scene.space, &ids),
            view_ids: ids,
        },
        path,
        coverage,
        audit: AuditReport {
            coverage_matches_solver: true,
            minimal: None,
        },
        timings: clock.timings,
    })
}

/// Picks `n_views` candidates at random (seeded) and plans a path through
/// them.
pub fn run_random_baseline(config: &PipelineConfig, n_views: usize, seed: u64) -> Result<PlanReport> {
    let scene = prepare_scene(config)?;
    random_scene(config, &scene, n_views, seed)
}
