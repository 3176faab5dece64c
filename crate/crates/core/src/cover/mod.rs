//! Minimum view selection under multi-view coverage and view-separation
//! constraints.
//!
//! Minimize `sum x_v` over binary `x` subject to every retained point being
//! observed by at least `alpha` selected views and no two selected views
//! forming a conflict pair. Conflict pairs come from [`build_conflicts`].

mod brute;
mod exact;
mod greedy;

use serde::{Deserialize, Serialize};

pub use brute::{brute_force_oracle, BRUTE_FORCE_CAP};
pub use exact::{solve_exact, DEFAULT_NODE_BUDGET};
pub use greedy::solve_greedy;

use crate::bits::BitSet;
use crate::view_space::ViewSpace;
use crate::visibility::VisibilityMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverParams {
    /// Minimum number of selected views observing each retained point.
    pub alpha: u32,
    /// Separation multiplier on the nearest-neighbor view distance.
    pub beta: f64,
}

impl CoverParams {
    pub fn new(alpha: u32, beta: f64) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::InvalidParameter("alpha must be at least 1".into()));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be finite and >= 0, got {beta}")));
        }
        Ok(Self { alpha, beta })
    }
}

/// Which endpoint's nearest-neighbor distance scales the separation radius.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConflictRule {
    /// `{v, w}` conflicts if `d(v, w) <= beta * nn(v)` or `d(v, w) <= beta * nn(w)`.
    #[default]
    Symmetric,
    /// `{v, w}` with `v < w` conflicts if `d(v, w) <= beta * nn(v)`.
    LowerIndex,
}

/// Splits points into those observed by at least `alpha` views (retained)
/// and the rest (dropped). Both lists are in increasing index order.
pub fn filter_points(vis: &VisibilityMatrix, alpha: u32) -> (Vec<usize>, Vec<usize>) {
    let counts = vis.column_counts();
    let mut retained = Vec::new();
    let mut dropped = Vec::new();
    for (p, &c) in counts.iter().enumerate() {
        if c >= alpha {
            retained.push(p)
        } else {
            dropped.push(p)
        }
    }
    (retained, dropped)
}

/// Conflict pairs under the symmetric rule.
pub fn build_conflicts(space: &ViewSpace, beta: f64) -> Vec<(usize, usize)> {
    build_conflicts_with(space, beta, ConflictRule::Symmetric)
}

/// Unordered view pairs `(v, w)`, `v < w`, that may not both be selected.
pub fn build_conflicts_with(space: &ViewSpace, beta: f64, rule: ConflictRule) -> Vec<(usize, usize)> {
    let nn = space.nn_distance();
    let n = space.len();
    let mut pairs = Vec::new();
    for v in 0..n {
        for w in v + 1..n {
            let d = space.distance(v, w);
            let hit = match rule {
                ConflictRule::Symmetric => d <= beta * nn[v] || d <= beta * nn[w],
                ConflictRule::LowerIndex => d <= beta * nn[v],
            };
            if hit {
                pairs.push((v, w));
            }
        }
    }
    pairs
}

/// Smallest beta at which every view pair conflicts.
pub fn saturation_beta(space: &ViewSpace, rule: ConflictRule) -> f64 {
    let nn = space.nn_distance();
    let n = space.len();
    let mut sat = 0.0f64;
    for v in 0..n {
        for w in v + 1..n {
            let scale = match rule {
                ConflictRule::Symmetric => nn[v].max(nn[w]),
                ConflictRule::LowerIndex => nn[v],
            };
            sat = sat.max(space.distance(v, w) / scale);
        }
    }
    sat
}

/// A cover instance restricted to the retained points.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverProblem {
    view_count: usize,
    retained_points: Vec<usize>,
    /// Views observing each retained point, indexed like `retained_points`.
    point_views: Vec<BitSet>,
    /// Retained-local point indices observed by each view.
    view_points: Vec<Vec<u32>>,
    conflict_pairs: Vec<(usize, usize)>,
    conflicts: Vec<BitSet>,
    params: CoverParams,
}

impl CoverProblem {
    pub fn new(
        vis: &VisibilityMatrix,
        retained_points: Vec<usize>,
        conflict_pairs: Vec<(usize, usize)>,
        params: CoverParams,
    ) -> Result<Self> {
        CoverParams::new(params.alpha, params.beta)?;
        let n = vis.view_count();
        let mut local = vec![u32::MAX; vis.point_count()];
        for (i, &p) in retained_points.iter().enumerate() {
            if p >= vis.point_count() {
                return Err(Error::InvalidParameter(format!("retained point {p} out of range")));
            }
            if local[p] != u32::MAX {
                return Err(Error::InvalidParameter(format!("retained point {p} listed twice")));
            }
            local[p] = i as u32;
        }
        let mut point_views = vec![BitSet::new(n); retained_points.len()];
        let mut view_points = vec![Vec::new(); n];
        for (v, row) in vis.rows().iter().enumerate() {
            for p in row.ones() {
                let l = local[p];
                if l != u32::MAX {
                    point_views[l as usize].insert(v);
                    view_points[v].push(l);
                }
            }
        }
        for (i, views) in point_views.iter().enumerate() {
            if views.count_ones() < params.alpha as usize {
                return Err(Error::InvalidParameter(format!(
                    "retained point {} is visible from {} views, fewer than alpha = {}",
                    retained_points[i],
                    views.count_ones(),
                    params.alpha
                )));
            }
        }
        let mut conflicts = vec![BitSet::new(n); n];
        let mut normalized = Vec::with_capacity(conflict_pairs.len());
        for &(a, b) in &conflict_pairs {
            if a == b {
                return Err(Error::InvalidParameter(format!("self conflict on view {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::UnknownView { id: a.max(b), count: n });
            }
            if conflicts[a].contains(b) {
                return Err(Error::InvalidParameter(format!("duplicate conflict pair ({a}, {b})")));
            }
            conflicts[a].insert(b);
            conflicts[b].insert(a);
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        Ok(Self {
            view_count: n,
            retained_points,
            point_views,
            view_points,
            conflict_pairs: normalized,
            conflicts,
            params,
        })
    }

    /// Filters points at `params.alpha` and derives conflicts at
    /// `params.beta`. Returns the problem and the dropped point indices.
    pub fn from_views(
        vis: &VisibilityMatrix,
        space: &ViewSpace,
        params: CoverParams,
        rule: ConflictRule,
    ) -> Result<(Self, Vec<usize>)> {
        if vis.view_count() != space.len() {
            return Err(Error::InvalidParameter(format!(
                "visibility has {} views, view space {}",
                vis.view_count(),
                space.len()
            )));
        }
        let (retained, dropped) = filter_points(vis, params.alpha);
        let pairs = build_conflicts_with(space, params.beta, rule);
        Ok((Self::new(vis, retained, pairs, params)?, dropped))
    }

    pub fn view_count(&self) -> usize {
        self.view_count
    }

    pub fn point_count(&self) -> usize {
        self.retained_points.len()
    }

    pub fn retained_points(&self) -> &[usize] {
        &self.retained_points
    }

    pub fn conflict_pairs(&self) -> &[(usize, usize)] {
        &self.conflict_pairs
    }

    pub fn params(&self) -> CoverParams {
        self.params
    }

    /// Recounts coverage of every retained point and scans every conflict
    /// pair. Returns `true` iff `selected` satisfies all constraints.
    pub fn is_feasible(&self, selected: &BitSet) -> bool {
        if selected.len() != self.view_count {
            return false;
        }
        let alpha = self.params.alpha as usize;
        let covered = self.point_views.iter().all(|views| views.intersection_count(selected) >= alpha);
        covered
            && self
                .conflict_pairs
                .iter()
                .all(|&(a, b)| !(selected.contains(a) && selected.contains(b)))
    }

    pub fn to_record(&self) -> CoverProblemRecord {
        CoverProblemRecord {
            view_count: self.view_count,
            params: self.params,
            retained_points: self.retained_points.clone(),
            point_views: self.point_views.iter().map(BitSet::to_vec).collect(),
            conflict_pairs: self.conflict_pairs.clone(),
        }
    }
}

/// JSON form of a problem for offline debugging.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverProblemRecord {
    pub view_count: usize,
    pub params: CoverParams,
    pub retained_points: Vec<usize>,
    pub point_views: Vec<Vec<usize>>,
    pub conflict_pairs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverStatus {
    /// Proven minimum.
    Optimal,
    /// Feasible, optimality not proven (search budget exhausted or greedy).
    FeasibleHeuristic,
    /// Proven to have no feasible selection.
    Infeasible,
    /// Search budget exhausted before any feasible selection was found.
    Undetermined,
}

impl CoverStatus {
    pub fn is_feasible(self) -> bool {
        matches!(self, CoverStatus::Optimal | CoverStatus::FeasibleHeuristic)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverSolution {
    pub selected: BitSet,
    pub objective: usize,
    pub status: CoverStatus,
    /// Proven lower bound on the optimum when optimality is not proven.
    pub bound: Option<usize>,
    /// Search nodes expanded (0 for non-search solvers).
    pub nodes: u64,
}

impl CoverSolution {
    pub(crate) fn infeasible(view_count: usize, nodes: u64) -> Self {
        Self {
            selected: BitSet::new(view_count),
            objective: 0,
            status: CoverStatus::Infeasible,
            bound: None,
            nodes,
        }
    }

    pub fn selected_views(&self) -> Vec<usize> {
        self.selected.to_vec()
    }
}

/// Which solver produces the final selection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    #[default]
    Exact,
    Greedy,
}

/// Interchangeable cover solvers.
pub trait CoverSolver {
    fn solve(&self, problem: &CoverProblem) -> CoverSolution;
}

pub struct GreedySolver;

impl CoverSolver for GreedySolver {
    fn solve(&self, problem: &CoverProblem) -> CoverSolution {
        solve_greedy(problem)
    }
}

pub struct BranchAndBound {
    pub node_budget: u64,
}

impl Default for BranchAndBound {
    fn default() -> Self {
        Self {
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

impl CoverSolver for BranchAndBound {
    fn solve(&self, problem: &CoverProblem) -> CoverSolution {
        solve_exact(problem, self.node_budget)
    }
}
