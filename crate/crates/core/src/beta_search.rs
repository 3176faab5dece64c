//! Largest separation multiplier that still admits a feasible cover.
//!
//! Beta lives on the lattice `k * resolution`. The search brackets by
//! doubling upward from beta = 1 (capped where every view pair conflicts)
//! and then bisects on lattice indices.

use std::collections::BTreeMap;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::{
    build_conflicts_with, filter_points, saturation_beta, solve_exact, solve_greedy, ConflictRule, CoverParams,
    CoverProblem, CoverSolution, CoverStatus, SolverMode, DEFAULT_NODE_BUDGET,
};
use crate::view_space::ViewSpace;
use crate::visibility::VisibilityMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaSearchOptions {
    pub rule: ConflictRule,
    pub node_budget: u64,
    /// `Greedy` trusts greedy failure as infeasibility and skips exact
    /// confirmation and the final exact solve.
    pub solver: SolverMode,
}

impl Default for BetaSearchOptions {
    fn default() -> Self {
        Self {
            rule: ConflictRule::Symmetric,
            node_budget: DEFAULT_NODE_BUDGET,
            solver: SolverMode::Exact,
        }
    }
}

/// One feasibility test at `beta = index * resolution`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaProbe {
    pub index: u64,
    pub beta: f64,
    pub feasible: bool,
    /// Status of the solve that decided the probe.
    pub status: CoverStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaSearchResult {
    pub beta_star: f64,
    pub index: u64,
    pub resolution: f64,
    /// Lattice index at which every pair conflicts.
    pub ceiling_index: u64,
    pub hit_ceiling: bool,
    pub solution: CoverSolution,
    /// Probes in the order they were run.
    pub probes: Vec<BetaProbe>,
}

/// A lattice prober over a fixed visibility matrix and alpha.
struct Prober<'a> {
    vis: &'a VisibilityMatrix,
    space: &'a ViewSpace,
    retained: Vec<usize>,
    alpha: u32,
    resolution: f64,
    opts: BetaSearchOptions,
}

impl Prober<'_> {
    /// Lattice value, rounded so that e.g. `7 * 0.1` reports as `0.7`.
    fn beta(&self, k: u64) -> f64 {
        (k as f64 * self.resolution * 1e12).round() / 1e12
    }

    fn problem(&self, k: u64) -> Result<CoverProblem> {
        let beta = self.beta(k);
        let pairs = build_conflicts_with(self.space, beta, self.opts.rule);
        CoverProblem::new(self.vis, self.retained.clone(), pairs, CoverParams::new(self.alpha, beta)?)
    }

    /// Greedy first; exact only to confirm a greedy failure.
    fn probe(&self, k: u64) -> Result<(BetaProbe, CoverSolution)> {
        let problem = self.problem(k)?;
        let mut solution = solve_greedy(&problem);
        if !solution.status.is_feasible() && self.opts.solver == SolverMode::Exact {
            solution = solve_exact(&problem, self.opts.node_budget);
            if solution.status == CoverStatus::Undetermined {
                warn!("beta probe {} undetermined after {} nodes, treated as infeasible", self.beta(k), solution.nodes);
            }
        }
        let probe = BetaProbe {
            index: k,
            beta: self.beta(k),
            feasible: solution.status.is_feasible(),
            status: solution.status,
        };
        debug!("beta probe {} -> {:?}", probe.beta, probe.status);
        Ok((probe, solution))
    }

    fn ceiling_index(&self) -> u64 {
        let n = self.space.len();
        let all = n * (n - 1) / 2;
        let sat = saturation_beta(self.space, self.opts.rule);
        let mut k = ((sat / self.resolution) - 1e-9).ceil().max(0.0) as u64;
        while build_conflicts_with(self.space, self.beta(k), self.opts.rule).len() < all {
            k += 1;
        }
        k
    }
}

fn prober<'a>(
    vis: &'a VisibilityMatrix,
    space: &'a ViewSpace,
    alpha: u32,
    resolution: f64,
    opts: BetaSearchOptions,
) -> Result<Prober<'a>> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta resolution must be positive, got {resolution}")));
    }
    if alpha == 0 {
        return Err(Error::InvalidParameter("alpha must be at least 1".into()));
    }
    if vis.view_count() != space.len() {
        return Err(Error::InvalidParameter(format!(
            "visibility has {} views, view space {}",
            vis.view_count(),
            space.len()
        )));
    }
    let (retained, _) = filter_points(vis, alpha);
    Ok(Prober {
        vis,
        space,
        retained,
        alpha,
        resolution,
        opts,
    })
}

/// [`max_feasible_beta_with`] under default options.
pub fn max_feasible_beta(
    vis: &VisibilityMatrix,
    space: &ViewSpace,
    alpha: u32,
    resolution: f64,
) -> Result<BetaSearchResult> {
    max_feasible_beta_with(vis, space, alpha, resolution, BetaSearchOptions::default())
}

/// Largest lattice beta with a feasible cover, plus the cover at that beta
/// (solved exactly unless `opts.solver` is greedy).
pub fn max_feasible_beta_with(
    vis: &VisibilityMatrix,
    space: &ViewSpace,
    alpha: u32,
    resolution: f64,
    opts: BetaSearchOptions,
) -> Result<BetaSearchResult> {
    let prober = prober(vis, space, alpha, resolution, opts)?;
    let ceiling = prober.ceiling_index();
    let mut probes = Vec::new();
    let mut solutions: BTreeMap<u64, CoverSolution> = BTreeMap::new();
    let mut run = |k: u64| -> Result<bool> {
        let (probe, solution) = prober.probe(k)?;
        let feasible = probe.feasible;
        probes.push(probe);
        if feasible {
            solutions.insert(k, solution);
        }
        Ok(feasible)
    };

    if !run(0)? {
        return Err(Error::InfeasibleAtZero { alpha });
    }
    // Bracket: lo feasible, hi infeasible (or lo == ceiling).
    let mut lo = 0u64;
    let mut hi = None;
    let mut k = ((1.0 / resolution).round() as u64).clamp(1, ceiling.max(1));
    loop {
        if run(k)? {
            lo = k;
            if k >= ceiling {
                break;
            }
            k = (k * 2).min(ceiling);
        } else {
            hi = Some(k);
            break;
        }
    }
    if let Some(mut hi) = hi {
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if run(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    let probe_solution = solutions.remove(&lo).expect("feasible probe has a solution");
    let solution = if opts.solver == SolverMode::Exact && probe_solution.status == CoverStatus::FeasibleHeuristic {
        let exact = solve_exact(&prober.problem(lo)?, opts.node_budget);
        if exact.status.is_feasible() {
            exact
        } else {
            probe_solution
        }
    } else {
        probe_solution
    };
    Ok(BetaSearchResult {
        beta_star: prober.beta(lo),
        index: lo,
        resolution,
        ceiling_index: ceiling,
        hit_ceiling: lo >= ceiling,
        solution,
        probes,
    })
}

/// Feasibility at every lattice index from 0 to the ceiling, in index order.
/// Probes run in parallel; the result does not depend on scheduling.
pub fn sweep_feasibility(
    vis: &VisibilityMatrix,
    space: &ViewSpace,
    alpha: u32,
    resolution: f64,
    opts: BetaSearchOptions,
) -> Result<Vec<BetaProbe>> {
    let prober = prober(vis, space, alpha, resolution, opts)?;
    let ceiling = prober.ceiling_index();
    (0..=ceiling).into_par_iter().map(|k| prober.probe(k).map(|(p, _)| p)).collect()
}

/// Outcome of comparing the bisection result with a full sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAudit {
    pub monotone: bool,
    /// Last feasible index before the first infeasible one.
    pub sweep_index: u64,
    pub search_index: u64,
    pub agrees: bool,
}

/// Runs both the search and the sweep. A disagreement on a monotone sweep
/// is logged, not returned as an error.
pub fn audit_search(
    vis: &VisibilityMatrix,
    space: &ViewSpace,
    alpha: u32,
    resolution: f64,
    opts: BetaSearchOptions,
) -> Result<(BetaSearchResult, SweepAudit)> {
    let result = max_feasible_beta_with(vis, space, alpha, resolution, opts)?;
    let sweep = sweep_feasibility(vis, space, alpha, resolution, opts)?;
    let first_bad = sweep.iter().position(|p| !p.feasible);
    let monotone = match first_bad {
        Some(i) => sweep[i..].iter().all(|p| !p.feasible),
        None => true,
    };
    let sweep_index = match first_bad {
        Some(i) => (i as u64).saturating_sub(1),
        None => sweep.len() as u64 - 1,
    };
    let agrees = sweep_index == result.index;
    if monotone && !agrees {
        warn!("beta search returned index {} but sweep flips at {}", result.index, sweep_index);
    }
    Ok((
        result.clone(),
        SweepAudit {
            monotone,
            sweep_index,
            search_index: result.index,
            agrees,
        },
    ))
}
