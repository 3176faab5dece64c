//! Depth-first branch and bound over view inclusion.

use std::collections::HashSet;

use super::greedy::SearchState;
use super::{solve_greedy, CoverProblem, CoverSolution, CoverStatus};
use crate::bits::BitSet;

pub const DEFAULT_NODE_BUDGET: u64 = 5_000_000;

struct Node {
    state: SearchState,
    /// Lower bound inherited from the parent.
    bound: usize,
}

/// Exact minimum cover by branch and bound.
///
/// The incumbent starts from [`solve_greedy`]. Each node first applies
/// forcing (a point whose residual demand equals its number of available
/// views forces all of them in), then prunes on a combinatorial lower bound,
/// then branches on one view: among the views of the point with the least
/// slack (available views minus residual demand), the one with the largest
/// residual gain, lowest id on ties. The include branch is explored first.
///
/// If more than `node_budget` nodes would be expanded, the best selection
/// found so far is returned as [`CoverStatus::FeasibleHeuristic`] (or
/// [`CoverStatus::Undetermined`] if none was found) together with the
/// smallest bound over the unexplored subtrees.
pub fn solve_exact(problem: &CoverProblem, node_budget: u64) -> CoverSolution {
    let node_budget = node_budget.max(1);
    let n = problem.view_count();
    if problem.point_count() == 0 {
        return CoverSolution {
            selected: BitSet::new(n),
            objective: 0,
            status: CoverStatus::Optimal,
            bound: None,
            nodes: 0,
        };
    }

    let reduced = drop_dominated_points(problem);
    let order = packing_order(&reduced);

    let greedy = solve_greedy(problem);
    let (mut best, mut best_count) = if greedy.status.is_feasible() {
        (Some(greedy.selected), greedy.objective)
    } else {
        (None, usize::MAX)
    };

    let mut stack = vec![Node {
        state: SearchState::new(&reduced),
        bound: 0,
    }];
    let mut nodes = 0u64;
    let mut exhausted = false;
    while let Some(node) = stack.pop() {
        if nodes >= node_budget {
            stack.push(node);
            exhausted = true;
            break;
        }
        nodes += 1;
        let mut state = node.state;
        if !propagate(&reduced, &mut state) {
            continue;
        }
        if state.residual == 0 {
            if state.count < best_count {
                best_count = state.count;
                best = Some(state.selected);
            }
            continue;
        }
        let bound = lower_bound(&reduced, &state, &order).max(node.bound);
        if bound >= best_count {
            continue;
        }
        let Some(view) = branch_view(&reduced, &state) else {
            continue;
        };
        let mut without = state.clone();
        without.exclude(view);
        state.select(&reduced, view);
        stack.push(Node { state: without, bound });
        stack.push(Node { state, bound });
    }

    if exhausted {
        let open = stack.iter().map(|n| n.bound).min().unwrap_or(usize::MAX);
        let bound = open.min(best_count);
        return match best {
            Some(selected) => CoverSolution {
                objective: best_count,
                selected,
                status: if bound >= best_count {
                    CoverStatus::Optimal
                } else {
                    CoverStatus::FeasibleHeuristic
                },
                bound: (bound < best_count).then_some(bound),
                nodes,
            },
            None => CoverSolution {
                selected: BitSet::new(n),
                objective: 0,
                status: CoverStatus::Undetermined,
                bound: Some(bound),
                nodes,
            },
        };
    }
    match best {
        Some(selected) => CoverSolution {
            objective: best_count,
            selected,
            status: CoverStatus::Optimal,
            bound: None,
            nodes,
        },
        None => CoverSolution::infeasible(n, nodes),
    }
}

/// Removes every point whose view set contains another point's view set;
/// covering the smaller set `alpha` times covers the larger one too.
fn drop_dominated_points(problem: &CoverProblem) -> CoverProblem {
    let mut seen = HashSet::new();
    let mut candidates: Vec<usize> = (0..problem.point_count())
        .filter(|&p| seen.insert(problem.point_views[p].words().to_vec()))
        .collect();
    candidates.sort_by_key(|&p| (problem.point_views[p].count_ones(), p));
    let mut kept: Vec<usize> = Vec::new();
    for p in candidates {
        let views = &problem.point_views[p];
        if !kept.iter().any(|&q| problem.point_views[q].is_subset(views)) {
            kept.push(p);
        }
    }
    kept.sort_unstable();

    let mut view_points = vec![Vec::new(); problem.view_count];
    for (i, &p) in kept.iter().enumerate() {
        for v in problem.point_views[p].ones() {
            view_points[v].push(i as u32);
        }
    }
    CoverProblem {
        view_count: problem.view_count,
        retained_points: kept.iter().map(|&p| problem.retained_points[p]).collect(),
        point_views: kept.iter().map(|&p| problem.point_views[p].clone()).collect(),
        view_points,
        conflict_pairs: problem.conflict_pairs.clone(),
        conflicts: problem.conflicts.clone(),
        params: problem.params,
    }
}

/// Points sorted by how few views observe them; used for the packing bound.
fn packing_order(problem: &CoverProblem) -> Vec<usize> {
    let mut order: Vec<usize> = (0..problem.point_count()).collect();
    order.sort_by_key(|&p| (problem.point_views[p].count_ones(), p));
    order
}

/// Applies forced selections until a fixpoint. Returns `false` if some point
/// can no longer reach its demand.
fn propagate(problem: &CoverProblem, state: &mut SearchState) -> bool {
    let alpha = problem.params.alpha;
    loop {
        let mut changed = false;
        for p in 0..problem.point_count() {
            let c = state.coverage[p];
            if c >= alpha {
                continue;
            }
            let need = (alpha - c) as usize;
            let views = &problem.point_views[p];
            let avail = views.intersection_count(&state.available);
            if avail < need {
                return false;
            }
            if !problem.conflict_pairs.is_empty() && avail < 2 * need + 4 {
                let mut open = views.clone();
                open.intersect_with(&state.available);
                if clique_partition_size(problem, &open) < need {
                    return false;
                }
            }
            if avail == need {
                let mut forced = views.clone();
                forced.intersect_with(&state.available);
                for v in forced.ones() {
                    if !state.available.contains(v) {
                        return false;
                    }
                    state.select(problem, v);
                }
                changed = true;
            }
        }
        if !changed {
            return true;
        }
    }
}

/// The branching view, or `None` when no available view has positive gain.
fn branch_view(problem: &CoverProblem, state: &SearchState) -> Option<usize> {
    let alpha = problem.params.alpha;
    let mut tightest: Option<(usize, usize, usize)> = None; // (slack, avail, point)
    for p in 0..problem.point_count() {
        let c = state.coverage[p];
        if c >= alpha {
            continue;
        }
        let avail = problem.point_views[p].intersection_count(&state.available);
        let slack = avail - (alpha - c) as usize;
        if tightest.is_none_or(|(s, a, _)| (slack, avail) < (s, a)) {
            tightest = Some((slack, avail, p));
        }
    }
    let (_, _, p) = tightest?;
    let mut best: Option<(usize, u64)> = None;
    for v in problem.point_views[p].ones() {
        if !state.available.contains(v) {
            continue;
        }
        let g = state.gain(problem, v);
        if best.is_none_or(|(_, bg)| g > bg) {
            best = Some((v, g));
        }
    }
    best.map(|(v, _)| v)
}

/// Upper bound on how many views of `views` can be selected together:
/// the number of cliques in a greedy clique partition of the conflict graph
/// restricted to `views`.
fn clique_partition_size(problem: &CoverProblem, views: &BitSet) -> usize {
    let mut cliques: Vec<BitSet> = Vec::new();
    for v in views.ones() {
        let conflicts = &problem.conflicts[v];
        match cliques.iter_mut().find(|c| c.is_subset(conflicts)) {
            Some(c) => c.insert(v),
            None => cliques.push(BitSet::from_indices(views.len(), [v])),
        }
    }
    cliques.len()
}

/// Views already chosen plus the largest of three bounds on the views still
/// needed: the largest single residual demand; the fewest views whose gains
/// add up to the total residual demand; and the summed demand of points
/// whose available view sets are pairwise disjoint.
fn lower_bound(problem: &CoverProblem, state: &SearchState, order: &[usize]) -> usize {
    let alpha = problem.params.alpha;
    let max_demand = state
        .coverage
        .iter()
        .map(|&c| alpha.saturating_sub(c) as u64)
        .max()
        .unwrap_or(0);
    let mut gains: Vec<u64> = state.available.ones().map(|v| state.gain(problem, v)).collect();
    gains.sort_unstable_by(|a, b| b.cmp(a));
    let mut covered = 0u64;
    let mut ratio = u64::MAX / 4;
    for (k, g) in gains.iter().enumerate() {
        covered += g;
        if covered >= state.residual {
            ratio = k as u64 + 1;
            break;
        }
    }

    let avail = state.available.words();
    let mut used = vec![0u64; avail.len()];
    let mut packing = 0u64;
    for &p in order {
        let c = state.coverage[p];
        if c >= alpha {
            continue;
        }
        let words = problem.point_views[p].words();
        let disjoint = words
            .iter()
            .zip(avail)
            .zip(&used)
            .all(|((w, a), u)| w & a & u == 0);
        if disjoint {
            for ((u, w), a) in used.iter_mut().zip(words).zip(avail) {
                *u |= w & a;
            }
            packing += (alpha - c) as u64;
        }
    }
    let extra = max_demand.max(ratio).max(packing);
    state.count.saturating_add(extra.min(usize::MAX as u64 / 2) as usize)
}
