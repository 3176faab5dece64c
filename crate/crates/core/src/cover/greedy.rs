use super::{CoverProblem, CoverSolution, CoverStatus};
use crate::bits::BitSet;

/// Partial selection shared by the greedy and branch-and-bound solvers.
#[derive(Debug, Clone)]
pub(crate) struct SearchState {
    pub selected: BitSet,
    /// Views that may still be selected: not selected, not excluded, not in
    /// conflict with a selected view.
    pub available: BitSet,
    pub coverage: Vec<u32>,
    /// Sum over points of `max(0, alpha - coverage)`.
    pub residual: u64,
    pub count: usize,
}

impl SearchState {
    pub fn new(problem: &CoverProblem) -> Self {
        Self {
            selected: BitSet::new(problem.view_count),
            available: BitSet::full(problem.view_count),
            coverage: vec![0; problem.point_count()],
            residual: problem.params.alpha as u64 * problem.point_count() as u64,
            count: 0,
        }
    }

    pub fn select(&mut self, problem: &CoverProblem, view: usize) {
        let alpha = problem.params.alpha;
        for &p in &problem.view_points[view] {
            let c = &mut self.coverage[p as usize];
            if *c < alpha {
                self.residual -= 1;
            }
            *c += 1;
        }
        self.selected.insert(view);
        self.available.remove(view);
        self.available.difference_with(&problem.conflicts[view]);
        self.count += 1;
    }

    pub fn exclude(&mut self, view: usize) {
        self.available.remove(view);
    }

    /// Residual demand that `view` would satisfy.
    #[inline]
    pub fn gain(&self, problem: &CoverProblem, view: usize) -> u64 {
        let alpha = problem.params.alpha;
        problem.view_points[view]
            .iter()
            .filter(|&&p| self.coverage[p as usize] < alpha)
            .count() as u64
    }

    /// Available view with the largest gain, lowest id on ties.
    pub fn best_view(&self, problem: &CoverProblem) -> Option<(usize, u64)> {
        let mut best: Option<(usize, u64)> = None;
        for v in self.available.ones() {
            let g = self.gain(problem, v);
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((v, g));
            }
        }
        best
    }
}

/// Repeatedly selects the available view with the largest gain until all
/// demand is met. Returns `false` when no available view has positive gain
/// while demand remains.
pub(crate) fn greedy_complete(problem: &CoverProblem, state: &mut SearchState) -> bool {
    while state.residual > 0 {
        match state.best_view(problem) {
            Some((v, g)) if g > 0 => state.select(problem, v),
            _ => return false,
        }
    }
    true
}

/// Greedy multicover: pick the non-conflicting view that covers the most
/// residual demand, lowest id on ties, until every point is covered `alpha`
/// times or no view helps.
pub fn solve_greedy(problem: &CoverProblem) -> CoverSolution {
    let mut state = SearchState::new(problem);
    if greedy_complete(problem, &mut state) {
        CoverSolution {
            objective: state.count,
            selected: state.selected,
            status: CoverStatus::FeasibleHeuristic,
            bound: None,
            nodes: 0,
        }
    } else {
        CoverSolution::infeasible(problem.view_count, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::test_support::{random_problem, toy};
    use crate::cover::{brute_force_oracle, filter_points, CoverParams};
    use crate::visibility::VisibilityMatrix;

    #[test]
    fn dominant_view_alone() {
        let vis = VisibilityMatrix::from_sets(4, &[vec![0, 1], vec![0, 1, 2, 3], vec![3]]).unwrap();
        let (retained, _) = filter_points(&vis, 1);
        let p = CoverProblem::new(&vis, retained, vec![], CoverParams { alpha: 1, beta: 0.0 }).unwrap();
        let s = solve_greedy(&p);
        assert_eq!(s.selected_views(), vec![1]);
        assert_eq!(s.objective, 1);
        assert_eq!(s.status, CoverStatus::FeasibleHeuristic);
    }

    #[test]
    fn toy_instance_takes_two() {
        let (_, p) = toy(1);
        let s = solve_greedy(&p.unwrap());
        assert_eq!(s.objective, 2);
        assert_eq!(s.selected_views(), vec![0, 1]);
    }

    #[test]
    fn conflicts_can_make_greedy_fail() {
        let vis = VisibilityMatrix::from_sets(2, &[vec![0, 1], vec![0, 1]]).unwrap();
        let p = CoverProblem::new(&vis, vec![0, 1], vec![(0, 1)], CoverParams { alpha: 2, beta: 1.0 }).unwrap();
        assert_eq!(solve_greedy(&p).status, CoverStatus::Infeasible);
    }

    #[test]
    fn never_beats_brute_force() {
        for seed in 0..150 {
            let p = random_problem(seed, 1 + (seed as usize % 10), 20);
            let g = solve_greedy(&p);
            let b = brute_force_oracle(&p).unwrap();
            if g.status.is_feasible() {
                assert!(p.is_feasible(&g.selected));
                assert_eq!(g.objective, g.selected.count_ones());
                assert!(b.status.is_feasible());
                assert!(g.objective >= b.objective, "seed {seed}");
            }
        }
    }
}
