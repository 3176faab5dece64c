//! Shortest open tour from the initial view through the selected views.

use serde::{Deserialize, Serialize};

use crate::view_space::ViewSpace;
use crate::{Error, Point3, Result};

/// Largest number of non-initial stops solved by subset DP.
pub const EXACT_PATH_LIMIT: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPlan {
    /// View ids, starting with the initial view.
    pub order: Vec<usize>,
    /// Length of each consecutive leg, meters.
    pub legs: Vec<f64>,
    pub total_cost: f64,
    /// Whether the order is proven shortest.
    pub exact: bool,
}

/// Sum of straight-line leg lengths along `order`.
pub fn path_cost(space: &ViewSpace, order: &[usize]) -> f64 {
    order.windows(2).map(|w| space.distance(w[0], w[1])).sum()
}

fn finish(space: &ViewSpace, order: Vec<usize>, exact: bool) -> PathPlan {
    let legs: Vec<f64> = order
        .windows(2)
        .map(|w| (space.views()[w[0]].position - space.views()[w[1]].position).norm())
        .collect();
    let total_cost = legs.iter().sum();
    PathPlan {
        order,
        legs,
        total_cost,
        exact,
    }
}

/// Plans an open path starting at `initial` that visits every view in
/// `selected` once. Subset DP when at most [`EXACT_PATH_LIMIT`] stops
/// remain, otherwise nearest neighbor followed by 2-opt.
pub fn plan_path(space: &ViewSpace, selected: &[usize], initial: usize) -> Result<PathPlan> {
    space.view(initial)?;
    for &v in selected {
        space.view(v)?;
    }
    let mut stops: Vec<usize> = selected.iter().copied().filter(|&v| v != initial).collect();
    stops.sort_unstable();
    stops.dedup();
    if selected.is_empty() {
        return Err(Error::EmptySelection);
    }
    if stops.len() <= EXACT_PATH_LIMIT {
        Ok(finish(space, held_karp(space, initial, &stops), true))
    } else {
        let mut order = nearest_neighbor(space, initial, &stops);
        two_opt(space, &mut order);
        Ok(finish(space, order, false))
    }
}

/// Exact open path over `stops` from `start` by DP on visited subsets.
/// Among equally short paths the one ending at the lowest stop index wins.
pub fn held_karp(space: &ViewSpace, start: usize, stops: &[usize]) -> Vec<usize> {
    let n = stops.len();
    if n == 0 {
        return vec![start];
    }
    let full = (1usize << n) - 1;
    let mut cost = vec![f64::INFINITY; (1 << n) * n];
    let mut parent = vec![usize::MAX; (1 << n) * n];
    for j in 0..n {
        cost[(1 << j) * n + j] = space.distance(start, stops[j]);
    }
    for mask in 1..=full {
        for j in 0..n {
            if mask & (1 << j) == 0 {
                continue;
            }
            let c = cost[mask * n + j];
            if !c.is_finite() {
                continue;
            }
            for k in 0..n {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let next = mask | (1 << k);
                let nc = c + space.distance(stops[j], stops[k]);
                if nc < cost[next * n + k] {
                    cost[next * n + k] = nc;
                    parent[next * n + k] = j;
                }
            }
        }
    }
    let mut last = 0;
    for j in 1..n {
        if cost[full * n + j] < cost[full * n + last] {
            last = j;
        }
    }
    let mut rev = Vec::with_capacity(n + 1);
    let mut mask = full;
    let mut j = last;
    while j != usize::MAX {
        rev.push(stops[j]);
        let p = parent[mask * n + j];
        mask &= !(1 << j);
        j = p;
    }
    rev.push(start);
    rev.reverse();
    rev
}

/// Greedy path: always move to the closest unvisited stop (lowest id on ties).
pub fn nearest_neighbor(space: &ViewSpace, start: usize, stops: &[usize]) -> Vec<usize> {
    let mut left: Vec<usize> = stops.to_vec();
    left.sort_unstable();
    let mut order = vec![start];
    let mut at = start;
    while !left.is_empty() {
        let mut best = 0;
        for i in 1..left.len() {
            if space.distance(at, left[i]) < space.distance(at, left[best]) {
                best = i;
            }
        }
        at = left.remove(best);
        order.push(at);
    }
    order
}

/// Change in open-path cost from reversing `order[i..=j]`, `1 <= i < j`.
/// The start stays fixed; reversing a suffix just drops its outgoing edge.
pub fn two_opt_delta(space: &ViewSpace, order: &[usize], i: usize, j: usize) -> f64 {
    let a = order[i - 1];
    let b = order[i];
    let c = order[j];
    let removed_in = space.distance(a, b);
    let added_in = space.distance(a, c);
    let (removed_out, added_out) = match order.get(j + 1) {
        Some(&d) => (space.distance(c, d), space.distance(b, d)),
        None => (0.0, 0.0),
    };
    added_in + added_out - removed_in - removed_out
}

/// First-improvement 2-opt on segment reversals until no move shortens the
/// path by more than a relative 1e-12.
pub fn two_opt(space: &ViewSpace, order: &mut [usize]) {
    let n = order.len();
    let tol = 1e-12 * path_cost(space, order).max(1e-300);
    loop {
        let mut improved = false;
        for i in 1..n.saturating_sub(1) {
            for j in i + 1..n {
                if two_opt_delta(space, order, i, j) < -tol {
                    order[i..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// The path as positions, with collision-avoiding arcs inserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetouredPath {
    pub waypoints: Vec<Point3>,
    /// Number of legs that needed a detour.
    pub detoured_legs: usize,
    pub length: f64,
}

/// Distance from `c` to the segment `a`-`b`.
pub fn segment_distance(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((c - a).dot(&ab) / len2).clamp(0.0, 1.0)
    };
    (a + ab * t - c).norm()
}

/// Replaces every leg whose chord passes within `safety_radius` of the
/// workspace center by waypoints on the great circle through its endpoints,
/// at the view-sphere radius. Consecutive waypoints are close enough that
/// their chords stay clear of the safety sphere.
pub fn safety_detour(space: &ViewSpace, plan: &PathPlan, safety_radius: f64) -> Result<DetouredPath> {
    let radius = space.radius();
    if !(safety_radius >= 0.0 && safety_radius < radius) {
        return Err(Error::InvalidParameter(format!(
            "safety radius {safety_radius} must be in [0, {radius})"
        )));
    }
    let center = space.center();
    let pos = |id: usize| space.views()[id].position;
    let mut waypoints = vec![pos(plan.order[0])];
    let mut detoured_legs = 0;
    // chord between two points at `radius` separated by angle t sits at
    // radius * cos(t / 2) from the center; keep a margin below the limit
    let max_step = 2.0 * (safety_radius / radius).clamp(0.0, 1.0).acos() * 0.9;
    for w in plan.order.windows(2) {
        let (a, b) = (pos(w[0]), pos(w[1]));
        if safety_radius == 0.0 || segment_distance(&a, &b, &center) >= safety_radius {
            waypoints.push(b);
            continue;
        }
        detoured_legs += 1;
        let ua = (a - center).normalize();
        let ub = (b - center).normalize();
        let angle = ua.dot(&ub).clamp(-1.0, 1.0).acos();
        // rotation axis; for antipodal endpoints route over the zenith
        let mut axis = ua.cross(&ub);
        if axis.norm() < 1e-9 {
            axis = ua.cross(&crate::Vector3::z());
            if axis.norm() < 1e-9 {
                axis = ua.cross(&crate::Vector3::y());
            }
        }
        let axis = nalgebra::Unit::new_normalize(axis);
        let steps = (angle / max_step).ceil().max(1.0) as usize;
        for s in 1..steps {
            let rot = nalgebra::Rotation3::from_axis_angle(&axis, angle * s as f64 / steps as f64);
            waypoints.push(center + rot * ua * radius);
        }
        waypoints.push(b);
    }
    let length = waypoints.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    Ok(DetouredPath {
        waypoints,
        detoured_legs,
        length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ViewSpace {
        let pts = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)].map(|(x, y)| Point3::new(x, y, 1.0));
        ViewSpace::from_positions(Point3::new(0.5, 0.5, 0.0), &pts).unwrap()
    }

    #[test]
    fn single_stop() {
        let s = square();
        let p = plan_path(&s, &[2], 0).unwrap();
        assert_eq!(p.order, vec![0, 2]);
        assert!((p.total_cost - 2f64.sqrt()).abs() < 1e-12);
        assert!(p.exact);
    }

    #[test]
    fn square_walks_the_perimeter() {
        let s = square();
        let p = plan_path(&s, &[1, 2, 3], 0).unwrap();
        assert!((p.total_cost - 3.0).abs() < 1e-12);
        // both perimeter directions tie; the DP ends at the lowest stop id
        assert_eq!(p.order, vec![0, 3, 2, 1]);
    }

    #[test]
    fn initial_inside_selection_is_not_repeated() {
        let s = square();
        let p = plan_path(&s, &[0, 1], 0).unwrap();
        assert_eq!(p.order, vec![0, 1]);
        let p = plan_path(&s, &[0], 0).unwrap();
        assert_eq!(p.order, vec![0]);
        assert_eq!(p.total_cost, 0.0);
    }

    #[test]
    fn errors() {
        let s = square();
        assert!(matches!(plan_path(&s, &[], 0), Err(Error::EmptySelection)));
        assert!(plan_path(&s, &[9], 0).is_err());
        assert!(plan_path(&s, &[1], 9).is_err());
    }

    #[test]
    fn detour_with_zero_radius_is_identity() {
        let s = crate::view_space::generate_hemisphere_views(20, Point3::origin(), 0.3).unwrap();
        let plan = plan_path(&s, &[3, 7, 11, 19], 0).unwrap();
        let d = safety_detour(&s, &plan, 0.0).unwrap();
        let expect: Vec<Point3> = plan.order.iter().map(|&v| s.views()[v].position).collect();
        assert_eq!(d.waypoints, expect);
        assert!((d.length - plan.total_cost).abs() < 1e-12);
        assert!(safety_detour(&s, &plan, 0.3).is_err());
    }

    #[test]
    fn antipodal_equator_views_arc_over() {
        let pts = [Point3::new(0.3, 0.0, 0.0), Point3::new(-0.3, 0.0, 0.0), Point3::new(0.0, 0.3, 0.0)];
        let s = ViewSpace::from_positions(Point3::origin(), &pts).unwrap();
        let plan = plan_path(&s, &[1], 0).unwrap();
        let d = safety_detour(&s, &plan, 0.15).unwrap();
        assert_eq!(d.detoured_legs, 1);
        assert!(d.waypoints.len() > 2);
        for w in d.waypoints.windows(2) {
            assert!(segment_distance(&w[0], &w[1], &Point3::origin()) >= 0.15);
        }
        assert!(d.length >= plan.total_cost);
    }
}
