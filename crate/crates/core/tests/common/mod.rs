//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use viewplan_core::geometry::VoxelGrid;
use viewplan_core::pipeline::{prepare_scene, MeshSource, PipelineConfig, Scene, SyntheticShape};
use viewplan_core::view_space::ViewSpace;
use viewplan_core::visibility::VisibilityMatrix;
use viewplan_core::Point3;

/// Default-configured scene for a built-in shape, computed once per process.
pub fn scene(shape: SyntheticShape) -> &'static Scene {
    static CACHE: OnceLock<Mutex<HashMap<SyntheticShape, &'static Scene>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(shape).or_insert_with(|| {
        let config = config_for(shape);
        Box::leak(Box::new(prepare_scene(&config).expect("scene")))
    })
}

pub fn config_for(shape: SyntheticShape) -> PipelineConfig {
    PipelineConfig {
        mesh: MeshSource::Synthetic(shape),
        ..PipelineConfig::default()
    }
}

fn cell_at(grid: &VoxelGrid, p: &Point3) -> Option<[i64; 3]> {
    let o = grid.origin();
    let cs = grid.cell_size();
    let d = grid.dims();
    let mut c = [0i64; 3];
    for a in 0..3 {
        let k = ((p[a] - o[a]) / cs).floor() as i64;
        if k < 0 || k >= d[a] as i64 {
            return None;
        }
        c[a] = k;
    }
    Some(c)
}

fn adjacent(a: [i64; 3], b: [i64; 3]) -> bool {
    (0..3).map(|i| (a[i] - b[i]).abs()).sum::<i64>() <= 1
}

/// Cells visited by the segment, in order, found by dense sampling with
/// bisection wherever two consecutive samples are not face neighbors.
pub fn sampled_cells(grid: &VoxelGrid, origin: &Point3, target: &Point3) -> Vec<[i64; 3]> {
    let at = |t: f64| origin + (target - origin) * t;
    let steps = ((target - origin).norm() / grid.cell_size() * 16.0).ceil().max(1.0) as usize;
    let mut cells: Vec<[i64; 3]> = Vec::new();
    let mut prev: Option<(f64, Option<[i64; 3]>)> = None;

    fn refine(
        grid: &VoxelGrid,
        at: &dyn Fn(f64) -> Point3,
        t0: f64,
        c0: Option<[i64; 3]>,
        t1: f64,
        c1: Option<[i64; 3]>,
        depth: u32,
        out: &mut Vec<[i64; 3]>,
    ) {
        let done = match (c0, c1) {
            (Some(a), Some(b)) => adjacent(a, b),
            (None, None) => true,
            _ => false,
        };
        if done || depth == 0 {
            if let Some(b) = c1 {
                if out.last() != Some(&b) {
                    out.push(b);
                }
            }
            return;
        }
        let tm = 0.5 * (t0 + t1);
        let cm = cell_at(grid, &at(tm));
        refine(grid, at, t0, c0, tm, cm, depth - 1, out);
        refine(grid, at, tm, cm, t1, c1, depth - 1, out);
    }

    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let c = cell_at(grid, &at(t));
        match prev {
            None => {
                if let Some(c) = c {
                    cells.push(c);
                }
            }
            Some((tp, cp)) => refine(grid, &at, tp, cp, t, c, 60, &mut cells),
        }
        prev = Some((t, c));
    }
    cells
}

/// Reference for the ray walk: the first occupied cell met before any cell
/// within Chebyshev distance `margin` of the target's cell.
pub fn ray_oracle(grid: &VoxelGrid, origin: &Point3, target: &Point3, margin: usize) -> Option<usize> {
    let goal = cell_at(grid, target).expect("target inside grid");
    for c in sampled_cells(grid, origin, target) {
        if (0..3).all(|a| (c[a] - goal[a]).unsigned_abs() as usize <= margin) {
            return None;
        }
        let key = grid.linear_index([c[0] as usize, c[1] as usize, c[2] as usize]);
        if grid.is_occupied(key) {
            return Some(key);
        }
    }
    None
}

/// Visits every permutation of `items` (Heap's algorithm).
pub fn for_each_permutation(items: &mut [usize], f: &mut dyn FnMut(&[usize])) {
    fn heap(k: usize, items: &mut [usize], f: &mut dyn FnMut(&[usize])) {
        if k <= 1 {
            f(items);
            return;
        }
        for i in 0..k {
            heap(k - 1, items, f);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    let n = items.len();
    heap(n, items, f);
}

/// Shortest open path from `start` through all `stops`, by enumeration.
pub fn brute_force_path_cost(space: &ViewSpace, start: usize, stops: &[usize]) -> f64 {
    let pos = |v: usize| space.views()[v].position;
    let mut best = f64::INFINITY;
    let mut items = stops.to_vec();
    for_each_permutation(&mut items, &mut |perm| {
        let mut cost = 0.0;
        let mut at = start;
        for &v in perm {
            cost += (pos(at) - pos(v)).norm();
            at = v;
        }
        best = best.min(cost);
    });
    best
}

/// Independent constraint check straight from the matrix and positions:
/// every point seen by at least `alpha` views stays covered `alpha` times and
/// no two selected views violate the symmetric separation rule at `beta`.
pub fn check_cover(vis: &VisibilityMatrix, space: &ViewSpace, selected: &[usize], alpha: u32, beta: f64) -> bool {
    let n = space.len();
    let pos = |v: usize| space.views()[v].position;
    let nn: Vec<f64> = (0..n)
        .map(|v| {
            (0..n)
                .filter(|&w| w != v)
                .map(|w| (pos(v) - pos(w)).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    for (i, &v) in selected.iter().enumerate() {
        for &w in &selected[i + 1..] {
            let d = (pos(v) - pos(w)).norm();
            if d <= beta * nn[v] || d <= beta * nn[w] {
                return false;
            }
        }
    }
    for p in 0..vis.point_count() {
        let total = (0..n).filter(|&v| vis.get(v, p)).count();
        if total >= alpha as usize {
            let got = selected.iter().filter(|&&v| vis.get(v, p)).count();
            if got < alpha as usize {
                return false;
            }
        }
    }
    true
}

/// Smallest pairwise distance among the selected views (infinite for fewer
/// than two).
pub fn min_pairwise_distance(space: &ViewSpace, selected: &[usize]) -> f64 {
    let pos = |v: usize| space.views()[v].position;
    let mut best = f64::INFINITY;
    for (i, &v) in selected.iter().enumerate() {
        for &w in &selected[i + 1..] {
            best = best.min((pos(v) - pos(w)).norm());
        }
    }
    best
}
