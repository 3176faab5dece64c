//! Point-to-view visibility: frustum test plus occupancy ray casting through
//! the voxel grid.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::geometry::{SurfacePointSet, VoxelGrid};
use crate::view_space::{CandidateView, ViewSpace};
use crate::{Error, Point3, Result};

/// Pinhole camera with square pixels and the principal point at the image
/// center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub image_width: u32,
    pub image_height: u32,
    /// Vertical field of view in radians.
    pub vertical_fov: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            image_width: 640,
            image_height: 480,
            vertical_fov: 42f64.to_radians(),
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<()> {
        if self.image_width == 0 || self.image_height == 0 {
            return Err(Error::InvalidParameter("image size must be at least 1x1".into()));
        }
        if !(self.vertical_fov > 0.0 && self.vertical_fov < std::f64::consts::PI) {
            return Err(Error::InvalidParameter(format!(
                "vertical fov must be in (0, pi), got {}",
                self.vertical_fov
            )));
        }
        Ok(())
    }

    pub fn focal_length_px(&self) -> f64 {
        0.5 * self.image_height as f64 / (0.5 * self.vertical_fov).tan()
    }

    /// Pixel coordinates of `p` seen from `view`, or `None` when `p` is
    /// behind the camera or outside the image.
    pub fn project(&self, view: &CandidateView, p: &Point3) -> Option<(f64, f64)> {
        let local = view.orientation.inverse_transform_vector(&(p - view.position));
        if local.z <= 0.0 {
            return None;
        }
        let f = self.focal_length_px();
        let (w, h) = (self.image_width as f64, self.image_height as f64);
        let u = f * local.x / local.z + 0.5 * w;
        let v = f * local.y / local.z + 0.5 * h;
        (u >= 0.0 && u < w && v >= 0.0 && v < h).then_some((u, v))
    }
}

/// Walks the cells crossed by the segment `origin -> target` in order and
/// returns the first occupied one. The walk ends successfully once it enters
/// the cell containing `target`; that cell never counts as a blocker.
///
/// The traversal steps from cell boundary to cell boundary along whichever
/// axis is crossed next, so no cell touched by the segment is skipped.
pub fn cast_ray(grid: &VoxelGrid, origin: &Point3, target: &Point3) -> Result<Option<usize>> {
    cast_ray_with_margin(grid, origin, target, 0)
}

/// Like [`cast_ray`], but the walk ends successfully as soon as it enters
/// any cell within Chebyshev distance `margin` of the target's cell.
pub fn cast_ray_with_margin(grid: &VoxelGrid, origin: &Point3, target: &Point3, margin: usize) -> Result<Option<usize>> {
    let target_cell = grid.cell_of(target).ok_or(Error::TargetOutOfBounds)?;
    let dir = target - origin;
    let bounds = grid.bounds();
    let dims = grid.dims();
    let cs = grid.cell_size();
    let gmin = grid.origin();

    let (mut t_enter, mut t_exit) = (0.0f64, 1.0f64);
    for a in 0..3 {
        if dir[a] == 0.0 {
            if origin[a] < bounds.min[a] || origin[a] > bounds.max[a] {
                return Ok(None);
            }
        } else {
            let ta = (bounds.min[a] - origin[a]) / dir[a];
            let tb = (bounds.max[a] - origin[a]) / dir[a];
            t_enter = t_enter.max(ta.min(tb));
            t_exit = t_exit.min(ta.max(tb));
        }
    }
    if t_enter > t_exit {
        return Ok(None);
    }

    let entry = origin + dir * t_enter;
    let mut cell = [0i64; 3];
    let mut step = [0i64; 3];
    for a in 0..3 {
        let k = ((entry[a] - gmin[a]) / cs).floor() as i64;
        cell[a] = k.clamp(0, dims[a] as i64 - 1);
        step[a] = if dir[a] > 0.0 {
            1
        } else if dir[a] < 0.0 {
            -1
        } else {
            0
        };
    }
    // parameter at which the segment leaves the current cell along axis a
    let boundary_t = |a: usize, c: i64| -> f64 {
        match step[a] {
            0 => f64::INFINITY,
            s => {
                let edge = if s > 0 { c + 1 } else { c };
                (gmin[a] + edge as f64 * cs - origin[a]) / dir[a]
            }
        }
    };
    let mut t_next = [boundary_t(0, cell[0]), boundary_t(1, cell[1]), boundary_t(2, cell[2])];

    let near_target = |c: &[i64; 3]| (0..3).all(|a| (c[a] - target_cell[a] as i64).unsigned_abs() as usize <= margin);
    loop {
        if near_target(&cell) {
            return Ok(None);
        }
        let key = grid.linear_index([cell[0] as usize, cell[1] as usize, cell[2] as usize]);
        if grid.is_occupied(key) {
            return Ok(Some(key));
        }
        let mut axis = 0;
        for a in 1..3 {
            if t_next[a] < t_next[axis] {
                axis = a;
            }
        }
        if t_next[axis] > 1.0 {
            return Ok(None);
        }
        cell[axis] += step[axis];
        if cell[axis] < 0 || cell[axis] >= dims[axis] as i64 {
            return Ok(None);
        }
        t_next[axis] = boundary_t(axis, cell[axis]);
    }
}

/// Visibility indicator: `rows[v]` holds bit `p` iff point `p` is visible
/// from view `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisibilityMatrix {
    rows: Vec<BitSet>,
    point_count: usize,
}

const MATRIX_MAGIC: &[u8; 4] = b"VMTX";
const MATRIX_VERSION: u32 = 1;

impl VisibilityMatrix {
    pub fn from_rows(point_count: usize, rows: Vec<BitSet>) -> Result<Self> {
        if let Some(v) = rows.iter().position(|r| r.len() != point_count) {
            return Err(Error::InvalidParameter(format!(
                "row {v} has {} bits, expected {point_count}",
                rows[v].len()
            )));
        }
        Ok(Self { rows, point_count })
    }

    /// Builds the matrix from per-view lists of visible point indices.
    pub fn from_sets(point_count: usize, sets: &[Vec<usize>]) -> Result<Self> {
        let mut rows = Vec::with_capacity(sets.len());
        for (v, set) in sets.iter().enumerate() {
            if let Some(&p) = set.iter().find(|&&p| p >= point_count) {
                return Err(Error::InvalidParameter(format!("view {v} lists point {p} >= {point_count}")));
            }
            rows.push(BitSet::from_indices(point_count, set.iter().copied()));
        }
        Ok(Self { rows, point_count })
    }

    pub fn view_count(&self) -> usize {
        self.rows.len()
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    pub fn row(&self, view: usize) -> &BitSet {
        &self.rows[view]
    }

    pub fn rows(&self) -> &[BitSet] {
        &self.rows
    }

    #[inline]
    pub fn get(&self, view: usize, point: usize) -> bool {
        self.rows[view].contains(point)
    }

    /// Number of views observing each point.
    pub fn column_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.point_count];
        for row in &self.rows {
            for p in row.ones() {
                counts[p] += 1;
            }
        }
        counts
    }

    /// Views observing `point`.
    pub fn column(&self, point: usize) -> BitSet {
        BitSet::from_indices(
            self.rows.len(),
            (0..self.rows.len()).filter(|&v| self.rows[v].contains(point)),
        )
    }

    /// Serializes as: magic `VMTX`, u32 version, u64 view count, u64 point
    /// count (all little-endian), then one row per view of
    /// `ceil(point_count / 8)` bytes with point `p` at bit `p % 8` of byte
    /// `p / 8`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MATRIX_MAGIC)?;
        w.write_all(&MATRIX_VERSION.to_le_bytes())?;
        w.write_all(&(self.rows.len() as u64).to_le_bytes())?;
        w.write_all(&(self.point_count as u64).to_le_bytes())?;
        for row in &self.rows {
            w.write_all(&row.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let bad = |m: &str| Error::InvalidMatrixFile(m.to_string());
        let mut header = [0u8; 24];
        r.read_exact(&mut header).map_err(|_| bad("truncated header"))?;
        if &header[0..4] != MATRIX_MAGIC {
            return Err(bad("bad magic"));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != MATRIX_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let views = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
        let points = u64::from_le_bytes(header[16..24].try_into().unwrap()) as usize;
        let row_bytes = points.div_ceil(8);
        let mut buf = vec![0u8; row_bytes];
        let mut rows = Vec::with_capacity(views);
        for _ in 0..views {
            r.read_exact(&mut buf).map_err(|_| bad("truncated payload"))?;
            rows.push(BitSet::from_le_bytes(points, &buf).ok_or_else(|| bad("padding bits set"))?);
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest).map_err(|_| bad("read error"))? != 0 {
            return Err(bad("trailing bytes"));
        }
        Ok(Self { rows, point_count: points })
    }

    pub fn summary(&self) -> VisibilitySummary {
        VisibilitySummary {
            view_count: self.rows.len(),
            point_count: self.point_count,
            visible_per_view: self.rows.iter().map(BitSet::count_ones).collect(),
        }
    }
}

/// JSON companion of the binary matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilitySummary {
    pub view_count: usize,
    pub point_count: usize,
    pub visible_per_view: Vec<usize>,
}

/// Evaluates the indicator for every (view, point) pair: the point must
/// project inside the image and the ray from the view to it must reach the
/// point's voxel without crossing another occupied voxel. Views are
/// processed in parallel; the result does not depend on scheduling.
pub fn compute_visibility(
    grid: &VoxelGrid,
    points: &SurfacePointSet,
    space: &ViewSpace,
    camera: &CameraModel,
    margin: usize,
) -> Result<VisibilityMatrix> {
    camera.validate()?;
    let rows = space
        .views()
        .par_iter()
        .map(|view| {
            let mut row = BitSet::new(points.len());
            for (i, p) in points.points.iter().enumerate() {
                if camera.project(view, p).is_some() && cast_ray_with_margin(grid, &view.position, p, margin)?.is_none() {
                    row.insert(i);
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    VisibilityMatrix::from_rows(points.len(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{voxelize, Aabb};
    use crate::view_space::look_at;

    fn view_at(position: Point3, target: Point3) -> CandidateView {
        CandidateView {
            id: 0,
            position,
            orientation: look_at(&position, &target),
        }
    }

    #[test]
    fn empty_grid_never_blocks() {
        let grid = VoxelGrid::covering(&Aabb::cube(Point3::origin(), 0.1), [20; 3]).unwrap();
        let hit = cast_ray(&grid, &Point3::new(0.3, -0.2, 0.25), &Point3::new(-0.05, 0.02, 0.0)).unwrap();
        assert_eq!(hit, None);
    }

    #[test]
    fn own_cell_is_excluded() {
        let target = Point3::new(0.011, 0.013, -0.017);
        let (grid, _) = voxelize(&[target], &Aabb::cube(Point3::origin(), 0.1), [20; 3]).unwrap();
        assert_eq!(cast_ray(&grid, &Point3::new(0.0, 0.0, 0.3), &target).unwrap(), None);
    }

    #[test]
    fn wall_blocks_at_nearest_cell() {
        let bounds = Aabb::cube(Point3::origin(), 0.1);
        let mut grid = VoxelGrid::covering(&bounds, [10; 3]).unwrap();
        // wall at x index 6 and 3
        for y in 0..10 {
            for z in 0..10 {
                grid.set_occupied(grid.linear_index([3, y, z]), true);
                grid.set_occupied(grid.linear_index([6, y, z]), true);
            }
        }
        let origin = Point3::new(0.3, 0.013, 0.021);
        let target = Point3::new(-0.095, -0.011, -0.004);
        let hit = cast_ray(&grid, &origin, &target).unwrap().unwrap();
        assert_eq!(grid.coords_of(hit)[0], 6);
        // reversed direction hits the other wall first
        let hit = cast_ray(&grid, &Point3::new(-0.3, 0.0, 0.0), &Point3::new(0.095, 0.0, 0.0)).unwrap();
        assert_eq!(grid.coords_of(hit.unwrap())[0], 3);
    }

    #[test]
    fn target_outside_grid_is_an_error() {
        let grid = VoxelGrid::covering(&Aabb::cube(Point3::origin(), 0.1), [4; 3]).unwrap();
        assert!(matches!(
            cast_ray(&grid, &Point3::origin(), &Point3::new(0.5, 0.0, 0.0)),
            Err(Error::TargetOutOfBounds)
        ));
    }

    #[test]
    fn projection_and_frustum() {
        let cam = CameraModel::default();
        let view = view_at(Point3::new(0.0, 0.0, 0.3), Point3::origin());
        let (u, v) = cam.project(&view, &Point3::origin()).unwrap();
        assert!((u - 320.0).abs() < 1e-9 && (v - 240.0).abs() < 1e-9);
        assert!(cam.project(&view, &Point3::new(0.0, 0.0, 0.5)).is_none());
        assert!(cam.project(&view, &Point3::new(1.0, 0.0, 0.0)).is_none());
    }

    #[test]
    fn isolated_point_is_visible_and_behind_is_not() {
        let p = Point3::new(0.0, 0.0, 0.0);
        let (grid, set) = voxelize(&[p], &Aabb::cube(Point3::origin(), 0.1), [10; 3]).unwrap();
        let positions = [Point3::new(0.0, 0.0, 0.3), Point3::new(0.0, 0.0, -0.3)];
        let space = ViewSpace::from_positions(Point3::new(0.0, 0.0, 0.0), &positions).unwrap();
        let vis = compute_visibility(&grid, &set, &space, &CameraModel::default(), 0).unwrap();
        assert!(vis.get(0, 0));
        assert!(vis.get(1, 0));
        // a view looking away from the point
        let away = ViewSpace::from_positions(Point3::new(0.0, 0.0, 1.0), &[Point3::new(0.0, 0.0, 0.3), Point3::new(0.1, 0.0, 0.3)]).unwrap();
        let vis = compute_visibility(&grid, &set, &away, &CameraModel::default(), 0).unwrap();
        assert!(!vis.get(0, 0) && !vis.get(1, 0));
    }

    #[test]
    fn binary_format_layout() {
        let vis = VisibilityMatrix::from_sets(10, &[vec![0, 9], vec![3]]).unwrap();
        let mut buf = Vec::new();
        vis.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[0..4], b"VMTX");
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(buf[16..24].try_into().unwrap()), 10);
        assert_eq!(&buf[24..], &[0b0000_0001, 0b0000_0010, 0b0000_1000, 0]);
        assert_eq!(VisibilityMatrix::read_binary(&buf[..]).unwrap(), vis);
        assert!(VisibilityMatrix::read_binary(&buf[..buf.len() - 1]).is_err());
        assert_eq!(vis.summary().visible_per_view, vec![2, 1]);
        assert_eq!(vis.column_counts(), vec![1, 0, 0, 1, 0, 0, 0, 0, 0, 1]);
    }
}
