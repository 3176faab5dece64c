use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::{Error, Point3, Result, Vector3};

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn new(min: Point3, max: Point3) -> Self {
        Self { min, max }
    }

    /// Cube of side `2 * half_extent` around `center`.
    pub fn cube(center: Point3, half_extent: f64) -> Self {
        let h = Vector3::repeat(half_extent);
        Self::new(center - h, center + h)
    }

    pub fn extent(&self) -> Vector3 {
        self.max - self.min
    }

    pub fn contains(&self, p: &Point3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }
}

/// Dense occupancy grid of cubic cells. Linear cell index is
/// `x + dims[0] * (y + dims[1] * z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    origin: Point3,
    cell_size: f64,
    dims: [usize; 3],
    occupancy: BitSet,
}

impl VoxelGrid {
    pub fn empty(origin: Point3, cell_size: f64, dims: [usize; 3]) -> Result<Self> {
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::InvalidParameter(format!("cell size must be positive, got {cell_size}")));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidParameter(format!("grid dims must be >= 1, got {dims:?}")));
        }
        let total = dims[0]
            .checked_mul(dims[1])
            .and_then(|v| v.checked_mul(dims[2]))
            .ok_or_else(|| Error::InvalidParameter("grid too large".into()))?;
        Ok(Self {
            origin,
            cell_size,
            dims,
            occupancy: BitSet::new(total),
        })
    }

    /// Grid whose cubic cells cover `bounds` with `dims` cells per axis. The
    /// cell size is the largest per-axis extent ratio so non-cubic bounds are
    /// fully covered.
    pub fn covering(bounds: &Aabb, dims: [usize; 3]) -> Result<Self> {
        let e = bounds.extent();
        if dims.contains(&0) {
            return Err(Error::InvalidParameter(format!("grid dims must be >= 1, got {dims:?}")));
        }
        let cell = (0..3).map(|i| e[i] / dims[i] as f64).fold(0.0, f64::max);
        Self::empty(bounds.min, cell, dims)
    }

    pub fn origin(&self) -> Point3 {
        self.origin
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn cell_count(&self) -> usize {
        self.occupancy.len()
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.count_ones()
    }

    pub fn occupancy(&self) -> &BitSet {
        &self.occupancy
    }

    pub fn bounds(&self) -> Aabb {
        let size = Vector3::new(self.dims[0] as f64, self.dims[1] as f64, self.dims[2] as f64) * self.cell_size;
        Aabb::new(self.origin, self.origin + size)
    }

    #[inline]
    pub fn linear_index(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    #[inline]
    pub fn coords_of(&self, index: usize) -> [usize; 3] {
        let x = index % self.dims[0];
        let yz = index / self.dims[0];
        [x, yz % self.dims[1], yz / self.dims[1]]
    }

    /// Cell containing `p`, or `None` outside the grid. Points on the upper
    /// faces belong to the last cell along that axis.
    pub fn cell_of(&self, p: &Point3) -> Option<[usize; 3]> {
        let mut c = [0usize; 3];
        for i in 0..3 {
            let f = ((p[i] - self.origin[i]) / self.cell_size).floor();
            if !(f >= 0.0) {
                return None;
            }
            let k = f as usize;
            c[i] = if k < self.dims[i] {
                k
            } else if p[i] <= self.origin[i] + self.cell_size * self.dims[i] as f64 {
                self.dims[i] - 1
            } else {
                return None;
            };
        }
        Some(c)
    }

    pub fn cell_min_corner(&self, c: [usize; 3]) -> Point3 {
        self.origin + Vector3::new(c[0] as f64, c[1] as f64, c[2] as f64) * self.cell_size
    }

    pub fn cell_center(&self, c: [usize; 3]) -> Point3 {
        self.cell_min_corner(c) + Vector3::repeat(0.5 * self.cell_size)
    }

    pub fn cell_box(&self, c: [usize; 3]) -> Aabb {
        let lo = self.cell_min_corner(c);
        Aabb::new(lo, lo + Vector3::repeat(self.cell_size))
    }

    #[inline]
    pub fn is_occupied(&self, index: usize) -> bool {
        self.occupancy.contains(index)
    }

    pub fn set_occupied(&mut self, index: usize, occupied: bool) {
        self.occupancy.set(index, occupied);
    }
}

/// One representative surface point per occupied voxel.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SurfacePointSet {
    pub points: Vec<Point3>,
    pub voxel_keys: Vec<usize>,
}

impl SurfacePointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Marks every cell holding at least one point as occupied and keeps the
/// first point (in input order) of each occupied cell as its representative.
///
/// Points may sit outside `bounds` by a relative `1e-9` rounding slack; they
/// are clamped into the boundary cell.
pub fn voxelize(points: &[Point3], bounds: &Aabb, dims: [usize; 3]) -> Result<(VoxelGrid, SurfacePointSet)> {
    let mut grid = VoxelGrid::covering(bounds, dims)?;
    let slack = 1e-9 * bounds.extent().amax().max(1.0);
    let mut set = SurfacePointSet::default();
    for (i, p) in points.iter().enumerate() {
        let outside = (0..3).any(|a| p[a] < bounds.min[a] - slack || p[a] > bounds.max[a] + slack);
        if outside || !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
            return Err(Error::PointOutOfBounds { index: i, x: p.x, y: p.y, z: p.z });
        }
        let clamped = Point3::from(p.coords.sup(&bounds.min.coords).inf(&bounds.max.coords));
        let cell = grid
            .cell_of(&clamped)
            .ok_or(Error::PointOutOfBounds { index: i, x: p.x, y: p.y, z: p.z })?;
        let key = grid.linear_index(cell);
        if !grid.is_occupied(key) {
            grid.set_occupied(key, true);
            set.points.push(*p);
            set.voxel_keys.push(key);
        }
    }
    Ok((grid, set))
}
