//! Candidate views on an object-centric hemisphere and the pairwise distance
//! structures used by the view-separation constraint.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::{Error, Point3, Result, Vector3};

/// A camera pose. `orientation` maps camera axes to world axes with the
/// camera looking along its local +z, local +x to the image right and local
/// +y to the image bottom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateView {
    pub id: usize,
    pub position: Point3,
    pub orientation: UnitQuaternion<f64>,
}

impl CandidateView {
    /// World-space optical axis.
    pub fn optical_axis(&self) -> Vector3 {
        self.orientation * Vector3::z()
    }
}

/// Orientation looking from `eye` at `target` with world +z as the up hint.
/// When the optical axis is parallel to +z, world +y serves as the hint.
pub fn look_at(eye: &Point3, target: &Point3) -> UnitQuaternion<f64> {
    let forward = (target - eye).normalize();
    let mut right = forward.cross(&Vector3::z());
    if right.norm() < 1e-9 {
        right = forward.cross(&Vector3::y());
    }
    let right = right.normalize();
    let down = forward.cross(&right);
    let m = Matrix3::from_columns(&[right, down, forward]);
    UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(m))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewSpace {
    views: Vec<CandidateView>,
    center: Point3,
    radius: f64,
    distance_table: Vec<f64>,
    nn_distance: Vec<f64>,
}

impl ViewSpace {
    /// Views at arbitrary distinct positions, all looking at `center`.
    /// The radius is the largest view distance from the center.
    pub fn from_positions(center: Point3, positions: &[Point3]) -> Result<Self> {
        let radius = positions.iter().map(|p| (p - center).norm()).fold(0.0, f64::max);
        Self::build(center, radius, positions)
    }

    fn build(center: Point3, radius: f64, positions: &[Point3]) -> Result<Self> {
        let n = positions.len();
        if n < 2 {
            return Err(Error::TooFewViews(n));
        }
        let views: Vec<CandidateView> = positions
            .iter()
            .enumerate()
            .map(|(id, p)| CandidateView {
                id,
                position: *p,
                orientation: look_at(p, &center),
            })
            .collect();
        let mut distance_table = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = (positions[i] - positions[j]).norm();
                distance_table[i * n + j] = d;
                distance_table[j * n + i] = d;
            }
        }
        let mut space = Self {
            views,
            center,
            radius,
            distance_table,
            nn_distance: Vec::new(),
        };
        space.nn_distance = nearest_neighbor_distances(&space)?;
        if let Some(v) = space.nn_distance.iter().position(|&d| !(d > 0.0)) {
            return Err(Error::InvalidParameter(format!("view {v} coincides with another view")));
        }
        Ok(space)
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    pub fn views(&self) -> &[CandidateView] {
        &self.views
    }

    pub fn view(&self, id: usize) -> Result<&CandidateView> {
        self.views.get(id).ok_or(Error::UnknownView { id, count: self.views.len() })
    }

    pub fn center(&self) -> Point3 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.distance_table[a * self.views.len() + b]
    }

    /// Distance from each view to its nearest other view.
    pub fn nn_distance(&self) -> &[f64] {
        &self.nn_distance
    }
}

/// `n` views spread over the upper hemisphere of radius `radius` around
/// `center` by a Fibonacci spiral, each looking at the center.
///
/// View `i` sits at height `radius * (i + 0.5) / n` above the center and
/// azimuth `i * golden_angle`, so every view is strictly above the equator.
pub fn generate_hemisphere_views(n: usize, center: Point3, radius: f64) -> Result<ViewSpace> {
    if n < 2 {
        return Err(Error::TooFewViews(n));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("view radius must be positive, got {radius}")));
    }
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let positions: Vec<Point3> = (0..n)
        .map(|i| {
            let z = (i as f64 + 0.5) / n as f64;
            let ring = (1.0 - z * z).sqrt();
            let phi = golden_angle * i as f64;
            center + Vector3::new(ring * phi.cos(), ring * phi.sin(), z) * radius
        })
        .collect();
    ViewSpace::build(center, radius, &positions)
}

/// For each view, the smallest distance-table entry to any other view.
pub fn nearest_neighbor_distances(space: &ViewSpace) -> Result<Vec<f64>> {
    let n = space.views.len();
    if n < 2 {
        return Err(Error::TooFewViews(n));
    }
    Ok((0..n)
        .map(|v| {
            (0..n)
                .filter(|&u| u != v)
                .map(|u| space.distance_table[v * n + u])
                .fold(f64::INFINITY, f64::min)
        })
        .collect())
}

/// JSON form of a view space: center, radius and poses. Distances are
/// recomputed on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ViewSpaceFile {
    pub center: [f64; 3],
    pub radius: f64,
    pub views: Vec<PoseRecord>,
}

/// Position in meters plus orientation quaternion `(w, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub id: usize,
    pub position: [f64; 3],
    pub quaternion: [f64; 4],
}

impl From<&CandidateView> for PoseRecord {
    fn from(v: &CandidateView) -> Self {
        let q = v.orientation.quaternion();
        Self {
            id: v.id,
            position: [v.position.x, v.position.y, v.position.z],
            quaternion: [q.w, q.i, q.j, q.k],
        }
    }
}

impl From<&ViewSpace> for ViewSpaceFile {
    fn from(space: &ViewSpace) -> Self {
        Self {
            center: [space.center.x, space.center.y, space.center.z],
            radius: space.radius,
            views: space.views.iter().map(PoseRecord::from).collect(),
        }
    }
}

impl TryFrom<&ViewSpaceFile> for ViewSpace {
    type Error = Error;

    fn try_from(file: &ViewSpaceFile) -> Result<Self> {
        for (i, v) in file.views.iter().enumerate() {
            if v.id != i {
                return Err(Error::InvalidParameter(format!("view record {i} has id {}", v.id)));
            }
        }
        let positions: Vec<Point3> = file.views.iter().map(|v| Point3::from(v.position)).collect();
        ViewSpace::build(Point3::from(file.center), file.radius, &positions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> ViewSpace {
        let pts = [0.0, 1.0, 3.0].map(|x| Point3::new(x, 0.0, 1.0));
        ViewSpace::from_positions(Point3::origin(), &pts).unwrap()
    }

    #[test]
    fn two_views() {
        let s = generate_hemisphere_views(2, Point3::origin(), 1.0).unwrap();
        assert!(s.distance(0, 1) > 0.0);
        assert_eq!(s.distance(0, 1), s.distance(1, 0));
        assert!(matches!(generate_hemisphere_views(1, Point3::origin(), 1.0), Err(Error::TooFewViews(1))));
    }

    #[test]
    fn collinear_nearest_neighbors() {
        assert_eq!(nearest_neighbor_distances(&line()).unwrap(), vec![1.0, 1.0, 2.0]);
    }

    #[test]
    fn default_hemisphere_geometry() {
        let c = Point3::new(0.0, 0.0, 0.0);
        let s = generate_hemisphere_views(144, c, 0.3).unwrap();
        assert_eq!(s.len(), 144);
        for v in s.views() {
            let r = (v.position - c).norm();
            assert!((r - 0.3).abs() <= 1e-9);
            assert!(v.position.z >= c.z);
            assert!((v.orientation.quaternion().norm() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn nn_spread_regression() {
        let s = generate_hemisphere_views(144, Point3::origin(), 0.3).unwrap();
        let nn = s.nn_distance();
        let ratio = nn.iter().cloned().fold(0.0, f64::max) / nn.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(ratio <= 2.0, "ratio {ratio}");
        assert!((ratio - NN_RATIO_144).abs() < 1e-9, "ratio {ratio}");
    }

    // frozen from the layout above
    const NN_RATIO_144: f64 = 1.120469327273414;

    #[test]
    fn nn_matches_brute_force() {
        let s = generate_hemisphere_views(144, Point3::new(0.1, -0.2, 0.05), 0.3).unwrap();
        let views = s.views();
        for (i, a) in views.iter().enumerate() {
            let mut best = f64::INFINITY;
            for (j, b) in views.iter().enumerate() {
                if i != j {
                    best = best.min((a.position - b.position).norm());
                }
            }
            assert_eq!(s.nn_distance()[i], best);
            assert!(best > 0.0);
        }
    }

    #[test]
    fn distance_table_is_a_metric() {
        let s = generate_hemisphere_views(40, Point3::origin(), 0.3).unwrap();
        for a in 0..40 {
            assert_eq!(s.distance(a, a), 0.0);
            for b in 0..40 {
                assert_eq!(s.distance(a, b), s.distance(b, a));
                for c in (0..40).step_by(7) {
                    assert!(s.distance(a, c) <= s.distance(a, b) + s.distance(b, c) + 1e-15);
                }
            }
        }
    }

    #[test]
    fn deterministic_layout() {
        let a = generate_hemisphere_views(144, Point3::origin(), 0.3).unwrap();
        let b = generate_hemisphere_views(144, Point3::origin(), 0.3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn views_look_at_center() {
        let c = Point3::new(0.2, 0.1, -0.1);
        let mut positions: Vec<Point3> = generate_hemisphere_views(60, c, 0.3)
            .unwrap()
            .views()
            .iter()
            .map(|v| v.position)
            .collect();
        positions.push(c + Vector3::new(0.0, 0.0, 0.3)); // zenith fallback
        let s = ViewSpace::from_positions(c, &positions).unwrap();
        for v in s.views() {
            let want = (c - v.position).normalize();
            let angle = v.optical_axis().angle(&want);
            assert!(angle <= 1e-6, "view {} off by {angle}", v.id);
            let m = v.orientation.to_rotation_matrix();
            assert!((m.matrix().determinant() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn file_roundtrip() {
        let s = generate_hemisphere_views(20, Point3::new(0.0, 0.0, 0.1), 0.3).unwrap();
        let file = ViewSpaceFile::from(&s);
        let json = serde_json::to_string(&file).unwrap();
        let back = ViewSpace::try_from(&serde_json::from_str::<ViewSpaceFile>(&json).unwrap()).unwrap();
        assert_eq!(back.len(), 20);
        for (a, b) in back.views().iter().zip(s.views()) {
            assert_eq!(a.position, b.position);
        }
    }
}
