use crate::{Error, Point3, Result, Vector3};

/// Triangle soup with shared vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Validates finiteness, index ranges and non-emptiness.
    pub fn new(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::EmptyMesh);
        }
        if let Some(i) = vertices
            .iter()
            .position(|v| !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()))
        {
            return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
        }
        for (f, face) in faces.iter().enumerate() {
            if let Some(&bad) = face.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "face {f} references vertex {bad} but the mesh has {} vertices",
                    vertices.len()
                )));
            }
        }
        Ok(Self { vertices, faces })
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn triangle(&self, face: usize) -> [Point3; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.triangle(face);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Center of the axis-aligned bounding box and the largest vertex
    /// distance from it.
    pub fn bounding_sphere(&self) -> (Point3, f64) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        let center = nalgebra::center(&lo, &hi);
        let radius = self
            .vertices
            .iter()
            .map(|v| (v - center).norm())
            .fold(0.0, f64::max);
        (center, radius)
    }
}

/// Uniformly scales and translates `mesh` so that its bounding sphere (AABB
/// center, max vertex distance) becomes `(center, target_radius)`.
pub fn normalize_mesh(mesh: &TriangleMesh, target_radius: f64, center: Point3) -> Result<TriangleMesh> {
    if !(target_radius > 0.0 && target_radius.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target radius must be positive, got {target_radius}"
        )));
    }
    let (old_center, radius) = mesh.bounding_sphere();
    if radius <= 0.0 {
        return Err(Error::DegenerateMesh);
    }
    let scale = target_radius / radius;
    let offset: Vector3 = center.coords;
    let vertices = mesh
        .vertices
        .iter()
        .map(|v| Point3::from((v - old_center) * scale + offset))
        .collect();
    Ok(TriangleMesh {
        vertices,
        faces: mesh.faces.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives;
    use proptest::prelude::*;

    fn max_dist(mesh: &TriangleMesh, c: Point3) -> f64 {
        mesh.vertices().iter().map(|v| (v - c).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn rejects_bad_meshes() {
        assert!(matches!(TriangleMesh::new(vec![Point3::origin()], vec![]), Err(Error::EmptyMesh)));
        let v = vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)];
        assert!(TriangleMesh::new(v.clone(), vec![[0, 1, 3]]).is_err());
        let mut nan = v;
        nan[1].y = f64::NAN;
        assert!(TriangleMesh::new(nan, vec![[0, 1, 2]]).is_err());
    }

    #[test]
    fn unit_cube_to_small_sphere() {
        let cube = primitives::cuboid(Point3::origin(), Vector3::new(1.0, 1.0, 1.0));
        let out = normalize_mesh(&cube, 0.1, Point3::origin()).unwrap();
        assert!((max_dist(&out, Point3::origin()) - 0.1).abs() < 1e-12);
        assert_eq!(out.faces(), cube.faces());
    }

    #[test]
    fn degenerate_mesh_is_rejected() {
        let p = Point3::new(1.0, 2.0, 3.0);
        let mesh = TriangleMesh::new(vec![p, p, p], vec![[0, 1, 2]]).unwrap();
        assert!(matches!(normalize_mesh(&mesh, 0.1, Point3::origin()), Err(Error::DegenerateMesh)));
    }

    proptest! {
        #[test]
        fn normalization_is_exact_and_idempotent(
            coords in proptest::collection::vec(-5.0f64..5.0, 9..60),
            cx in -1.0f64..1.0, cy in -1.0f64..1.0, cz in -1.0f64..1.0,
        ) {
            let vertices: Vec<Point3> = coords.chunks_exact(3).map(|c| Point3::new(c[0], c[1], c[2])).collect();
            let faces: Vec<[usize; 3]> = (0..vertices.len() - 2).map(|i| [i, i + 1, i + 2]).collect();
            let mesh = TriangleMesh::new(vertices, faces).unwrap();
            prop_assume!(mesh.bounding_sphere().1 > 1e-3);
            let center = Point3::new(cx, cy, cz);
            let once = normalize_mesh(&mesh, 0.1, center).unwrap();
            let d = max_dist(&once, center);
            prop_assert!((d - 0.1).abs() <= 1e-9, "max distance {}", d);
            let twice = normalize_mesh(&once, 0.1, center).unwrap();
            for (a, b) in once.vertices().iter().zip(twice.vertices()) {
                prop_assert!((a - b).amax() <= 1e-9);
            }
        }
    }
}
