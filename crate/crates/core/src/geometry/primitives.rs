//! Closed test meshes: subdivided icosahedron sphere, axis-aligned box and an
//! extruded L profile.

use std::collections::HashMap;

use super::TriangleMesh;
use crate::{Point3, Vector3};

/// Regular icosahedron with circumradius `radius`.
pub fn icosahedron(center: Point3, radius: f64) -> TriangleMesh {
    let (v, f) = unit_icosahedron();
    let vertices = v.iter().map(|d| center + d * radius).collect();
    TriangleMesh::new(vertices, f).expect("icosahedron is valid")
}

/// Sphere approximated by an icosahedron subdivided `subdivisions` times
/// (20 * 4^subdivisions faces) with vertices projected to the sphere.
pub fn icosphere(center: Point3, radius: f64, subdivisions: u32) -> TriangleMesh {
    let (mut dirs, mut faces) = unit_icosahedron();
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, dirs: &mut Vec<Vector3>| {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                dirs.push(((dirs[a] + dirs[b]) * 0.5).normalize());
                dirs.len() - 1
            })
        };
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut dirs);
            let bc = mid(b, c, &mut dirs);
            let ca = mid(c, a, &mut dirs);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let vertices = dirs.iter().map(|d| center + d * radius).collect();
    TriangleMesh::new(vertices, faces).expect("icosphere is valid")
}

fn unit_icosahedron() -> (Vec<Vector3>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ];
    let dirs = raw.iter().map(|&(x, y, z)| Vector3::new(x, y, z).normalize()).collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (dirs, faces)
}

/// Axis-aligned box with full edge lengths `size`.
pub fn cuboid(center: Point3, size: Vector3) -> TriangleMesh {
    let h = size * 0.5;
    let vertices: Vec<Point3> = (0..8)
        .map(|i| {
            let s = |bit: usize| if i >> bit & 1 == 1 { 1.0 } else { -1.0 };
            center + Vector3::new(s(0) * h.x, s(1) * h.y, s(2) * h.z)
        })
        .collect();
    let quads = [
        [0, 2, 3, 1], // -z
        [4, 5, 7, 6], // +z
        [0, 1, 5, 4], // -y
        [2, 6, 7, 3], // +y
        [0, 4, 6, 2], // -x
        [1, 3, 7, 5], // +x
    ];
    let faces = quads
        .iter()
        .flat_map(|&[a, b, c, d]| [[a, b, c], [a, c, d]])
        .collect();
    TriangleMesh::new(vertices, faces).expect("cuboid is valid")
}

/// L-shaped prism: the profile `(0,0) (2,0) (2,1) (1,1) (1,2) (0,2)` scaled
/// by `arm / 2` in the xz-plane, extruded by `depth` along y, and centered on
/// `center`.
pub fn l_shape(center: Point3, arm: f64, depth: f64) -> TriangleMesh {
    let profile = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)];
    let s = arm / 2.0;
    let mut vertices = Vec::with_capacity(12);
    for y in [-0.5 * depth, 0.5 * depth] {
        for &(px, pz) in &profile {
            vertices.push(center + Vector3::new((px - 1.0) * s, y, (pz - 1.0) * s));
        }
    }
    // fan from the reflex corner (index 3) triangulates the profile
    let cap = [[3, 4, 5], [3, 5, 0], [3, 0, 1], [3, 1, 2]];
    let mut faces = Vec::new();
    for [a, b, c] in cap {
        faces.push([a, c, b]);
        faces.push([a + 6, b + 6, c + 6]);
    }
    for i in 0..6 {
        let j = (i + 1) % 6;
        faces.push([i, j, j + 6]);
        faces.push([i, j + 6, i + 6]);
    }
    TriangleMesh::new(vertices, faces).expect("l-shape is valid")
}
