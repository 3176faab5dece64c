use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TriangleMesh;
use crate::{Error, Point3, Result};

/// Draws `n_samples` points uniformly over the mesh surface: a face is chosen
/// with probability proportional to its area, then a point inside it with
/// uniform barycentric weights. Deterministic for a fixed seed.
pub fn sample_surface_points(mesh: &TriangleMesh, n_samples: usize, seed: u64) -> Result<Vec<Point3>> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
    }
    let areas: Vec<f64> = (0..mesh.faces().len()).map(|f| mesh.face_area(f)).collect();
    let faces = WeightedIndex::new(&areas).map_err(|_| Error::ZeroArea)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let [a, b, c] = mesh.triangle(faces.sample(&mut rng));
        let r1: f64 = rng.gen();
        let r2: f64 = rng.gen();
        let s = r1.sqrt();
        let p = a.coords * (1.0 - s) + b.coords * (s * (1.0 - r2)) + c.coords * (s * r2);
        out.push(Point3::from(p));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vector3;

    fn tri() -> TriangleMesh {
        TriangleMesh::new(
            vec![
                Point3::new(0.1, -0.2, 0.3),
                Point3::new(0.5, 0.1, -0.1),
                Point3::new(-0.3, 0.4, 0.2),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn samples_lie_on_the_triangle() {
        let mesh = tri();
        let [a, b, c] = mesh.triangle(0);
        let n: Vector3 = (b - a).cross(&(c - a)).normalize();
        let pts = sample_surface_points(&mesh, 100, 7).unwrap();
        assert_eq!(pts.len(), 100);
        for p in &pts {
            assert!((p - a).dot(&n).abs() < 1e-9);
            for (u, v) in [(a, b), (b, c), (c, a)] {
                assert!((v - u).cross(&(p - u)).dot(&n) >= -1e-12);
            }
        }
    }

    #[test]
    fn same_seed_same_points() {
        let mesh = tri();
        assert_eq!(
            sample_surface_points(&mesh, 500, 3).unwrap(),
            sample_surface_points(&mesh, 500, 3).unwrap()
        );
        assert_ne!(
            sample_surface_points(&mesh, 500, 3).unwrap(),
            sample_surface_points(&mesh, 500, 4).unwrap()
        );
    }

    #[test]
    fn area_weighted_face_choice() {
        // big triangle has area 4.5, small one 0.5 (9:1)
        let mesh = TriangleMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(3.0, 0.0, 0.0),
                Point3::new(0.0, 3.0, 0.0),
                Point3::new(10.0, 0.0, 0.0),
                Point3::new(11.0, 0.0, 0.0),
                Point3::new(10.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2], [3, 4, 5]],
        )
        .unwrap();
        for seed in 0..5 {
            let pts = sample_surface_points(&mesh, 10_000, seed).unwrap();
            let on_big = pts.iter().filter(|p| p.x < 5.0).count();
            // 9000 +- 3 sigma, sigma = sqrt(10000 * 0.9 * 0.1) = 30
            assert!((8910..=9090).contains(&on_big), "seed {seed}: {on_big}");
            assert!((8700..=9300).contains(&on_big));
        }
    }

    #[test]
    fn zero_area_is_an_error() {
        let mesh = TriangleMesh::new(
            vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0), Point3::new(2.0, 0.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert!(matches!(sample_surface_points(&mesh, 10, 0), Err(Error::ZeroArea)));
        assert!(sample_surface_points(&tri(), 0, 0).is_err());
    }
}
