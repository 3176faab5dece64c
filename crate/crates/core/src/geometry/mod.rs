//! Mesh input, normalization into the planning workspace, surface sampling and
//! voxelization.

mod io;
mod mesh;
pub mod primitives;
mod sampling;
mod voxel;

pub use io::{load_mesh, parse_obj, parse_ply};
pub use mesh::{normalize_mesh, TriangleMesh};
pub use sampling::sample_surface_points;
pub use voxel::{voxelize, Aabb, SurfacePointSet, VoxelGrid};
