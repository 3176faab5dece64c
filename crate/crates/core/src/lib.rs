//! One-shot view planning for object reconstruction.
//!
//! Given a proxy mesh of an object, the planner samples and voxelizes its
//! surface, builds a hemispherical candidate view space, computes which
//! surface points each view observes, selects the minimum set of views that
//! observes every point at least `alpha` times while keeping selected views
//! apart, and finally orders the selection into the shortest open path from
//! an initial view.
//!
//! The stages are exposed individually and chained by [`pipeline::run_plan`].

pub mod beta_search;
pub mod bits;
pub mod cover;
pub mod error;
pub mod geometry;
pub mod path;
pub mod pipeline;
pub mod view_space;
pub mod visibility;

pub use error::{Error, Result};

/// 3D point in workspace coordinates (meters).
pub type Point3 = nalgebra::Point3<f64>;
/// 3D vector in workspace coordinates.
pub type Vector3 = nalgebra::Vector3<f64>;
