//! Point cloud container and geometry kernels.

mod cloud;
mod frames;
mod knn;
pub(crate) mod mesh;
mod sampling;
mod sor;
pub mod vec3;

pub use cloud::{normalize_unit_ball, PointCloud};
pub use frames::{
    curvature, eigh3, local_covariance, local_frames, regularity, regularity_with, LocalFrame,
    LocalFrames, SymMat3,
};
pub use knn::{knn, nearest_index, NeighborhoodIndex};
pub use mesh::{sample_mesh_surface, TriangleMesh};
pub use sampling::fps;
pub use sor::{sor_defense, sor_keep_indices, DEFAULT_K_SOR};

/// A point in 3-space.
pub type Point3 = [f64; 3];
