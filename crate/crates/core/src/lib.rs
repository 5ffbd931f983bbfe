//! Geometry-aware adversarial point clouds.
//!
//! The crate is organised bottom-up:
//!
//! * [`geom`] holds the point cloud container and the non-differentiable
//!   kernels (kNN, local frames, discrete curvature, regularity, FPS, SOR).
//! * [`losses`] holds the differentiable regularizers with analytic
//!   gradients (Chamfer, Hausdorff, curvature consistency, L2).
//! * [`classifier`] is a small shared-MLP / max-pool point-set network with
//!   hand-written forward and backward passes.
//! * [`attack`] drives the optimization (plain and tangent-jittered).
//! * [`eval`] reproduces the measurement protocols (SOR sweeps, regularity,
//!   ablations, re-sampling robustness).
//! * [`io`] and [`dataset`] cover file formats and the synthetic corpus.

pub mod attack;
pub mod classifier;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod geom;
pub mod io;
pub mod losses;
pub mod optim;

pub use error::{Error, Result};
pub use geom::{Point3, PointCloud};
