//! Differentiable regularizers over the adversarial cloud's coordinates.
//!
//! Every loss returns its value together with the gradient with respect to
//! the adversarial points. Discrete selections (nearest-neighbor
//! assignments, the Hausdorff maximizer, the adversarial kNN topology) and
//! the benign normals / curvatures are treated as constants; callers
//! refresh them between optimization steps.

mod correspondence;
mod curvature;
mod distance;

pub use correspondence::Correspondence;
pub use curvature::{curvature_consistency, BenignGeometry};
pub use distance::{chamfer, chamfer_with, hausdorff, hausdorff_with, l2_perturbation};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom::{vec3, NeighborhoodIndex, Point3, PointCloud};

/// A loss value and its gradient over the adversarial points.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub gradient: Vec<Point3>,
}

impl LossValue {
    pub fn zero(n: usize) -> Self {
        Self {
            value: 0.0,
            gradient: vec![[0.0; 3]; n],
        }
    }

    /// `self += weight * other`
    pub fn add_scaled(&mut self, weight: f64, other: &LossValue) {
        debug_assert_eq!(self.gradient.len(), other.gradient.len());
        self.value += weight * other.value;
        for (g, o) in self.gradient.iter_mut().zip(&other.gradient) {
            vec3::add_assign(g, vec3::scale(*o, weight));
        }
    }
}

/// Weights of the Hausdorff and curvature terms relative to Chamfer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoWeights {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Default for GeoWeights {
    fn default() -> Self {
        Self {
            lambda1: 0.1,
            lambda2: 1.0,
        }
    }
}

/// Which geometry terms take part in the combined objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermMask {
    pub chamfer: bool,
    pub hausdorff: bool,
    pub curvature: bool,
}

impl TermMask {
    pub const ALL: TermMask = TermMask {
        chamfer: true,
        hausdorff: true,
        curvature: true,
    };
}

impl Default for TermMask {
    fn default() -> Self {
        Self::ALL
    }
}

/// Combined geometry-aware loss: Chamfer + λ1·Hausdorff + λ2·curvature consistency.
pub fn geo_loss(
    adv: &PointCloud,
    benign: &PointCloud,
    benign_geom: &BenignGeometry,
    adv_nbr: &NeighborhoodIndex,
    corr: &Correspondence,
    weights: GeoWeights,
) -> Result<LossValue> {
    geo_loss_masked(
        adv,
        benign,
        benign_geom,
        adv_nbr,
        corr,
        weights,
        TermMask::ALL,
    )
}

/// [`geo_loss`] restricted to the terms enabled in `mask`.
pub fn geo_loss_masked(
    adv: &PointCloud,
    benign: &PointCloud,
    benign_geom: &BenignGeometry,
    adv_nbr: &NeighborhoodIndex,
    corr: &Correspondence,
    weights: GeoWeights,
    mask: TermMask,
) -> Result<LossValue> {
    let mut total = LossValue::zero(adv.len());
    if mask.chamfer {
        total.add_scaled(1.0, &chamfer_with(adv, benign, corr)?);
    }
    if mask.hausdorff {
        total.add_scaled(weights.lambda1, &hausdorff_with(adv, benign, corr)?);
    }
    if mask.curvature {
        total.add_scaled(
            weights.lambda2,
            &curvature_consistency(adv, benign_geom, adv_nbr, corr)?,
        );
    }
    Ok(total)
}
