use serde::{Deserialize, Serialize};

use super::{vec3, Point3};
use crate::error::{Error, Result};

/// An ordered set of 3D points with an optional class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Point3>,
    pub label: Option<usize>,
}

impl PointCloud {
    /// Builds a cloud, rejecting non-finite coordinates.
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            points,
            label: None,
        })
    }

    pub fn with_label(mut self, label: usize) -> Self {
        self.label = Some(label);
        self
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point3> {
        self.points
    }

    /// Replaces the coordinates, keeping the label.
    pub(crate) fn from_parts(points: Vec<Point3>, label: Option<usize>) -> Self {
        debug_assert!(points.iter().flatten().all(|c| c.is_finite()));
        Self { points, label }
    }

    /// Keeps the points at `indices`, in the order given.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        let points = indices.iter().map(|&i| self.points[i]).collect();
        Self::from_parts(points, self.label)
    }

    /// Adds a per-point offset.
    pub fn displaced(&self, offsets: &[Point3]) -> PointCloud {
        assert_eq!(offsets.len(), self.len());
        let points = self
            .points
            .iter()
            .zip(offsets)
            .map(|(&p, &o)| vec3::add(p, o))
            .collect();
        Self::from_parts(points, self.label)
    }

    pub fn centroid(&self) -> Point3 {
        let mut c = [0.0; 3];
        for &p in &self.points {
            vec3::add_assign(&mut c, p);
        }
        let n = self.points.len().max(1) as f64;
        vec3::scale(c, 1.0 / n)
    }

    pub(crate) fn require(&self, need: usize) -> Result<()> {
        if self.len() < need {
            Err(Error::InsufficientPoints {
                have: self.len(),
                need,
            })
        } else {
            Ok(())
        }
    }
}

/// Centers the cloud at its centroid and scales the farthest point to norm 1.
///
/// A cloud whose points all coincide collapses to the origin.
pub fn normalize_unit_ball(cloud: &PointCloud) -> PointCloud {
    let c = cloud.centroid();
    let centered: Vec<Point3> = cloud.points.iter().map(|&p| vec3::sub(p, c)).collect();
    let max_norm = centered.iter().map(|&p| vec3::norm(p)).fold(0.0, f64::max);
    let points = if max_norm > 0.0 {
        centered
            .into_iter()
            .map(|p| vec3::scale(p, 1.0 / max_norm))
            .collect()
    } else {
        centered
    };
    PointCloud::from_parts(points, cloud.label)
}
