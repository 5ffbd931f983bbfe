//! Local covariance frames, discrete curvature and the regularity measure.

use serde::{Deserialize, Serialize};

use super::{knn, vec3, NeighborhoodIndex, Point3, PointCloud};
use crate::error::Result;

/// Symmetric 3x3 matrix stored as its upper triangle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymMat3 {
    pub xx: f64,
    pub xy: f64,
    pub xz: f64,
    pub yy: f64,
    pub yz: f64,
    pub zz: f64,
}

impl SymMat3 {
    pub fn from_diagonal(d: [f64; 3]) -> Self {
        Self {
            xx: d[0],
            yy: d[1],
            zz: d[2],
            ..Default::default()
        }
    }

    pub fn to_array(&self) -> [[f64; 3]; 3] {
        [
            [self.xx, self.xy, self.xz],
            [self.xy, self.yy, self.yz],
            [self.xz, self.yz, self.zz],
        ]
    }

    /// Adds `v ⊗ v`.
    pub fn add_outer(&mut self, v: Point3) {
        self.xx += v[0] * v[0];
        self.xy += v[0] * v[1];
        self.xz += v[0] * v[2];
        self.yy += v[1] * v[1];
        self.yz += v[1] * v[2];
        self.zz += v[2] * v[2];
    }

    pub fn mul_vec(&self, v: Point3) -> Point3 {
        vec3::mat_mul(&self.to_array(), v)
    }

    pub fn frobenius(&self) -> f64 {
        (self.xx * self.xx
            + self.yy * self.yy
            + self.zz * self.zz
            + 2.0 * (self.xy * self.xy + self.xz * self.xz + self.yz * self.yz))
            .sqrt()
    }

    pub fn is_zero(&self) -> bool {
        [self.xx, self.xy, self.xz, self.yy, self.yz, self.zz]
            .iter()
            .all(|&v| v == 0.0)
    }
}

/// Sum over the neighbors `q` of `(q - p) ⊗ (q - p)`, with `p` the center point.
pub fn local_covariance(cloud: &PointCloud, center: usize, nbr: &NeighborhoodIndex) -> SymMat3 {
    let pts = cloud.points();
    let p = pts[center];
    let mut c = SymMat3::default();
    for &j in nbr.neighbors(center) {
        c.add_outer(vec3::sub(pts[j], p));
    }
    c
}

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi rotations.
///
/// Eigenvalues are returned in descending order with matching unit
/// eigenvectors; each eigenvector has its first nonzero component
/// non-negative. Equal eigenvalues keep the order in which the rotations
/// left them.
pub fn eigh3(m: &SymMat3) -> ([f64; 3], [Point3; 3]) {
    let mut a = m.to_array();
    // columns of v are the eigenvectors
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    for sweep in 0..64 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        if off == 0.0 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq == 0.0 {
                continue;
            }
            let g = 100.0 * apq.abs();
            if sweep > 3 && a[p][p].abs() + g == a[p][p].abs() && a[q][q].abs() + g == a[q][q].abs()
            {
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = if theta.is_infinite() {
                0.5 / theta
            } else {
                theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
            };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            rotate(&mut a, &mut v, p, q, c, s);
        }
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let mut values = [0.0; 3];
    let mut vectors = [[0.0; 3]; 3];
    for (slot, &i) in order.iter().enumerate() {
        values[slot] = a[i][i];
        let mut e = [v[0][i], v[1][i], v[2][i]];
        if let Some(&first) = e.iter().find(|&&c| c != 0.0) {
            if first < 0.0 {
                e = vec3::scale(e, -1.0);
            }
        }
        vectors[slot] = e;
    }
    (values, vectors)
}

// Applies the rotation J(p, q, c, s) as a ← Jᵀ a J and v ← v J.
fn rotate(a: &mut [[f64; 3]; 3], v: &mut [[f64; 3]; 3], p: usize, q: usize, c: f64, s: f64) {
    for k in 0..3 {
        let akp = a[k][p];
        let akq = a[k][q];
        a[k][p] = c * akp - s * akq;
        a[k][q] = s * akp + c * akq;
    }
    for k in 0..3 {
        let apk = a[p][k];
        let aqk = a[q][k];
        a[p][k] = c * apk - s * aqk;
        a[q][k] = s * apk + c * aqk;
    }
    a[p][q] = 0.0;
    a[q][p] = 0.0;
    for row in v.iter_mut() {
        let vp = row[p];
        let vq = row[q];
        row[p] = c * vp - s * vq;
        row[q] = s * vp + c * vq;
    }
}

/// Orthonormal frame at a point: tangent plane basis plus normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalFrame {
    pub normal: Point3,
    pub tangent1: Point3,
    pub tangent2: Point3,
    /// Covariance eigenvalues, descending; `tangent1` goes with the first,
    /// `normal` with the last.
    pub eigenvalues: [f64; 3],
}

impl LocalFrame {
    /// Frame used when the neighborhood covariance vanishes.
    pub const CANONICAL: LocalFrame = LocalFrame {
        normal: [0.0, 0.0, 1.0],
        tangent1: [1.0, 0.0, 0.0],
        tangent2: [0.0, 1.0, 0.0],
        eigenvalues: [0.0; 3],
    };
}

/// Frames for every point of a cloud, tagged with the neighborhood size used.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFrames {
    pub k: usize,
    pub frames: Vec<LocalFrame>,
}

impl LocalFrames {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn normal(&self, i: usize) -> Point3 {
        self.frames[i].normal
    }
}

/// Per-point frames from the eigen-decomposition of the neighbor covariance.
///
/// Normals are flipped to point away from the cloud centroid; a normal
/// orthogonal to `p - centroid` keeps the sign chosen by [`eigh3`].
pub fn local_frames(cloud: &PointCloud, nbr: &NeighborhoodIndex) -> LocalFrames {
    let centroid = cloud.centroid();
    let frames = cloud
        .points()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let cov = local_covariance(cloud, i, nbr);
            if cov.is_zero() {
                return LocalFrame::CANONICAL;
            }
            let (values, vectors) = eigh3(&cov);
            let mut normal = vectors[2];
            if vec3::dot(normal, vec3::sub(p, centroid)) < 0.0 {
                normal = vec3::scale(normal, -1.0);
            }
            LocalFrame {
                normal,
                tangent1: vectors[0],
                tangent2: vectors[1],
                eigenvalues: values.map(|l| l.max(0.0)),
            }
        })
        .collect();
    LocalFrames { k: nbr.k(), frames }
}

/// Mean absolute cosine between neighbor directions and the normal at `p`.
/// Neighbors coinciding with `p` contribute zero.
pub(crate) fn point_curvature<'a>(
    p: Point3,
    neighbors: impl Iterator<Item = &'a Point3>,
    normal: Point3,
    k: usize,
) -> f64 {
    let mut acc = 0.0;
    for &q in neighbors {
        let d = vec3::sub(q, p);
        let len = vec3::norm(d);
        if len > 0.0 {
            acc += (vec3::dot(d, normal) / len).abs();
        }
    }
    acc / k as f64
}

/// Discrete curvature κ of every point, in `[0, 1]`.
pub fn curvature(cloud: &PointCloud, nbr: &NeighborhoodIndex, frames: &LocalFrames) -> Vec<f64> {
    let pts = cloud.points();
    (0..cloud.len())
        .map(|i| {
            point_curvature(
                pts[i],
                nbr.neighbors(i).iter().map(|&j| &pts[j]),
                frames.normal(i),
                nbr.k(),
            )
        })
        .collect()
}

/// Geometric regularity: the largest, over all points, mean distance of the
/// k neighbors to the tangent plane through the point. Lower is smoother.
pub fn regularity(cloud: &PointCloud, k: usize) -> Result<f64> {
    let nbr = knn(cloud, k)?;
    let frames = local_frames(cloud, &nbr);
    Ok(regularity_with(cloud, &nbr, &frames))
}

/// [`regularity`] with a precomputed neighborhood and frames.
pub fn regularity_with(cloud: &PointCloud, nbr: &NeighborhoodIndex, frames: &LocalFrames) -> f64 {
    let pts = cloud.points();
    let k = nbr.k() as f64;
    (0..cloud.len())
        .map(|i| {
            let p = pts[i];
            let n = frames.normal(i);
            nbr.neighbors(i)
                .iter()
                .map(|&j| vec3::dot(vec3::sub(pts[j], p), n).abs())
                .sum::<f64>()
                / k
        })
        .fold(0.0, f64::max)
}
