use super::{vec3, Point3, PointCloud};
use crate::error::{Error, Result};

/// Per-point k-nearest-neighbor lists (self excluded) with their distances.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodIndex {
    k: usize,
    indices: Vec<usize>,
    distances: Vec<f64>,
}

impl NeighborhoodIndex {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of points indexed.
    pub fn len(&self) -> usize {
        if self.k == 0 {
            0
        } else {
            self.indices.len() / self.k
        }
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.indices[i * self.k..(i + 1) * self.k]
    }

    /// Euclidean distances matching [`neighbors`](Self::neighbors), non-decreasing.
    pub fn distances(&self, i: usize) -> &[f64] {
        &self.distances[i * self.k..(i + 1) * self.k]
    }
}

/// Exact k-nearest neighbors by exhaustive scan.
///
/// Ordering is by squared distance, ties broken by lower index. The query
/// point itself is never reported, duplicates of it are.
pub fn knn(cloud: &PointCloud, k: usize) -> Result<NeighborhoodIndex> {
    let n = cloud.len();
    if k == 0 {
        return Err(Error::InvalidCount {
            count: 0,
            max: n.saturating_sub(1),
        });
    }
    cloud.require(k + 1)?;
    let pts = cloud.points();
    let mut indices = Vec::with_capacity(n * k);
    let mut distances = Vec::with_capacity(n * k);
    // (squared distance, index), kept sorted
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for (i, &p) in pts.iter().enumerate() {
        best.clear();
        for (j, &q) in pts.iter().enumerate() {
            if j == i {
                continue;
            }
            let d2 = vec3::dist2(p, q);
            if best.len() == k {
                // Later indices lose ties, so only a strictly smaller distance enters.
                if d2 >= best[k - 1].0 {
                    continue;
                }
                best.pop();
            }
            let pos = best.partition_point(|&(bd, _)| bd <= d2);
            best.insert(pos, (d2, j));
        }
        for &(d2, j) in &best {
            indices.push(j);
            distances.push(d2.sqrt());
        }
    }
    Ok(NeighborhoodIndex {
        k,
        indices,
        distances,
    })
}

/// Index and squared distance of the point of `cloud` nearest to `q`
/// (lowest index on ties). `cloud` must be non-empty.
#[inline]
pub fn nearest_index(q: Point3, cloud: &[Point3]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, &p) in cloud.iter().enumerate() {
        let d2 = vec3::dist2(q, p);
        if d2 < best.1 {
            best = (j, d2);
        }
    }
    best
}
