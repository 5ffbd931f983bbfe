use super::{knn, PointCloud};
use crate::error::{Error, Result};

/// Neighbor count used by the outlier-removal defense unless overridden.
pub const DEFAULT_K_SOR: usize = 16;

/// Indices kept by [`sor_defense`], in original order.
pub fn sor_keep_indices(cloud: &PointCloud, k_sor: usize, drop_ratio: f64) -> Result<Vec<usize>> {
    if !(0.0..1.0).contains(&drop_ratio) {
        return Err(Error::InvalidRatio(drop_ratio));
    }
    let n = cloud.len();
    let drop = (drop_ratio * n as f64).floor() as usize;
    if drop == 0 {
        return Ok((0..n).collect());
    }
    let nbr = knn(cloud, k_sor)?;
    let scores: Vec<f64> = (0..n)
        .map(|i| nbr.distances(i).iter().sum::<f64>() / k_sor as f64)
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    // highest score first, lower index first among equal scores
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut keep = vec![true; n];
    for &i in &order[..drop] {
        keep[i] = false;
    }
    Ok((0..n).filter(|&i| keep[i]).collect())
}

/// Statistical outlier removal by ranking: scores each point by its mean
/// distance to its `k_sor` nearest neighbors and drops the
/// `floor(drop_ratio * n)` highest scores.
pub fn sor_defense(cloud: &PointCloud, k_sor: usize, drop_ratio: f64) -> Result<PointCloud> {
    let keep = sor_keep_indices(cloud, k_sor, drop_ratio)?;
    if keep.len() == cloud.len() {
        return Ok(cloud.clone());
    }
    Ok(cloud.select(&keep))
}
