use super::{vec3, PointCloud};
use crate::error::{Error, Result};

/// Deterministic farthest point sampling of `m` points.
///
/// Seeds with the point farthest from the centroid, then repeatedly adds the
/// point with the largest distance to the selected set. Ties go to the lower
/// index. The returned cloud keeps the original relative order.
pub fn fps(cloud: &PointCloud, m: usize) -> Result<PointCloud> {
    let n = cloud.len();
    if m == 0 || m > n {
        return Err(Error::InvalidCount { count: m, max: n });
    }
    let pts = cloud.points();
    let c = cloud.centroid();
    let mut seed = 0;
    let mut seed_d = f64::NEG_INFINITY;
    for (i, &p) in pts.iter().enumerate() {
        let d = vec3::dist2(p, c);
        if d > seed_d {
            seed = i;
            seed_d = d;
        }
    }

    let mut selected = vec![false; n];
    let mut min_d = vec![f64::INFINITY; n];
    let mut chosen = Vec::with_capacity(m);
    let mut next = seed;
    for _ in 0..m {
        selected[next] = true;
        chosen.push(next);
        let s = pts[next];
        let mut best = usize::MAX;
        let mut best_d = f64::NEG_INFINITY;
        for (i, &p) in pts.iter().enumerate() {
            if selected[i] {
                continue;
            }
            let d = vec3::dist2(p, s);
            if d < min_d[i] {
                min_d[i] = d;
            }
            if min_d[i] > best_d {
                best_d = min_d[i];
                best = i;
            }
        }
        next = best;
    }
    chosen.sort_unstable();
    Ok(cloud.select(&chosen))
}
