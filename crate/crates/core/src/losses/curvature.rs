use super::{Correspondence, LossValue};
use crate::error::{Error, Result};
use crate::geom::{curvature, knn, local_frames, vec3, LocalFrames, NeighborhoodIndex, PointCloud};

/// Normals and curvatures of the benign cloud, computed once per attack.
#[derive(Debug, Clone, PartialEq)]
pub struct BenignGeometry {
    pub frames: LocalFrames,
    pub curvature: Vec<f64>,
}

impl BenignGeometry {
    pub fn new(benign: &PointCloud, k: usize) -> Result<Self> {
        let nbr = knn(benign, k)?;
        let frames = local_frames(benign, &nbr);
        let curvature = curvature(benign, &nbr, &frames);
        Ok(Self { frames, curvature })
    }

    pub fn k(&self) -> usize {
        self.frames.k
    }
}

/// Curvature consistency between each adversarial point and its nearest
/// benign point.
///
/// The adversarial curvature at `p'` is measured over its own neighborhood
/// but with the normal of the nearest benign point. The gradient reaches
/// both the center points and their neighbors; pairs with coincident points
/// contribute nothing.
pub fn curvature_consistency(
    adv: &PointCloud,
    benign_geom: &BenignGeometry,
    adv_nbr: &NeighborhoodIndex,
    corr: &Correspondence,
) -> Result<LossValue> {
    if adv.is_empty() || benign_geom.frames.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if adv_nbr.k() != benign_geom.k() {
        return Err(Error::MismatchedK {
            adv: adv_nbr.k(),
            benign: benign_geom.k(),
        });
    }
    if adv_nbr.len() != adv.len() || corr.fwd.len() != adv.len() {
        return Err(Error::SizeMismatch(adv_nbr.len(), adv.len()));
    }

    let pts = adv.points();
    let n = pts.len() as f64;
    let k = adv_nbr.k() as f64;
    let mut out = LossValue::zero(pts.len());
    // (neighbor index, unit direction, cosine, length) per neighbor
    let mut terms = Vec::with_capacity(adv_nbr.k());

    for (i, &p) in pts.iter().enumerate() {
        let anchor = corr.fwd[i];
        let normal = benign_geom.frames.normal(anchor);
        terms.clear();
        let mut kappa = 0.0;
        for &j in adv_nbr.neighbors(i) {
            let d = vec3::sub(pts[j], p);
            let len = vec3::norm(d);
            if len == 0.0 {
                continue;
            }
            // same arithmetic as the benign curvature, so identical
            // neighborhoods give identical values
            let cos = vec3::dot(d, normal) / len;
            let u = vec3::scale(d, 1.0 / len);
            kappa += cos.abs();
            terms.push((j, u, cos, len));
        }
        kappa /= k;
        let residual = kappa - benign_geom.curvature[anchor];
        out.value += residual * residual / n;

        let coef = 2.0 * residual / (n * k);
        if coef == 0.0 {
            continue;
        }
        for &(j, u, cos, len) in &terms {
            if cos == 0.0 {
                continue;
            }
            // d|cos|/dd = sign(cos) (normal - cos u) / |d|
            let g = vec3::scale(
                vec3::sub(normal, vec3::scale(u, cos)),
                coef * cos.signum() / len,
            );
            vec3::add_assign(&mut out.gradient[j], g);
            vec3::add_assign(&mut out.gradient[i], vec3::scale(g, -1.0));
        }
    }
    Ok(out)
}
