use super::{Correspondence, LossValue};
use crate::error::{Error, Result};
use crate::geom::{vec3, PointCloud};

/// Chamfer distance: mean squared nearest distance in both directions.
pub fn chamfer(adv: &PointCloud, benign: &PointCloud) -> Result<LossValue> {
    let corr = Correspondence::compute(adv, benign)?;
    chamfer_with(adv, benign, &corr)
}

/// Chamfer distance under fixed nearest-neighbor assignments.
pub fn chamfer_with(
    adv: &PointCloud,
    benign: &PointCloud,
    corr: &Correspondence,
) -> Result<LossValue> {
    corr.check(adv, benign)?;
    let (a, b) = (adv.points(), benign.points());
    let inv_a = 1.0 / a.len() as f64;
    let inv_b = 1.0 / b.len() as f64;
    let mut out = LossValue::zero(a.len());
    let mut fwd_sum = 0.0;
    for (i, &p) in a.iter().enumerate() {
        let d = vec3::sub(p, b[corr.fwd[i]]);
        fwd_sum += vec3::norm2(d);
        vec3::add_assign(&mut out.gradient[i], vec3::scale(d, 2.0 * inv_a));
    }
    let mut bwd_sum = 0.0;
    for (j, &q) in b.iter().enumerate() {
        let i = corr.bwd[j];
        let d = vec3::sub(a[i], q);
        bwd_sum += vec3::norm2(d);
        vec3::add_assign(&mut out.gradient[i], vec3::scale(d, 2.0 * inv_b));
    }
    out.value = fwd_sum / a.len() as f64 + bwd_sum / b.len() as f64;
    Ok(out)
}

/// One-sided Hausdorff distance (squared) from the adversarial cloud.
pub fn hausdorff(adv: &PointCloud, benign: &PointCloud) -> Result<LossValue> {
    let corr = Correspondence::compute(adv, benign)?;
    hausdorff_with(adv, benign, &corr)
}

/// Hausdorff distance with the maximizer set held fixed; the subgradient is
/// averaged over tied maximizers.
pub fn hausdorff_with(
    adv: &PointCloud,
    benign: &PointCloud,
    corr: &Correspondence,
) -> Result<LossValue> {
    corr.check(adv, benign)?;
    let (a, b) = (adv.points(), benign.points());
    let mut out = LossValue::zero(a.len());
    let ties = corr.hausdorff_argmax.len() as f64;
    for &i in &corr.hausdorff_argmax {
        let d = vec3::sub(a[i], b[corr.fwd[i]]);
        out.value += vec3::norm2(d) / ties;
        out.gradient[i] = vec3::scale(d, 2.0 / ties);
    }
    Ok(out)
}

/// Mean squared point-wise displacement between index-matched clouds.
pub fn l2_perturbation(adv: &PointCloud, benign: &PointCloud) -> Result<LossValue> {
    if adv.len() != benign.len() {
        return Err(Error::SizeMismatch(adv.len(), benign.len()));
    }
    if adv.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let inv = 1.0 / adv.len() as f64;
    let mut out = LossValue::zero(adv.len());
    for (i, (&p, &q)) in adv.points().iter().zip(benign.points()).enumerate() {
        let d = vec3::sub(p, q);
        out.value += vec3::norm2(d) * inv;
        out.gradient[i] = vec3::scale(d, 2.0 * inv);
    }
    Ok(out)
}
