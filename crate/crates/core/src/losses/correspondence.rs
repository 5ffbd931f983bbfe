use crate::error::{Error, Result};
use crate::geom::{nearest_index, PointCloud};

/// Nearest-neighbor assignments between the adversarial and benign clouds.
#[derive(Debug, Clone, PartialEq)]
pub struct Correspondence {
    /// For each adversarial point, its nearest benign point.
    pub fwd: Vec<usize>,
    /// For each benign point, its nearest adversarial point.
    pub bwd: Vec<usize>,
    /// Adversarial points attaining the largest nearest distance.
    pub hausdorff_argmax: Vec<usize>,
}

impl Correspondence {
    pub fn compute(adv: &PointCloud, benign: &PointCloud) -> Result<Self> {
        if adv.is_empty() || benign.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let (a, b) = (adv.points(), benign.points());
        let mut fwd = Vec::with_capacity(a.len());
        let mut fwd_d2 = Vec::with_capacity(a.len());
        for &p in a {
            let (j, d2) = nearest_index(p, b);
            fwd.push(j);
            fwd_d2.push(d2);
        }
        let bwd = b.iter().map(|&p| nearest_index(p, a).0).collect();
        let max = fwd_d2.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let hausdorff_argmax = (0..a.len()).filter(|&i| fwd_d2[i] == max).collect();
        Ok(Self {
            fwd,
            bwd,
            hausdorff_argmax,
        })
    }

    pub(crate) fn check(&self, adv: &PointCloud, benign: &PointCloud) -> Result<()> {
        if adv.is_empty() || benign.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if self.fwd.len() != adv.len() {
            return Err(Error::SizeMismatch(self.fwd.len(), adv.len()));
        }
        if self.bwd.len() != benign.len() {
            return Err(Error::SizeMismatch(self.bwd.len(), benign.len()));
        }
        Ok(())
    }
}
