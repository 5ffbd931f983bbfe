use super::config::{AttackConfig, AttackMode, Regularizer};
use crate::classifier::{loss_targeted, loss_untargeted, ClassifierModel, ForwardCache};
use crate::error::{Error, Result};
use crate::geom::{knn, vec3, NeighborhoodIndex, Point3, PointCloud};
use crate::losses::{geo_loss_masked, l2_perturbation, BenignGeometry, Correspondence, LossValue};

/// Discrete state the objective treats as constant.
#[derive(Debug, Clone)]
pub struct ObjectiveCache {
    pub benign_geom: BenignGeometry,
    pub adv_nbr: NeighborhoodIndex,
    pub corr: Correspondence,
}

impl ObjectiveCache {
    /// Builds every piece from scratch for `adv` against `benign`.
    pub fn new(adv: &PointCloud, benign: &PointCloud, k: usize) -> Result<Self> {
        if adv.len() != benign.len() {
            return Err(Error::SizeMismatch(adv.len(), benign.len()));
        }
        benign.require(k + 1)?;
        Ok(Self {
            benign_geom: BenignGeometry::new(benign, k)?,
            adv_nbr: knn(adv, k)?,
            corr: Correspondence::compute(adv, benign)?,
        })
    }

    pub fn refresh_correspondence(&mut self, adv: &PointCloud, benign: &PointCloud) -> Result<()> {
        self.corr = Correspondence::compute(adv, benign)?;
        Ok(())
    }

    pub fn refresh_neighborhoods(&mut self, adv: &PointCloud) -> Result<()> {
        self.adv_nbr = knn(adv, self.benign_geom.k())?;
        Ok(())
    }
}

/// Value and gradient of `C_mis + β · C_reg` with its parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub value: f64,
    pub misclassification: f64,
    pub regularizer: f64,
    pub gradient: Vec<Point3>,
    pub logits: Vec<f64>,
}

/// Misclassification loss and its gradient with respect to the logits.
pub(crate) fn misclassification(
    mode: AttackMode,
    truth: Option<usize>,
    logits: &[f64],
) -> Result<(f64, Vec<f64>)> {
    match mode {
        AttackMode::Targeted { target } => loss_targeted(logits, target),
        AttackMode::Untargeted => {
            let y = truth.ok_or_else(|| {
                Error::InvalidConfig("untargeted mode needs a labeled cloud".into())
            })?;
            loss_untargeted(logits, y)
        }
    }
}

/// The configured regularizer under a frozen cache.
pub(crate) fn regularizer(
    adv: &PointCloud,
    benign: &PointCloud,
    cache: &ObjectiveCache,
    cfg: &AttackConfig,
) -> Result<LossValue> {
    match cfg.regularizer {
        Regularizer::Geometry { terms } => geo_loss_masked(
            adv,
            benign,
            &cache.benign_geom,
            &cache.adv_nbr,
            &cache.corr,
            cfg.weights,
            terms,
        ),
        Regularizer::DegenerateL2 => l2_perturbation(adv, benign),
    }
}

/// `C_mis(adv) + β · C_reg(adv, benign)` and its gradient over `adv`.
///
/// The mode's true label is taken from `benign.label`.
pub fn adv_objective(
    model: &ClassifierModel,
    adv: &PointCloud,
    benign: &PointCloud,
    cache: &ObjectiveCache,
    cfg: &AttackConfig,
    beta: f64,
) -> Result<Objective> {
    let fwd = model.forward_cached(adv)?;
    objective_with_forward(model, &fwd, adv, benign, cache, cfg, beta)
}

pub(crate) fn objective_with_forward(
    model: &ClassifierModel,
    fwd: &ForwardCache,
    adv: &PointCloud,
    benign: &PointCloud,
    cache: &ObjectiveCache,
    cfg: &AttackConfig,
    beta: f64,
) -> Result<Objective> {
    let logits = fwd.logits_vec();
    let (mis, dlogits) = misclassification(cfg.mode, benign.label, &logits)?;
    let mut gradient = model.backward_input(fwd, &dlogits)?;
    let reg = regularizer(adv, benign, cache, cfg)?;
    if beta != 0.0 {
        for (g, r) in gradient.iter_mut().zip(&reg.gradient) {
            vec3::add_assign(g, vec3::scale(*r, beta));
        }
    }
    Ok(Objective {
        value: mis + beta * reg.value,
        misclassification: mis,
        regularizer: reg.value,
        gradient,
        logits,
    })
}
