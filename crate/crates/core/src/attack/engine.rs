use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{AttackConfig, AttackMode};
use super::jitter::sample_jitter;
use super::objective::{objective_with_forward, regularizer, ObjectiveCache};
use crate::classifier::{argmax, ClassifierModel};
use crate::error::{Error, Result};
use crate::geom::{local_frames, regularity, LocalFrames, Point3, PointCloud};
use crate::optim::{Adam, AdamParams};

/// Outcome of one β stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub beta: f64,
    pub success: bool,
    /// Lowest regularizer value among the stage's successful iterates.
    pub best_regularizer: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub adversarial: PointCloud,
    pub success: bool,
    pub predicted_class: usize,
    pub true_label: Option<usize>,
    pub mode: AttackMode,
    /// β of the stage that produced the returned iterate, if successful.
    pub best_beta: Option<f64>,
    /// Regularizer value of the returned iterate.
    pub geo_loss_final: f64,
    pub regularity: f64,
    /// Objective value at every optimization step, stages concatenated.
    pub loss_trace: Vec<f64>,
    pub stages: Vec<StageRecord>,
    /// Seconds; left out of serialized output so results stay reproducible.
    #[serde(skip)]
    pub wall_time: f64,
}

impl AttackResult {
    /// Whether `predicted` satisfies this result's attack condition.
    pub fn is_success(&self, predicted: usize) -> bool {
        self.mode.is_success(predicted, self.true_label)
    }
}

/// Plain attack; `cfg.itertanjit` is ignored.
pub fn geoa3_attack(
    model: &ClassifierModel,
    benign: &PointCloud,
    cfg: &AttackConfig,
) -> Result<AttackResult> {
    optimize(model, benign, cfg, false)
}

/// Tangent-jittered attack; `cfg.itertanjit` is ignored.
pub fn itertanjit_attack(
    model: &ClassifierModel,
    benign: &PointCloud,
    cfg: &AttackConfig,
) -> Result<AttackResult> {
    optimize(model, benign, cfg, true)
}

/// Dispatches on `cfg.itertanjit`.
pub fn run_attack(
    model: &ClassifierModel,
    benign: &PointCloud,
    cfg: &AttackConfig,
) -> Result<AttackResult> {
    optimize(model, benign, cfg, cfg.itertanjit)
}

fn flatten(points: &[Point3]) -> Vec<f64> {
    points.iter().flatten().copied().collect()
}

fn unflatten(flat: &[f64]) -> Vec<Point3> {
    flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
}

struct Best {
    cloud: PointCloud,
    regularizer: f64,
    beta: f64,
}

fn optimize(
    model: &ClassifierModel,
    benign: &PointCloud,
    cfg: &AttackConfig,
    jitter: bool,
) -> Result<AttackResult> {
    let start = Instant::now();
    cfg.validate()?;
    model.validate()?;
    benign.require(cfg.k + 1)?;
    match cfg.mode {
        AttackMode::Targeted { target } if target >= model.classes() => {
            return Err(Error::InvalidClass {
                class: target,
                classes: model.classes(),
            })
        }
        AttackMode::Untargeted if benign.label.is_none() => {
            return Err(Error::InvalidConfig(
                "untargeted mode needs a labeled cloud".into(),
            ))
        }
        _ => {}
    }

    let n = benign.len();
    let label = benign.label;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(
        AdamParams {
            learning_rate: cfg.learning_rate,
            beta1: cfg.adam_beta1,
            beta2: cfg.adam_beta2,
            eps: cfg.adam_eps,
        },
        3 * n,
    );
    let mut cache = ObjectiveCache::new(benign, benign, cfg.k)?;
    let mut frames: Option<LocalFrames> = None;

    let mut beta = cfg.beta_init;
    let (mut lo, mut hi): (f64, Option<f64>) = (0.0, None);
    let mut best: Option<Best> = None;
    let mut stages = Vec::with_capacity(cfg.binary_search_steps);
    let mut loss_trace = Vec::with_capacity(cfg.binary_search_steps * cfg.iters_per_step);
    let mut last = benign.clone();

    'stages: for _ in 0..cfg.binary_search_steps {
        let mut theta = flatten(benign.points());
        adam.reset();
        let mut stage_best: Option<f64> = None;

        for t in 0..=cfg.iters_per_step {
            let adv = PointCloud::from_parts(unflatten(&theta), label);
            if t % cfg.refresh_period == 0 {
                cache.refresh_neighborhoods(&adv)?;
                if jitter {
                    frames = Some(local_frames(&adv, &cache.adv_nbr));
                }
            }
            let fwd = model.forward_cached(&adv)?;
            let success = cfg.mode.is_success(argmax(&fwd.logits_vec()), label);
            let stepping = t < cfg.iters_per_step;

            // Evaluation point: the iterate itself, or a jittered copy of it.
            let field = match (&frames, jitter) {
                (Some(f), true) if stepping => Some(sample_jitter(f, cfg.sigma, &mut rng)),
                _ => None,
            };
            let eval = match &field {
                Some(j) if j.offsets.iter().flatten().any(|&v| v != 0.0) => {
                    Some(adv.displaced(&j.offsets))
                }
                _ => None,
            };

            let objective = if stepping {
                let x = eval.as_ref().unwrap_or(&adv);
                cache.refresh_correspondence(x, benign)?;
                let obj = match &eval {
                    Some(x) => {
                        let f = model.forward_cached(x)?;
                        objective_with_forward(model, &f, x, benign, &cache, cfg, beta)?
                    }
                    None => objective_with_forward(model, &fwd, &adv, benign, &cache, cfg, beta)?,
                };
                Some(obj)
            } else {
                None
            };

            if success {
                let reg = match (&objective, &eval) {
                    (Some(o), None) => o.regularizer,
                    _ => {
                        cache.refresh_correspondence(&adv, benign)?;
                        regularizer(&adv, benign, &cache, cfg)?.value
                    }
                };
                if stage_best.is_none_or(|b| reg < b) {
                    stage_best = Some(reg);
                }
                if best.as_ref().is_none_or(|b| reg < b.regularizer) {
                    best = Some(Best {
                        cloud: adv.clone(),
                        regularizer: reg,
                        beta,
                    });
                }
            }

            match objective {
                Some(o) => {
                    loss_trace.push(o.value);
                    adam.step(&mut theta, &flatten(&o.gradient));
                    if theta.iter().any(|v| !v.is_finite()) {
                        return Err(Error::NonFinite(
                            theta.iter().position(|v| !v.is_finite()).unwrap_or(0) / 3,
                        ));
                    }
                }
                None => last = adv,
            }
        }

        stages.push(StageRecord {
            beta,
            success: stage_best.is_some(),
            best_regularizer: stage_best,
        });
        if stage_best.is_some() {
            lo = beta;
            beta = match hi {
                None => beta * 10.0,
                Some(h) => (lo + h) / 2.0,
            };
        } else {
            hi = Some(beta);
            beta = if lo > 0.0 {
                (lo + beta) / 2.0
            } else {
                beta / 10.0
            };
        }
        // Nothing can beat an unperturbed successful cloud.
        if best.as_ref().is_some_and(|b| b.regularizer == 0.0) {
            break 'stages;
        }
    }

    let (adversarial, success, best_beta, geo_loss_final) = match best {
        Some(b) => (b.cloud, true, Some(b.beta), b.regularizer),
        None => {
            cache.refresh_neighborhoods(&last)?;
            cache.refresh_correspondence(&last, benign)?;
            let reg = regularizer(&last, benign, &cache, cfg)?.value;
            (last, false, None, reg)
        }
    };
    let predicted_class = model.predict(&adversarial)?;
    let regularity = regularity(&adversarial, cfg.k)?;
    Ok(AttackResult {
        adversarial,
        success,
        predicted_class,
        true_label: label,
        mode: cfg.mode,
        best_beta,
        geo_loss_final,
        regularity,
        loss_trace,
        stages,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
