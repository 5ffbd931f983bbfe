use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::heads::loss_targeted;
use super::network::ClassifierModel;
use crate::error::{Error, Result};
use crate::geom::PointCloud;
use crate::optim::{Adam, AdamParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Random rotation about the vertical (z) axis per sample and epoch.
    pub rotate: bool,
    /// Standard deviation of per-coordinate Gaussian jitter; 0 disables it.
    pub jitter: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 25,
            batch_size: 16,
            learning_rate: 1e-3,
            seed: 0,
            rotate: true,
            jitter: 0.005,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean cross-entropy of each epoch.
    pub epoch_losses: Vec<f64>,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

/// Fraction of clouds whose prediction equals their label.
pub fn accuracy(model: &ClassifierModel, clouds: &[PointCloud]) -> Result<f64> {
    if clouds.is_empty() {
        return Ok(0.0);
    }
    let mut hits = 0usize;
    for c in clouds {
        if Some(model.predict(c)?) == c.label {
            hits += 1;
        }
    }
    Ok(hits as f64 / clouds.len() as f64)
}

fn check_dataset(classes: usize, train: &[PointCloud], test: &[PointCloud]) -> Result<()> {
    let degenerate = |m: &str| Err(Error::DegenerateDataset(m.to_string()));
    if train.is_empty() {
        return degenerate("empty training split");
    }
    let mut seen = vec![false; classes];
    for c in train.iter().chain(test) {
        match c.label {
            Some(l) if l < classes => seen[l] = true,
            Some(l) => {
                return Err(Error::InvalidClass { class: l, classes });
            }
            None => return degenerate("unlabeled cloud"),
        }
        if c.is_empty() {
            return degenerate("empty cloud");
        }
    }
    let train_classes = {
        let mut s = vec![false; classes];
        for c in train {
            s[c.label.unwrap_or(0)] = true;
        }
        s.iter().filter(|&&b| b).count()
    };
    if train_classes < 2 {
        return degenerate("training split has fewer than two classes");
    }
    Ok(())
}

fn augment<R: Rng>(cloud: &PointCloud, cfg: &TrainConfig, rng: &mut R) -> PointCloud {
    if !cfg.rotate && cfg.jitter <= 0.0 {
        return cloud.clone();
    }
    let (s, c) = if cfg.rotate {
        rng.random_range(0.0..std::f64::consts::TAU).sin_cos()
    } else {
        (0.0, 1.0)
    };
    let noise = Normal::new(0.0, cfg.jitter.max(0.0)).expect("finite jitter");
    let points = cloud
        .points()
        .iter()
        .map(|p| {
            let mut q = [c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]];
            if cfg.jitter > 0.0 {
                for v in &mut q {
                    *v += noise.sample(rng);
                }
            }
            q
        })
        .collect();
    PointCloud::from_parts(points, cloud.label)
}

/// Mini-batch Adam on cross-entropy. Reproducible from `cfg.seed`.
pub fn train(
    init: &ClassifierModel,
    train: &[PointCloud],
    test: &[PointCloud],
    cfg: &TrainConfig,
) -> Result<(ClassifierModel, TrainReport)> {
    let classes = init.classes();
    check_dataset(classes, train, test)?;
    if cfg.batch_size == 0 || !cfg.learning_rate.is_finite() || !(cfg.jitter >= 0.0) {
        return Err(Error::InvalidConfig(
            "batch size must be positive and rates finite".into(),
        ));
    }
    let mut model = init.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let adam_params = AdamParams {
        learning_rate: cfg.learning_rate,
        ..AdamParams::default()
    };
    let mut optimizers: Vec<(Adam, Adam)> = model
        .layers()
        .map(|l| {
            (
                Adam::new(adam_params, l.weight.len()),
                Adam::new(adam_params, l.bias.len()),
            )
        })
        .collect();

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut grads = model.zeros_like();
            for &i in batch {
                let sample = augment(&train[i], cfg, &mut rng);
                let cache = model.forward_cached(&sample)?;
                let label = sample.label.expect("checked above");
                let (loss, dlogits) = loss_targeted(cache.logits.as_slice().unwrap(), label)?;
                total += loss;
                model.backward_params(&cache, &dlogits, &mut grads)?;
            }
            let scale = 1.0 / batch.len() as f64;
            for ((layer, grad), (opt_w, opt_b)) in model
                .layers_mut()
                .zip(grads.layers_mut())
                .zip(optimizers.iter_mut())
            {
                grad.weight.mapv_inplace(|g| g * scale);
                grad.bias.mapv_inplace(|g| g * scale);
                opt_w.step(
                    layer.weight.as_slice_mut().expect("standard layout"),
                    grad.weight.as_slice().expect("standard layout"),
                );
                opt_b.step(
                    layer.bias.as_slice_mut().expect("standard layout"),
                    grad.bias.as_slice().expect("standard layout"),
                );
            }
        }
        epoch_losses.push(total / train.len() as f64);
    }

    let report = TrainReport {
        epoch_losses,
        train_accuracy: accuracy(&model, train)?,
        test_accuracy: accuracy(&model, test)?,
    };
    Ok((model, report))
}
