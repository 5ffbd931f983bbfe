//! Measurement protocols: success under SOR drop-ratio sweeps, regularity,
//! resampling robustness and ablation grids.
//!
//! The resampling test is a surrogate for meshing and re-sampling the
//! adversarial surface: each trial displaces every point by a fresh
//! tangent-plane jitter and re-checks the attack condition.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{
    run_attack, sample_jitter, AttackConfig, AttackMode, AttackResult, Regularizer,
};
use crate::classifier::ClassifierModel;
use crate::error::{Error, Result};
use crate::geom::{knn, local_frames, regularity, sor_defense, PointCloud};
use crate::losses::TermMask;

pub const DEFAULT_DROP_RATIOS: [f64; 7] = [0.0, 0.01, 0.02, 0.05, 0.10, 0.15, 0.20];

/// One benign cloud and the attack mode it is subjected to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    /// Index of the cloud in its source list.
    pub id: usize,
    pub cloud: PointCloud,
    pub mode: AttackMode,
}

/// Picks up to `count` correctly classified clouds in a seeded random
/// order. Targeted instances get a target drawn uniformly from the other
/// classes.
pub fn select_instances(
    model: &ClassifierModel,
    clouds: &[PointCloud],
    count: usize,
    targeted: bool,
    seed: u64,
) -> Result<Vec<Instance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..clouds.len()).collect();
    order.shuffle(&mut rng);
    let classes = model.classes();
    let mut out = Vec::with_capacity(count);
    for id in order {
        if out.len() == count {
            break;
        }
        let cloud = &clouds[id];
        let Some(y) = cloud.label else { continue };
        if model.predict(cloud)? != y {
            continue;
        }
        let mode = if targeted && classes > 1 {
            let t = rng.random_range(0..classes - 1);
            AttackMode::Targeted {
                target: if t >= y { t + 1 } else { t },
            }
        } else {
            AttackMode::Untargeted
        };
        out.push(Instance {
            id,
            cloud: cloud.clone(),
            mode,
        });
    }
    Ok(out)
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the attack on instance `id` under a base seed.
pub fn instance_seed(base: u64, id: usize) -> u64 {
    mix(base ^ mix(id as u64))
}

/// Attacks every instance with `cfg`, overriding its mode and seed.
/// Instances run in parallel; the output keeps the input order.
pub fn run_attacks(
    model: &ClassifierModel,
    instances: &[Instance],
    cfg: &AttackConfig,
) -> Result<Vec<AttackResult>> {
    instances
        .par_iter()
        .map(|inst| {
            let cfg = AttackConfig {
                mode: inst.mode,
                seed: instance_seed(cfg.seed, inst.id),
                ..cfg.clone()
            };
            run_attack(model, &inst.cloud, &cfg)
        })
        .collect()
}

fn survives(result: &AttackResult, model: &ClassifierModel, cloud: &PointCloud) -> Result<bool> {
    Ok(result.success && result.is_success(model.predict(cloud)?))
}

/// Whether a successful attack still succeeds after SOR drops `drop_ratio`
/// of its points.
pub fn survives_defense(
    result: &AttackResult,
    model: &ClassifierModel,
    drop_ratio: f64,
    k_sor: usize,
) -> Result<bool> {
    if !result.success {
        return Ok(false);
    }
    let defended = sor_defense(&result.adversarial, k_sor, drop_ratio)?;
    survives(result, model, &defended)
}

/// Fraction of results that still succeed after the defense.
pub fn attack_success_rate(
    results: &[AttackResult],
    model: &ClassifierModel,
    drop_ratio: f64,
    k_sor: usize,
) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    let mut hits = 0usize;
    for r in results {
        if survives_defense(r, model, drop_ratio, k_sor)? {
            hits += 1;
        }
    }
    Ok(hits as f64 / results.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub mean: f64,
    pub values: Vec<f64>,
}

pub fn regularity_report(clouds: &[PointCloud], k: usize) -> Result<RegularityReport> {
    if clouds.is_empty() {
        return Err(Error::EmptyResults);
    }
    let values = clouds
        .iter()
        .map(|c| regularity(c, k))
        .collect::<Result<Vec<_>>>()?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(RegularityReport { mean, values })
}

/// Fraction of results whose attack condition holds in a strict majority
/// of `trials` tangent-jittered copies of the adversarial cloud.
///
/// Frames come from each adversarial cloud's own `k`-neighborhoods. Each
/// result draws from its own stream, so the outcome for one result does not
/// depend on the others.
pub fn resample_robustness(
    results: &[AttackResult],
    model: &ClassifierModel,
    sigma_test: f64,
    trials: usize,
    k: usize,
    seed: u64,
) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    if !(sigma_test >= 0.0 && sigma_test.is_finite()) {
        return Err(Error::InvalidConfig(
            "sigma must be finite and non-negative".into(),
        ));
    }
    let mut hits = 0usize;
    for (i, r) in results.iter().enumerate() {
        if !r.success {
            continue;
        }
        let adv = &r.adversarial;
        let frames = local_frames(adv, &knn(adv, k)?);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut kept = 0usize;
        for _ in 0..trials {
            let j = sample_jitter(&frames, sigma_test, &mut rng);
            if survives(r, model, &adv.displaced(&j.offsets))? {
                kept += 1;
            }
        }
        if 2 * kept > trials {
            hits += 1;
        }
    }
    Ok(hits as f64 / results.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub id: usize,
    pub target: Option<usize>,
    pub true_label: Option<usize>,
    /// Success after the defense, one flag per drop ratio.
    pub success: Vec<bool>,
    pub regularity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub name: String,
    pub k_sor: usize,
    pub drop_ratios: Vec<f64>,
    pub success_rates: Vec<f64>,
    pub mean_regularity: f64,
    pub rows: Vec<SweepRow>,
}

/// Success rates across `drop_ratios` plus regularity for one set of
/// results. `ids[i]` labels `results[i]`.
pub fn sweep_report(
    name: &str,
    ids: &[usize],
    results: &[AttackResult],
    model: &ClassifierModel,
    drop_ratios: &[f64],
    k_sor: usize,
) -> Result<SweepReport> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    if ids.len() != results.len() {
        return Err(Error::SizeMismatch(ids.len(), results.len()));
    }
    let mut rows = Vec::with_capacity(results.len());
    for (&id, r) in ids.iter().zip(results) {
        let success = drop_ratios
            .iter()
            .map(|&d| survives_defense(r, model, d, k_sor))
            .collect::<Result<Vec<_>>>()?;
        let target = match r.mode {
            AttackMode::Targeted { target } => Some(target),
            AttackMode::Untargeted => None,
        };
        rows.push(SweepRow {
            id,
            target,
            true_label: r.true_label,
            success,
            regularity: r.regularity,
        });
    }
    let n = rows.len() as f64;
    let success_rates = (0..drop_ratios.len())
        .map(|c| rows.iter().filter(|r| r.success[c]).count() as f64 / n)
        .collect();
    let mean_regularity = rows.iter().map(|r| r.regularity).sum::<f64>() / n;
    Ok(SweepReport {
        name: name.to_string(),
        k_sor,
        drop_ratios: drop_ratios.to_vec(),
        success_rates,
        mean_regularity,
        rows,
    })
}

/// Plain-text table: one row per report, drop ratios as columns.
pub fn format_table(reports: &[SweepReport]) -> String {
    let mut out = String::new();
    let Some(first) = reports.first() else {
        return out;
    };
    let width = reports
        .iter()
        .map(|r| r.name.len())
        .max()
        .unwrap_or(0)
        .max(6);
    let _ = write!(out, "{:<width$}", "config");
    for d in &first.drop_ratios {
        let _ = write!(out, " {:>7}", format!("{}%", (d * 100.0).round()));
    }
    let _ = writeln!(out, " {:>8}", "R");
    for r in reports {
        let _ = write!(out, "{:<width$}", r.name);
        for s in &r.success_rates {
            let _ = write!(out, " {:>7.2}", s * 100.0);
        }
        let _ = writeln!(out, " {:>8.4}", r.mean_regularity);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationVariant {
    Full,
    MinusChamfer,
    MinusHausdorff,
    MinusCurvature,
    DegenerateL2,
}

impl AblationVariant {
    pub const ALL: [AblationVariant; 5] = [
        AblationVariant::Full,
        AblationVariant::MinusChamfer,
        AblationVariant::MinusHausdorff,
        AblationVariant::MinusCurvature,
        AblationVariant::DegenerateL2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AblationVariant::Full => "full",
            AblationVariant::MinusChamfer => "minus_chamfer",
            AblationVariant::MinusHausdorff => "minus_hausdorff",
            AblationVariant::MinusCurvature => "minus_curvature",
            AblationVariant::DegenerateL2 => "degenerate_l2",
        }
    }

    pub fn regularizer(self) -> Regularizer {
        let all = TermMask::ALL;
        let terms = match self {
            AblationVariant::Full => all,
            AblationVariant::MinusChamfer => TermMask {
                chamfer: false,
                ..all
            },
            AblationVariant::MinusHausdorff => TermMask {
                hausdorff: false,
                ..all
            },
            AblationVariant::MinusCurvature => TermMask {
                curvature: false,
                ..all
            },
            AblationVariant::DegenerateL2 => return Regularizer::DegenerateL2,
        };
        Regularizer::Geometry { terms }
    }
}

/// Attacks the same instances under every ablation variant and reports each.
pub fn run_ablation(
    model: &ClassifierModel,
    instances: &[Instance],
    base: &AttackConfig,
    drop_ratios: &[f64],
    k_sor: usize,
) -> Result<Vec<(AblationVariant, Vec<AttackResult>, SweepReport)>> {
    let ids: Vec<usize> = instances.iter().map(|i| i.id).collect();
    AblationVariant::ALL
        .iter()
        .map(|&v| {
            let cfg = AttackConfig {
                regularizer: v.regularizer(),
                ..base.clone()
            };
            let results = run_attacks(model, instances, &cfg)?;
            let report = sweep_report(v.name(), &ids, &results, model, drop_ratios, k_sor)?;
            Ok((v, results, report))
        })
        .collect()
}
