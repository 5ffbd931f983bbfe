#![allow(dead_code)]

use geoa3::classifier::{train, ClassifierModel, TrainConfig};
use geoa3::dataset::{gen_dataset, Dataset, DatasetSpec, Shape};
use geoa3::PointCloud;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small three-class dataset and a classifier fitted to it.
pub fn small_setup() -> (ClassifierModel, Dataset) {
    let spec = DatasetSpec {
        classes: vec![Shape::Sphere, Shape::Box, Shape::Cone],
        train_per_class: 16,
        test_per_class: 4,
        points: 64,
        seed: 3,
        ..Default::default()
    };
    let data = gen_dataset(&spec).unwrap();
    let cfg = TrainConfig {
        epochs: 40,
        learning_rate: 3e-3,
        ..Default::default()
    };
    let (model, _) = train(&ClassifierModel::new(3, 1), &data.train, &data.test, &cfg).unwrap();
    (model, data)
}

pub fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> PointCloud {
    let pts = (0..n)
        .map(|_| {
            [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ]
        })
        .collect();
    PointCloud::new(pts).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
pub mod checks;
pub mod oracles;
pub mod pipeline;
