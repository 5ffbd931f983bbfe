use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::geom::{vec3, LocalFrames, Point3};

/// Per-point offsets lying in each point's tangent plane.
#[derive(Debug, Clone, PartialEq)]
pub struct JitterField {
    pub offsets: Vec<Point3>,
}

/// Draws `s1, s2 ~ Normal(0, σ)` per point and returns `s1·v1 + s2·v2`.
pub fn sample_jitter<R: Rng + ?Sized>(
    frames: &LocalFrames,
    sigma: f64,
    rng: &mut R,
) -> JitterField {
    if sigma == 0.0 {
        return JitterField {
            offsets: vec![[0.0; 3]; frames.len()],
        };
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and non-negative");
    let offsets = frames
        .frames
        .iter()
        .map(|f| {
            let s1 = normal.sample(rng);
            let s2 = normal.sample(rng);
            vec3::add(vec3::scale(f.tangent1, s1), vec3::scale(f.tangent2, s2))
        })
        .collect();
    JitterField { offsets }
}
