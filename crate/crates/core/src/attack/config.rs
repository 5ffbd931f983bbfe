use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{GeoWeights, TermMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AttackMode {
    /// Force the prediction to `target`.
    Targeted { target: usize },
    /// Force any prediction other than the cloud's label.
    Untargeted,
}

impl AttackMode {
    /// Whether `predicted` satisfies the mode for a cloud labeled `truth`.
    pub fn is_success(&self, predicted: usize, truth: Option<usize>) -> bool {
        match *self {
            AttackMode::Targeted { target } => predicted == target,
            AttackMode::Untargeted => truth.is_some_and(|y| predicted != y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Regularizer {
    /// Geometry-aware regularizer restricted to the enabled terms.
    Geometry { terms: TermMask },
    /// Mean squared point-wise displacement.
    DegenerateL2,
}

impl Regularizer {
    /// Short label used in reports.
    pub fn name(&self) -> String {
        match self {
            Regularizer::DegenerateL2 => "degenerate_l2".into(),
            Regularizer::Geometry { terms } => {
                match (terms.chamfer, terms.hausdorff, terms.curvature) {
                    (true, true, true) => "full".into(),
                    (false, true, true) => "minus_chamfer".into(),
                    (true, false, true) => "minus_hausdorff".into(),
                    (true, true, false) => "minus_curvature".into(),
                    (c, h, k) => {
                        let on: Vec<&str> = [(c, "chamfer"), (h, "hausdorff"), (k, "curvature")]
                            .iter()
                            .filter(|t| t.0)
                            .map(|t| t.1)
                            .collect();
                        format!("geometry[{}]", on.join("+"))
                    }
                }
            }
        }
    }
}

impl Default for Regularizer {
    fn default() -> Self {
        Regularizer::Geometry {
            terms: TermMask::ALL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub mode: AttackMode,
    pub weights: GeoWeights,
    pub regularizer: Regularizer,
    pub beta_init: f64,
    pub binary_search_steps: usize,
    pub iters_per_step: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Neighborhood size for curvature terms and local frames.
    pub k: usize,
    /// Iterations between neighborhood / frame refreshes.
    pub refresh_period: usize,
    pub itertanjit: bool,
    /// Standard deviation of the tangent jitter.
    pub sigma: f64,
    pub seed: u64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            mode: AttackMode::Untargeted,
            weights: GeoWeights::default(),
            regularizer: Regularizer::default(),
            beta_init: 2500.0,
            binary_search_steps: 10,
            iters_per_step: 500,
            learning_rate: 0.01,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            k: 16,
            refresh_period: 10,
            itertanjit: false,
            sigma: 0.02,
            seed: 0,
        }
    }
}

impl AttackConfig {
    /// Suggested neighborhood size for a cloud of `n` points: one point in
    /// 64, so neighborhoods cover the same share of the surface at every
    /// resolution (16 at 1024 points), and never fewer than 4.
    pub fn default_k_for(n: usize) -> usize {
        (n / 64).max(4)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if self.binary_search_steps == 0 || self.iters_per_step == 0 {
            return bad("binary_search_steps and iters_per_step must be positive");
        }
        if self.k == 0 || self.refresh_period == 0 {
            return bad("k and refresh_period must be positive");
        }
        if !finite_pos(self.learning_rate) || !finite_pos(self.adam_eps) {
            return bad("learning rate and adam epsilon must be positive");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("adam decay rates must lie in [0, 1)");
        }
        if !(self.beta_init >= 0.0 && self.beta_init.is_finite()) {
            return bad("beta must be finite and non-negative");
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be finite and non-negative");
        }
        let w = self.weights;
        if !(w.lambda1 >= 0.0 && w.lambda2 >= 0.0 && w.lambda1.is_finite() && w.lambda2.is_finite())
        {
            return bad("lambda weights must be finite and non-negative");
        }
        Ok(())
    }
}
