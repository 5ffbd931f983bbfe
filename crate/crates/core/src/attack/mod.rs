//! Adversarial optimization over point coordinates.
//!
//! The objective is `C_mis + β · C_reg`, where `C_mis` is the softmax
//! misclassification loss of the classifier and `C_reg` is either the
//! geometry-aware regularizer (any subset of Chamfer, Hausdorff and
//! curvature consistency) or the point-wise L2 baseline. Points are moved
//! with Adam; β is tuned by a bracketing search over several stages. The
//! tangent-jittered variant evaluates each gradient at a randomly
//! re-sampled copy of the current iterate.

mod config;
mod engine;
mod jitter;
mod objective;

pub use config::{AttackConfig, AttackMode, Regularizer};
pub use engine::{geoa3_attack, itertanjit_attack, run_attack, AttackResult, StageRecord};
pub use jitter::{sample_jitter, JitterField};
pub use objective::{adv_objective, Objective, ObjectiveCache};
