//! A small permutation-invariant point-set classifier.
//!
//! Architecture: a shared per-point MLP (3 → 64 → 128 → 256, ReLU), a
//! feature-wise max over points, and a two-layer head (256 → 128 ReLU →
//! classes). Forward and backward passes are written out by hand so the
//! attack can differentiate logits with respect to point coordinates.

mod format;
mod heads;
mod network;
mod train;

pub use format::{load, save, FORMAT_VERSION, MAGIC};
pub use heads::{loss_targeted, loss_untargeted, softmax};
pub(crate) use network::argmax;
pub use network::{ClassifierModel, Dense, ForwardCache, LogitGrad, ParamGrads, ARCH_TAG};
pub use train::{accuracy, train, TrainConfig, TrainReport};
