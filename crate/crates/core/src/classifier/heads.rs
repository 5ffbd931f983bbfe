use crate::error::{Error, Result};

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|&g| (g - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

fn log_softmax_at(logits: &[f64], class: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&g| (g - max).exp()).sum::<f64>().ln();
    logits[class] - lse
}

fn check_class(logits: &[f64], class: usize) -> Result<()> {
    if class >= logits.len() {
        return Err(Error::InvalidClass {
            class,
            classes: logits.len(),
        });
    }
    Ok(())
}

/// Cross-entropy toward `target`: `-log softmax(logits)[target]`, with its
/// gradient `softmax - onehot(target)`.
pub fn loss_targeted(logits: &[f64], target: usize) -> Result<(f64, Vec<f64>)> {
    check_class(logits, target)?;
    let value = -log_softmax_at(logits, target);
    let mut grad = softmax(logits);
    grad[target] -= 1.0;
    Ok((value, grad))
}

/// Untargeted variant: `+log softmax(logits)[truth]`. Minimizing it lowers
/// the probability of the true class. Exactly the negation of
/// [`loss_targeted`] for the same class.
pub fn loss_untargeted(logits: &[f64], truth: usize) -> Result<(f64, Vec<f64>)> {
    let (value, grad) = loss_targeted(logits, truth)?;
    Ok((-value, grad.into_iter().map(|g| -g).collect()))
}
