//! Trainable text classifiers behind one black-box probability interface.

mod adam;
mod bag;
mod chunked;
mod io;

pub use adam::Adam;
pub use bag::BagOfEmbeddingsModel;
pub use chunked::ChunkedPoolingModel;
pub use io::{load_model, save_model, AnyModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{Document, LabeledExample};

/// Black-box scorer: per-class probabilities for a document.
pub trait ClassifierModel {
    fn class_count(&self) -> usize;

    /// Valid probability vector (sums to 1), deterministic for fixed
    /// parameters.
    fn predict_proba(&self, doc: &Document) -> Vec<f64>;

    /// Argmax of `predict_proba`; ties break toward the lowest class index.
    fn predict(&self, doc: &Document) -> usize {
        argmax(&self.predict_proba(doc))
    }
}

/// A classifier whose parameters can be read, written, and differentiated.
pub trait TrainableModel: ClassifierModel {
    fn param_count(&self) -> usize;
    fn params(&self) -> Vec<f64>;
    fn set_params(&mut self, params: &[f64]);

    /// Weighted mean cross-entropy over the batch, `(1/B) Σ wᵢ ℓᵢ`, and its
    /// gradient with respect to all parameters.
    fn loss_and_grad(&self, batch: &[(&LabeledExample, f64)]) -> (f64, Vec<f64>);
}

/// One training step summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainBatchReport {
    pub mean_loss: f64,
    pub grad_norm: f64,
    pub examples: usize,
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable softmax (max subtraction).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

/// `-log(p[y] + 1e-12)`.
pub fn cross_entropy(probs: &[f64], label: usize) -> Result<f64> {
    if label >= probs.len() {
        return Err(Error::InvalidLabel {
            label,
            class_count: probs.len(),
        });
    }
    Ok(-(probs[label] + 1e-12).ln())
}

/// One Adam update on the weighted mean cross-entropy over the batch.
/// The reported loss is pre-update.
pub fn train_batch<M: TrainableModel>(
    model: &mut M,
    batch: &[(&LabeledExample, f64)],
    optimizer: &mut Adam,
    lr: f64,
) -> TrainBatchReport {
    let (loss, grad) = model.loss_and_grad(batch);
    let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    let mut params = model.params();
    optimizer.step(&mut params, &grad, lr);
    model.set_params(&params);
    TrainBatchReport {
        mean_loss: loss,
        grad_norm,
        examples: batch.len(),
    }
}

/// Max relative error between analytic gradients and central finite
/// differences. For models with more than `max_params` parameters, a seeded
/// random subsample of that size is checked.
pub fn finite_diff_check<M: TrainableModel>(
    model: &mut M,
    batch: &[(&LabeledExample, f64)],
    max_params: usize,
    seed: u64,
) -> f64 {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let n = model.param_count();
    if n == 0 {
        return 0.0;
    }
    let (_, grad) = model.loss_and_grad(batch);
    let mut indices: Vec<usize> = (0..n).collect();
    if n > max_params {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        indices.shuffle(&mut rng);
        indices.truncate(max_params);
    }
    let h = 1e-5;
    let base = model.params();
    let mut max_err: f64 = 0.0;
    for &i in &indices {
        let mut p = base.clone();
        p[i] = base[i] + h;
        model.set_params(&p);
        let (lp, _) = model.loss_and_grad(batch);
        p[i] = base[i] - h;
        model.set_params(&p);
        let (lm, _) = model.loss_and_grad(batch);
        let numeric = (lp - lm) / (2.0 * h);
        let denom = grad[i].abs().max(numeric.abs()).max(1e-4);
        max_err = max_err.max((grad[i] - numeric).abs() / denom);
    }
    model.set_params(&base);
    max_err
}

pub(crate) fn init_uniform(n: usize, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-0.05..0.05)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_is_valid_probability_vector() {
        for logits in [
            vec![0.0, 0.0],
            vec![1e4, -1e4, 0.0],
            vec![-1e4, -1e4, -1e4],
            vec![3.0, 1.0, 0.5, -2.0],
        ] {
            let p = softmax(&logits);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
            assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }

    #[test]
    fn argmax_tie_breaks_low() {
        assert_eq!(argmax(&[0.9, 0.1]), 0);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.1, 0.2, 0.7]), 2);
    }

    #[test]
    fn argmax_invariant_under_uniform_shift() {
        let logits = vec![0.3, -1.2, 0.8, 0.79];
        let base = argmax(&softmax(&logits));
        for shift in [-100.0, -1.0, 0.5, 42.0] {
            let shifted: Vec<f64> = logits.iter().map(|l| l + shift).collect();
            assert_eq!(argmax(&softmax(&shifted)), base);
        }
    }

    #[test]
    fn cross_entropy_values() {
        assert!(cross_entropy(&[1.0, 0.0], 0).unwrap().abs() < 1e-9);
        let ln2 = cross_entropy(&[0.5, 0.5], 1).unwrap();
        assert!((ln2 - std::f64::consts::LN_2).abs() < 1e-9);
        let quarter = cross_entropy(&[0.25, 0.75], 0).unwrap();
        assert!((quarter - 1.3863).abs() < 1e-4);
        assert!(cross_entropy(&[0.5, 0.5], 2).is_err());
    }
}
