use std::sync::Arc;

use crate::embedding::EmbeddingTable;
use crate::text::{Document, LabeledExample};

use super::{cross_entropy, init_uniform, softmax, ClassifierModel, TrainableModel};

/// Softmax classifier over the mean of token embeddings. Stand-in for the
/// flat fixed-window encoders; optionally truncates input to its last `T`
/// tokens.
#[derive(Debug, Clone)]
pub struct BagOfEmbeddingsModel {
    table: Arc<EmbeddingTable>,
    class_count: usize,
    truncate_last: Option<usize>,
    /// class_count × dimension, row-major
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl BagOfEmbeddingsModel {
    pub fn new(table: Arc<EmbeddingTable>, class_count: usize, seed: u64) -> Self {
        let d = table.dimension();
        BagOfEmbeddingsModel {
            table,
            class_count,
            truncate_last: None,
            weights: init_uniform(class_count * d, seed),
            bias: vec![0.0; class_count],
        }
    }

    pub fn with_truncation(mut self, last_tokens: Option<usize>) -> Self {
        self.truncate_last = last_tokens;
        self
    }

    pub fn truncate_last(&self) -> Option<usize> {
        self.truncate_last
    }

    pub fn table(&self) -> &Arc<EmbeddingTable> {
        &self.table
    }

    pub(super) fn from_parts(
        table: Arc<EmbeddingTable>,
        class_count: usize,
        truncate_last: Option<usize>,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Self {
        BagOfEmbeddingsModel {
            table,
            class_count,
            truncate_last,
            weights,
            bias,
        }
    }

    fn feature(&self, doc: &Document) -> Vec<f64> {
        let n = doc.len();
        let skip = match self.truncate_last {
            Some(t) if n > t => n - t,
            _ => 0,
        };
        self.table.mean_vector(doc.surfaces().skip(skip))
    }

    fn logits(&self, feature: &[f64]) -> Vec<f64> {
        let d = self.table.dimension();
        (0..self.class_count)
            .map(|c| {
                self.bias[c]
                    + self.weights[c * d..(c + 1) * d]
                        .iter()
                        .zip(feature)
                        .map(|(w, f)| w * f)
                        .sum::<f64>()
            })
            .collect()
    }
}

impl ClassifierModel for BagOfEmbeddingsModel {
    fn class_count(&self) -> usize {
        self.class_count
    }

    fn predict_proba(&self, doc: &Document) -> Vec<f64> {
        softmax(&self.logits(&self.feature(doc)))
    }
}

impl TrainableModel for BagOfEmbeddingsModel {
    fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    fn params(&self) -> Vec<f64> {
        let mut p = self.weights.clone();
        p.extend_from_slice(&self.bias);
        p
    }

    fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.param_count());
        let nw = self.weights.len();
        self.weights.copy_from_slice(&params[..nw]);
        self.bias.copy_from_slice(&params[nw..]);
    }

    fn loss_and_grad(&self, batch: &[(&LabeledExample, f64)]) -> (f64, Vec<f64>) {
        let d = self.table.dimension();
        let c = self.class_count;
        let b = batch.len() as f64;
        let mut loss = 0.0;
        let mut gw = vec![0.0; c * d];
        let mut gb = vec![0.0; c];
        for (ex, weight) in batch {
            let f = self.feature(&ex.document);
            let p = softmax(&self.logits(&f));
            loss += weight * cross_entropy(&p, ex.label).expect("label in range");
            let scale = weight / b;
            for y in 0..c {
                let dlogit = scale * (p[y] - if y == ex.label { 1.0 } else { 0.0 });
                gb[y] += dlogit;
                for (g, feat) in gw[y * d..(y + 1) * d].iter_mut().zip(&f) {
                    *g += dlogit * feat;
                }
            }
        }
        let mut grad = gw;
        grad.extend_from_slice(&gb);
        (loss / b, grad)
    }
}
