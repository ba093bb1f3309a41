use std::sync::Arc;

use crate::embedding::EmbeddingTable;
use crate::error::Result;
use crate::text::{ChunkPlan, Document, LabeledExample};

use super::{cross_entropy, init_uniform, softmax, ClassifierModel, TrainableModel};

/// Hierarchical long-document classifier: overlapping chunks, per-chunk mean
/// embedding features, 1-D convolution over the chunk sequence (tanh), max
/// pooling over time, then a dense softmax head.
#[derive(Debug, Clone)]
pub struct ChunkedPoolingModel {
    table: Arc<EmbeddingTable>,
    class_count: usize,
    chunk_size: usize,
    overlap: usize,
    filter_count: usize,
    filter_width: usize,
    /// filter_count × filter_width × dimension
    filters: Vec<f64>,
    filter_bias: Vec<f64>,
    /// class_count × filter_count
    dense: Vec<f64>,
    dense_bias: Vec<f64>,
}

struct Forward {
    chunk_feats: Vec<Vec<f64>>,
    activations: Vec<Vec<f64>>, // filter_count × chunk_count
    pool_argmax: Vec<usize>,
    pooled: Vec<f64>,
    probs: Vec<f64>,
}

impl ChunkedPoolingModel {
    pub fn new(
        table: Arc<EmbeddingTable>,
        class_count: usize,
        chunk_size: usize,
        overlap: usize,
        filter_count: usize,
        filter_width: usize,
        seed: u64,
    ) -> Result<Self> {
        // validate chunk params up front
        ChunkPlan::new(chunk_size + 1, chunk_size, overlap)?;
        assert!(filter_width % 2 == 1, "filter width must be odd");
        let d = table.dimension();
        Ok(ChunkedPoolingModel {
            table,
            class_count,
            chunk_size,
            overlap,
            filter_count,
            filter_width,
            filters: init_uniform(filter_count * filter_width * d, seed),
            filter_bias: vec![0.0; filter_count],
            dense: init_uniform(class_count * filter_count, seed.wrapping_add(1)),
            dense_bias: vec![0.0; class_count],
        })
    }

    pub fn table(&self) -> &Arc<EmbeddingTable> {
        &self.table
    }

    pub fn chunk_size(&self) -> usize {
        self.chunk_size
    }

    pub fn overlap(&self) -> usize {
        self.overlap
    }

    pub fn filter_count(&self) -> usize {
        self.filter_count
    }

    pub fn filter_width(&self) -> usize {
        self.filter_width
    }

    #[allow(clippy::too_many_arguments)]
    pub(super) fn from_parts(
        table: Arc<EmbeddingTable>,
        class_count: usize,
        chunk_size: usize,
        overlap: usize,
        filter_count: usize,
        filter_width: usize,
        params: &[f64],
    ) -> Self {
        let d = table.dimension();
        let mut model = ChunkedPoolingModel {
            table,
            class_count,
            chunk_size,
            overlap,
            filter_count,
            filter_width,
            filters: vec![0.0; filter_count * filter_width * d],
            filter_bias: vec![0.0; filter_count],
            dense: vec![0.0; class_count * filter_count],
            dense_bias: vec![0.0; class_count],
        };
        model.set_params(params);
        model
    }

    fn chunk_features(&self, doc: &Document) -> Vec<Vec<f64>> {
        let plan = ChunkPlan::new(doc.len(), self.chunk_size, self.overlap)
            .expect("chunk parameters validated at construction");
        plan.ranges(doc.len())
            .into_iter()
            .map(|(s, e)| self.table.mean_vector(doc.surfaces().skip(s).take(e - s)))
            .collect()
    }

    fn forward(&self, doc: &Document) -> Forward {
        let d = self.table.dimension();
        let w = self.filter_width;
        let pad = w / 2;
        let chunk_feats = self.chunk_features(doc);
        let t_len = chunk_feats.len();
        let mut activations = vec![vec![0.0; t_len]; self.filter_count];
        let mut pool_argmax = vec![0usize; self.filter_count];
        let mut pooled = vec![f64::NEG_INFINITY; self.filter_count];
        for f in 0..self.filter_count {
            for t in 0..t_len {
                let mut pre = self.filter_bias[f];
                for j in 0..w {
                    let src = t as isize + j as isize - pad as isize;
                    if src < 0 || src as usize >= t_len {
                        continue; // zero padding
                    }
                    let x = &chunk_feats[src as usize];
                    let base = (f * w + j) * d;
                    for c in 0..d {
                        pre += self.filters[base + c] * x[c];
                    }
                }
                let z = pre.tanh();
                activations[f][t] = z;
                if z > pooled[f] {
                    pooled[f] = z;
                    pool_argmax[f] = t;
                }
            }
        }
        let logits: Vec<f64> = (0..self.class_count)
            .map(|y| {
                self.dense_bias[y]
                    + self.dense[y * self.filter_count..(y + 1) * self.filter_count]
                        .iter()
                        .zip(&pooled)
                        .map(|(u, p)| u * p)
                        .sum::<f64>()
            })
            .collect();
        Forward {
            chunk_feats,
            activations,
            pool_argmax,
            pooled,
            probs: softmax(&logits),
        }
    }

    /// Smallest gap between the pooled maximum and the runner-up activation
    /// across filters. Infinite for single-chunk inputs.
    pub fn min_pool_margin(&self, doc: &Document) -> f64 {
        let fwd = self.forward(doc);
        let mut margin = f64::INFINITY;
        for f in 0..self.filter_count {
            let best = fwd.pooled[f];
            for (t, &z) in fwd.activations[f].iter().enumerate() {
                if t != fwd.pool_argmax[f] {
                    margin = margin.min(best - z);
                }
            }
        }
        margin
    }
}

impl ClassifierModel for ChunkedPoolingModel {
    fn class_count(&self) -> usize {
        self.class_count
    }

    fn predict_proba(&self, doc: &Document) -> Vec<f64> {
        self.forward(doc).probs
    }
}

impl TrainableModel for ChunkedPoolingModel {
    fn param_count(&self) -> usize {
        self.filters.len() + self.filter_bias.len() + self.dense.len() + self.dense_bias.len()
    }

    fn params(&self) -> Vec<f64> {
        let mut p = self.filters.clone();
        p.extend_from_slice(&self.filter_bias);
        p.extend_from_slice(&self.dense);
        p.extend_from_slice(&self.dense_bias);
        p
    }

    fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.param_count());
        let mut offset = 0;
        for dst in [
            &mut self.filters,
            &mut self.filter_bias,
            &mut self.dense,
            &mut self.dense_bias,
        ] {
            let len = dst.len();
            dst.copy_from_slice(&params[offset..offset + len]);
            offset += len;
        }
    }

    fn loss_and_grad(&self, batch: &[(&LabeledExample, f64)]) -> (f64, Vec<f64>) {
        let d = self.table.dimension();
        let w = self.filter_width;
        let pad = w / 2;
        let fc = self.filter_count;
        let b = batch.len() as f64;
        let mut loss = 0.0;
        let mut g_filters = vec![0.0; self.filters.len()];
        let mut g_fbias = vec![0.0; fc];
        let mut g_dense = vec![0.0; self.dense.len()];
        let mut g_dbias = vec![0.0; self.class_count];
        for (ex, weight) in batch {
            let fwd = self.forward(&ex.document);
            loss += weight * cross_entropy(&fwd.probs, ex.label).expect("label in range");
            let scale = weight / b;
            let mut dpool = vec![0.0; fc];
            for y in 0..self.class_count {
                let dlogit = scale * (fwd.probs[y] - if y == ex.label { 1.0 } else { 0.0 });
                g_dbias[y] += dlogit;
                for f in 0..fc {
                    g_dense[y * fc + f] += dlogit * fwd.pooled[f];
                    dpool[f] += self.dense[y * fc + f] * dlogit;
                }
            }
            let t_len = fwd.chunk_feats.len();
            for f in 0..fc {
                let t_star = fwd.pool_argmax[f];
                let z = fwd.activations[f][t_star];
                let dpre = dpool[f] * (1.0 - z * z);
                g_fbias[f] += dpre;
                for j in 0..w {
                    let src = t_star as isize + j as isize - pad as isize;
                    if src < 0 || src as usize >= t_len {
                        continue;
                    }
                    let x = &fwd.chunk_feats[src as usize];
                    let base = (f * w + j) * d;
                    for c in 0..d {
                        g_filters[base + c] += dpre * x[c];
                    }
                }
            }
        }
        let mut grad = g_filters;
        grad.extend_from_slice(&g_fbias);
        grad.extend_from_slice(&g_dense);
        grad.extend_from_slice(&g_dbias);
        (loss / b, grad)
    }
}
