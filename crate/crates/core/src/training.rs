//! Natural, adversarial, and augmentation-based training loops.

use std::collections::HashSet;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attack::{generate_adversarial, AttackConfig};
use crate::classifier::{train_batch, Adam, TrainableModel};
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::text::LabeledExample;

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Natural training epochs.
    pub n_nat: usize,
    /// Adversarial training epochs.
    pub n_adv: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Fraction of the natural-set size to generate as adversarial examples.
    pub adv_fraction: f64,
    /// Adversarial loss weight γ.
    pub gamma: f64,
    pub seed: u64,
    pub attack: AttackConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n_nat: 3,
            n_adv: 7,
            batch_size: 8,
            lr: 1e-2,
            adv_fraction: 0.2,
            gamma: 1.0,
            seed: 0,
            attack: AttackConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 1 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.adv_fraction) {
            return Err(Error::InvalidConfig(format!(
                "adv_fraction {} out of [0, 1]",
                self.adv_fraction
            )));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidConfig("gamma must be >= 0".into()));
        }
        if self.lr <= 0.0 {
            return Err(Error::InvalidConfig("lr must be positive".into()));
        }
        self.attack.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Natural,
    Adversarial,
    Augmented,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub phase: Phase,
    pub mean_loss: f64,
    pub adv_set_size: usize,
    pub wall_time_secs: f64,
}

/// Label-preserving example transformer (the back-translation role).
pub trait Augmenter {
    /// Zero or more new examples with the same label. Outputs that duplicate
    /// existing texts are dropped downstream.
    fn transform(&self, example: &LabeledExample, seed: u64) -> Vec<LabeledExample>;
}

/// Augmenter that replaces `swaps` random in-vocabulary tokens with their
/// top-1 synonym.
pub struct SynonymSwapAugmenter {
    table: Arc<EmbeddingTable>,
    pub swaps: usize,
}

impl SynonymSwapAugmenter {
    pub fn new(table: Arc<EmbeddingTable>, swaps: usize) -> Self {
        SynonymSwapAugmenter { table, swaps }
    }
}

impl Augmenter for SynonymSwapAugmenter {
    fn transform(&self, example: &LabeledExample, seed: u64) -> Vec<LabeledExample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let doc = &example.document;
        let mut positions: Vec<usize> = (0..doc.len())
            .filter(|&i| self.table.contains(doc.surface(i).unwrap()))
            .collect();
        positions.shuffle(&mut rng);
        positions.truncate(self.swaps);
        let mut out = doc.clone();
        let mut changed = false;
        for i in positions {
            let word = out.surface(i).unwrap();
            if let Ok(syns) = self.table.nearest_synonyms(word, 1) {
                if let Some(top) = syns.first() {
                    out = out.replace_word(i, &top.word).expect("valid replacement");
                    changed = true;
                }
            }
        }
        if changed && out.detokenize() != doc.detokenize() {
            vec![LabeledExample::new(out, example.label)]
        } else {
            vec![]
        }
    }
}

/// Augmenter that produces nothing.
pub struct NullAugmenter;

impl Augmenter for NullAugmenter {
    fn transform(&self, _example: &LabeledExample, _seed: u64) -> Vec<LabeledExample> {
        vec![]
    }
}

fn mix(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SHUFFLE_STREAM: u64 = 1;
const ADV_STREAM: u64 = 2;
const AUGMENT_STREAM: u64 = 3;

/// One seeded-shuffled pass over `data` with per-example weights; returns
/// the size-weighted mean of the pre-update batch losses.
fn train_one_epoch<M: TrainableModel>(
    model: &mut M,
    data: &[(&LabeledExample, f64)],
    config: &TrainConfig,
    optimizer: &mut Adam,
    epoch: usize,
) -> f64 {
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix(
        config.seed,
        SHUFFLE_STREAM.wrapping_add((epoch as u64) << 8),
    ));
    order.shuffle(&mut rng);
    let mut loss_sum = 0.0;
    let mut count = 0usize;
    for chunk in order.chunks(config.batch_size) {
        let batch: Vec<(&LabeledExample, f64)> = chunk.iter().map(|&i| data[i]).collect();
        let report = train_batch(model, &batch, optimizer, config.lr);
        loss_sum += report.mean_loss * batch.len() as f64;
        count += batch.len();
    }
    if count == 0 {
        0.0
    } else {
        loss_sum / count as f64
    }
}

/// Mini-batch cross-entropy training on the natural set for `n_nat` epochs.
pub fn natural_train<M: TrainableModel>(
    model: &mut M,
    dataset: &[LabeledExample],
    config: &TrainConfig,
) -> Result<Vec<EpochLog>> {
    config.validate()?;
    let mut optimizer = Adam::new(model.param_count());
    let data: Vec<(&LabeledExample, f64)> = dataset.iter().map(|e| (e, 1.0)).collect();
    let mut logs = Vec::new();
    for epoch in 0..config.n_nat {
        let t0 = Instant::now();
        let mean_loss = train_one_epoch(model, &data, config, &mut optimizer, epoch);
        logs.push(EpochLog {
            epoch,
            phase: Phase::Natural,
            mean_loss,
            adv_set_size: 0,
            wall_time_secs: t0.elapsed().as_secs_f64(),
        });
    }
    Ok(logs)
}

/// Generate adversarial examples against the current model until
/// `ceil(adv_fraction * |dataset|)` successes or one full pass.
pub fn build_adv_set<M: TrainableModel>(
    model: &M,
    table: &EmbeddingTable,
    dataset: &[LabeledExample],
    config: &TrainConfig,
    epoch: usize,
) -> Result<Vec<LabeledExample>> {
    let target = (config.adv_fraction * dataset.len() as f64).ceil() as usize;
    let mut out = Vec::new();
    if target == 0 {
        return Ok(out);
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix(
        config.seed,
        ADV_STREAM.wrapping_add((epoch as u64) << 8),
    ));
    order.shuffle(&mut rng);
    for idx in order {
        if out.len() >= target {
            break;
        }
        let outcome = generate_adversarial(model, table, &dataset[idx], &config.attack)?;
        if outcome.success {
            out.push(LabeledExample::new(
                outcome.adversarial,
                dataset[idx].label,
            ));
        }
    }
    Ok(out)
}

/// Adversarial training: natural epochs first, then `n_adv` epochs each of
/// which rebuilds the adversarial set against the current parameters, joins
/// it with the natural set (deduplicated by exact text), and trains with
/// natural weight 1 and adversarial weight γ.
pub fn adversarial_train<M: TrainableModel>(
    model: &mut M,
    table: &EmbeddingTable,
    dataset: &[LabeledExample],
    config: &TrainConfig,
) -> Result<Vec<EpochLog>> {
    adversarial_train_probed(model, table, dataset, config, |_| {})
}

/// As [`adversarial_train`], with a hook invoked on each epoch's freshly
/// built adversarial set before training. Used by verification suites.
pub fn adversarial_train_probed<M, F>(
    model: &mut M,
    table: &EmbeddingTable,
    dataset: &[LabeledExample],
    config: &TrainConfig,
    mut probe: F,
) -> Result<Vec<EpochLog>>
where
    M: TrainableModel,
    F: FnMut(&mut Vec<LabeledExample>),
{
    config.validate()?;
    let mut optimizer = Adam::new(model.param_count());
    let natural: Vec<(&LabeledExample, f64)> = dataset.iter().map(|e| (e, 1.0)).collect();
    let mut logs = Vec::new();
    for epoch in 0..config.n_nat {
        let t0 = Instant::now();
        let mean_loss = train_one_epoch(model, &natural, config, &mut optimizer, epoch);
        logs.push(EpochLog {
            epoch,
            phase: Phase::Natural,
            mean_loss,
            adv_set_size: 0,
            wall_time_secs: t0.elapsed().as_secs_f64(),
        });
    }
    for j in 0..config.n_adv {
        let epoch = config.n_nat + j;
        let t0 = Instant::now();
        let mut adv = build_adv_set(model, table, dataset, config, epoch)?;
        probe(&mut adv);
        let mut seen: HashSet<String> =
            dataset.iter().map(|e| e.document.detokenize()).collect();
        let mut data: Vec<(&LabeledExample, f64)> = natural.clone();
        let mut kept = 0usize;
        for ex in &adv {
            if seen.insert(ex.document.detokenize()) {
                data.push((ex, config.gamma));
                kept += 1;
            }
        }
        let mean_loss = train_one_epoch(model, &data, config, &mut optimizer, epoch);
        logs.push(EpochLog {
            epoch,
            phase: Phase::Adversarial,
            mean_loss,
            adv_set_size: kept,
            wall_time_secs: t0.elapsed().as_secs_f64(),
        });
    }
    Ok(logs)
}

/// Union of the dataset and augmenter outputs, deduplicated by exact
/// detokenized text. Originals are always retained.
pub fn augment_dataset<A: Augmenter + ?Sized>(
    dataset: &[LabeledExample],
    augmenter: &A,
    seed: u64,
) -> Vec<LabeledExample> {
    let mut out: Vec<LabeledExample> = dataset.to_vec();
    let mut seen: HashSet<String> = dataset.iter().map(|e| e.document.detokenize()).collect();
    for (i, ex) in dataset.iter().enumerate() {
        for aug in augmenter.transform(ex, mix(seed, AUGMENT_STREAM.wrapping_add(i as u64))) {
            debug_assert_eq!(aug.label, ex.label);
            if seen.insert(aug.document.detokenize()) {
                out.push(aug);
            }
        }
    }
    out
}

/// Merge externally supplied examples through the same dedup rule.
pub fn augment_with_examples(
    dataset: &[LabeledExample],
    extra: &[LabeledExample],
) -> Vec<LabeledExample> {
    let mut out: Vec<LabeledExample> = dataset.to_vec();
    let mut seen: HashSet<String> = dataset.iter().map(|e| e.document.detokenize()).collect();
    for ex in extra {
        if seen.insert(ex.document.detokenize()) {
            out.push(ex.clone());
        }
    }
    out
}

/// Natural-style training on the augmented dataset for `n_nat + n_adv`
/// epochs, all example weights 1.
pub fn augmented_train<M: TrainableModel, A: Augmenter + ?Sized>(
    model: &mut M,
    dataset: &[LabeledExample],
    augmenter: &A,
    config: &TrainConfig,
) -> Result<Vec<EpochLog>> {
    config.validate()?;
    let augmented = augment_dataset(dataset, augmenter, config.seed);
    let data: Vec<(&LabeledExample, f64)> = augmented.iter().map(|e| (e, 1.0)).collect();
    let mut optimizer = Adam::new(model.param_count());
    let mut logs = Vec::new();
    for epoch in 0..config.n_nat + config.n_adv {
        let t0 = Instant::now();
        let mean_loss = train_one_epoch(model, &data, config, &mut optimizer, epoch);
        logs.push(EpochLog {
            epoch,
            phase: Phase::Augmented,
            mean_loss,
            adv_set_size: augmented.len() - dataset.len(),
            wall_time_secs: t0.elapsed().as_secs_f64(),
        });
    }
    Ok(logs)
}
