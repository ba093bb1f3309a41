//! Run reports: resolved configuration, raw counts, and derived metrics.

use serde::{Deserialize, Serialize};

use crate::attack::{attack_corpus, AttackConfig, AttackOutcome, AttackSummary};
use crate::classifier::ClassifierModel;
use crate::embedding::EmbeddingTable;
use crate::error::Result;
use crate::training::{EpochLog, Phase, TrainConfig};

use super::{evaluate_accuracy, Corpus};

/// Robustness block of a run report. Wraps the attack summary with the
/// sampling parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    /// Number of test examples requested.
    pub requested: usize,
    /// Number actually attacked (whole split when requested >= split size).
    pub sampled: usize,
    pub seed: u64,
    pub attack: AttackConfig,
    pub summary: AttackSummary,
}

/// One epoch of training with only deterministic fields. Wall times live in
/// the separate training log, keeping reports byte-identical across reruns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochSummary {
    pub epoch: usize,
    pub phase: Phase,
    pub mean_loss: f64,
    pub adv_set_size: usize,
}

impl From<&EpochLog> for EpochSummary {
    fn from(log: &EpochLog) -> Self {
        EpochSummary {
            epoch: log.epoch,
            phase: log.phase,
            mean_loss: log.mean_loss,
            adv_set_size: log.adv_set_size,
        }
    }
}

/// Full record of one training or evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub corpus_name: String,
    pub class_count: usize,
    pub model_kind: String,
    /// Hex sha256 of the embedding source file.
    pub embedding_checksum: String,
    pub train_config: Option<TrainConfig>,
    pub epochs: Vec<EpochSummary>,
    pub clean_train_accuracy: Option<f64>,
    pub clean_dev_accuracy: Option<f64>,
    pub clean_test_accuracy: Option<f64>,
    pub robustness: Option<RobustnessReport>,
}

impl RunReport {
    pub fn new(corpus: &Corpus, model_kind: &str, embedding_checksum: &str) -> RunReport {
        RunReport {
            corpus_name: corpus.name.clone(),
            class_count: corpus.class_count,
            model_kind: model_kind.to_string(),
            embedding_checksum: embedding_checksum.to_string(),
            train_config: None,
            epochs: Vec::new(),
            clean_train_accuracy: None,
            clean_dev_accuracy: None,
            clean_test_accuracy: None,
            robustness: None,
        }
    }

    pub fn with_training(mut self, config: &TrainConfig, logs: &[EpochLog]) -> RunReport {
        self.train_config = Some(config.clone());
        self.epochs = logs.iter().map(EpochSummary::from).collect();
        self
    }
}

/// Attack `n` test examples and summarize. Uses the whole split when `n`
/// exceeds its size.
pub fn evaluate_robustness<M: ClassifierModel + ?Sized>(
    model: &M,
    table: &EmbeddingTable,
    corpus: &Corpus,
    n: usize,
    config: &AttackConfig,
    seed: u64,
) -> Result<(Vec<AttackOutcome>, RobustnessReport)> {
    let (outcomes, summary) = attack_corpus(model, table, &corpus.test, n, config, seed)?;
    let report = RobustnessReport {
        requested: n,
        sampled: outcomes.len(),
        seed,
        attack: config.clone(),
        summary,
    };
    Ok((outcomes, report))
}

/// Clean accuracy on each non-empty split.
pub fn fill_clean_accuracies<M: ClassifierModel + ?Sized>(
    report: &mut RunReport,
    model: &M,
    corpus: &Corpus,
) {
    let acc = |split: &[crate::text::LabeledExample]| {
        if split.is_empty() {
            None
        } else {
            Some(evaluate_accuracy(model, split))
        }
    };
    report.clean_train_accuracy = acc(&corpus.train);
    report.clean_dev_accuracy = acc(&corpus.dev);
    report.clean_test_accuracy = acc(&corpus.test);
}
