//! Dataset IO, synthetic corpus generation, metrics, and report structures.

mod corpus;
mod report;
mod stats;
mod synth;

pub use corpus::{load_corpus, write_split, Corpus};
pub use report::{
    evaluate_robustness, fill_clean_accuracies, EpochSummary, RobustnessReport, RunReport,
};
pub use stats::{length_stats, LengthStats, SplitLengthStats};
pub use synth::{generate_synthetic_corpus, keyword_parts, SynthConfig, SynthOutput};

use crate::classifier::ClassifierModel;
use crate::text::LabeledExample;

/// Fraction of examples the model classifies correctly.
pub fn evaluate_accuracy<M: ClassifierModel + ?Sized>(
    model: &M,
    examples: &[LabeledExample],
) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let correct = examples
        .iter()
        .filter(|e| model.predict(&e.document) == e.label)
        .count();
    correct as f64 / examples.len() as f64
}
