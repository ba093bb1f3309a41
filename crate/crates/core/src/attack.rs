//! Deletion-based word importance, greedy synonym substitution, and
//! corpus-level attack runs against a black-box classifier.

use serde::{Deserialize, Serialize};

use crate::classifier::{argmax, ClassifierModel};
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::text::{Document, LabeledExample};

/// Attack hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    /// Number of top-ranked words eligible for perturbation.
    pub k: usize,
    /// Synonym candidates per word.
    pub m: usize,
    /// Sentence-similarity acceptance bound for a perturbation.
    pub threshold: f64,
    /// Minimum word-level cosine for a synonym candidate.
    pub min_word_cos: f64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            k: 10,
            m: 8,
            threshold: 0.5,
            min_word_cos: 0.5,
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.m < 1 {
            return Err(Error::InvalidConfig("k and m must be >= 1".into()));
        }
        if self.threshold <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "threshold {} must be positive",
                self.threshold
            )));
        }
        if !(-1.0..=1.0).contains(&self.min_word_cos) {
            return Err(Error::InvalidConfig(format!(
                "min_word_cos {} out of [-1, 1]",
                self.min_word_cos
            )));
        }
        Ok(())
    }
}

/// Token indices ordered by decreasing importance score. Ties break toward
/// the lower index.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceRanking {
    pub entries: Vec<(usize, f64)>,
}

/// Record of one greedy attack run.
#[derive(Debug, Clone)]
pub struct AttackOutcome {
    pub original: LabeledExample,
    pub adversarial: Document,
    pub predicted_before: usize,
    pub predicted_after: usize,
    pub success: bool,
    pub skipped: bool,
    pub perturbed_indices: Vec<usize>,
    pub similarity: f64,
    pub queries: u64,
}

/// Aggregate statistics over one [`attack_corpus`] run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSummary {
    pub total: usize,
    pub skipped: usize,
    pub attacked: usize,
    pub successes: usize,
    /// Fraction of sampled examples the model classifies correctly.
    pub clean_accuracy: f64,
    /// Fraction of attacked (non-skipped) examples where the attack failed.
    pub robust_accuracy: f64,
    /// Fraction of all sampled examples still classified correctly after the
    /// attack (skipped examples count as incorrect).
    pub robust_accuracy_overall: f64,
    pub attack_success_rate: f64,
    pub mean_queries: f64,
    pub mean_perturbed_words: f64,
    pub mean_similarity: f64,
}

fn predict_counted<M: ClassifierModel + ?Sized>(
    model: &M,
    doc: &Document,
    queries: &mut u64,
) -> Vec<f64> {
    *queries += 1;
    model.predict_proba(doc)
}

/// Importance of deleting word `i` given the model's scores before and after
/// the deletion. First branch when the prediction is unchanged, second when
/// it flips to `y'`.
fn importance_score(base: &[f64], deleted: &[f64], y: usize) -> f64 {
    let y_del = argmax(deleted);
    if y_del == y {
        base[y] - deleted[y]
    } else {
        (base[y] - deleted[y]) + (deleted[y_del] - base[y_del])
    }
}

/// Deletion-based importance of word `i` in `x` for true label `y`.
/// The caller must ensure the model predicts `y` on `x`.
pub fn word_importance<M: ClassifierModel + ?Sized>(
    model: &M,
    x: &Document,
    y: usize,
    i: usize,
) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::NoDeletableWord);
    }
    let mut queries = 0;
    let base = predict_counted(model, x, &mut queries);
    let deleted = predict_counted(model, &x.delete_word(i)?, &mut queries);
    Ok(importance_score(&base, &deleted, y))
}

fn rank_words_counted<M: ClassifierModel + ?Sized>(
    model: &M,
    x: &Document,
    y: usize,
    k: usize,
    base: &[f64],
    queries: &mut u64,
) -> Result<ImportanceRanking> {
    if x.len() < 2 {
        return Err(Error::NoDeletableWord);
    }
    let mut entries: Vec<(usize, f64)> = (0..x.len())
        .map(|i| {
            let deleted = predict_counted(model, &x.delete_word(i)?, queries);
            Ok((i, importance_score(base, &deleted, y)))
        })
        .collect::<Result<_>>()?;
    entries.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    entries.truncate(k.min(x.len()));
    Ok(ImportanceRanking { entries })
}

/// Importance scores for every word, truncated to the top `min(k, n)`.
pub fn rank_words<M: ClassifierModel + ?Sized>(
    model: &M,
    x: &Document,
    y: usize,
    k: usize,
) -> Result<ImportanceRanking> {
    let mut queries = 0;
    let base = predict_counted(model, x, &mut queries);
    rank_words_counted(model, x, y, k, &base, &mut queries)
}

/// Outcome of the perturbation generator at one position.
#[derive(Debug, Clone)]
pub enum PerturbOutcome {
    /// Chosen replacement: the admissible candidate minimizing the model's
    /// true-class probability.
    Replacement {
        word: String,
        word_cos: f64,
        document: Document,
        probs: Vec<f64>,
    },
    /// No synonym candidate passed the word-cosine filter.
    NoCandidates,
    /// The word at this position is not in the embedding vocabulary.
    OutOfVocabulary,
}

fn perturb_word_counted<M: ClassifierModel + ?Sized>(
    model: &M,
    table: &EmbeddingTable,
    x: &Document,
    i: usize,
    y: usize,
    config: &AttackConfig,
    queries: &mut u64,
) -> Result<PerturbOutcome> {
    let surface = x.surface(i).ok_or(Error::InvalidIndex {
        index: i,
        len: x.len(),
    })?;
    let candidates = match table.nearest_synonyms(surface, config.m) {
        Ok(c) => c,
        Err(Error::OutOfVocabulary(_)) => return Ok(PerturbOutcome::OutOfVocabulary),
        Err(e) => return Err(e),
    };
    let mut best: Option<(f64, String, f64, Document, Vec<f64>)> = None;
    // candidates arrive sorted by descending cosine then lexicographic word,
    // so keeping the first strict minimum implements the tie rules
    for cand in candidates {
        if cand.similarity < config.min_word_cos {
            continue;
        }
        let doc = x.replace_word(i, &cand.word)?;
        let probs = predict_counted(model, &doc, queries);
        let score = probs[y];
        let better = match &best {
            None => true,
            Some((best_score, ..)) => score < *best_score,
        };
        if better {
            best = Some((score, cand.word, cand.similarity, doc, probs));
        }
    }
    Ok(match best {
        Some((_, word, word_cos, document, probs)) => PerturbOutcome::Replacement {
            word,
            word_cos,
            document,
            probs,
        },
        None => PerturbOutcome::NoCandidates,
    })
}

/// Choose a replacement for word `i` of `x`: query up to `m` synonyms,
/// discard those under the word-cosine floor, and keep the one minimizing
/// the model's probability for label `y`.
pub fn perturb_word<M: ClassifierModel + ?Sized>(
    model: &M,
    table: &EmbeddingTable,
    x: &Document,
    i: usize,
    y: usize,
    config: &AttackConfig,
) -> Result<PerturbOutcome> {
    let mut queries = 0;
    perturb_word_counted(model, table, x, i, y, config, &mut queries)
}

/// Greedy adversarial example generation: rank words by deletion importance,
/// then walk the top-k positions committing any perturbation that both flips
/// the prediction and passes the sentence-similarity gate.
pub fn generate_adversarial<M: ClassifierModel + ?Sized>(
    model: &M,
    table: &EmbeddingTable,
    example: &LabeledExample,
    config: &AttackConfig,
) -> Result<AttackOutcome> {
    config.validate()?;
    let x = &example.document;
    let y = example.label;
    let mut queries = 0u64;
    let base = predict_counted(model, x, &mut queries);
    let predicted_before = argmax(&base);

    let finish = |adversarial: Document,
                  predicted_after: usize,
                  success: bool,
                  skipped: bool,
                  perturbed: Vec<usize>,
                  queries: u64| {
        let similarity = table.sentence_similarity(&adversarial, x);
        AttackOutcome {
            original: example.clone(),
            adversarial,
            predicted_before,
            predicted_after,
            success,
            skipped,
            perturbed_indices: perturbed,
            similarity,
            queries,
        }
    };

    if predicted_before != y {
        return Ok(finish(x.clone(), predicted_before, false, true, vec![], queries));
    }
    if x.len() < 2 {
        return Ok(finish(x.clone(), predicted_before, false, false, vec![], queries));
    }

    let ranking = rank_words_counted(model, x, y, config.k, &base, &mut queries)?;
    let mut current = x.clone();
    let mut current_pred = y;
    let mut perturbed = Vec::new();
    for &(i, _) in &ranking.entries {
        let outcome =
            perturb_word_counted(model, table, &current, i, y, config, &mut queries)?;
        let (document, probs) = match outcome {
            PerturbOutcome::Replacement { document, probs, .. } => (document, probs),
            _ => continue,
        };
        let pred = argmax(&probs);
        if pred != y && table.sentence_similarity(&document, x) > config.threshold {
            current = document;
            current_pred = pred;
            perturbed.push(i);
        }
    }
    perturbed.sort_unstable();
    let success = current_pred != y;
    Ok(finish(current, current_pred, success, false, perturbed, queries))
}

/// Attack `n` examples drawn without replacement by seeded shuffle.
pub fn attack_corpus<M: ClassifierModel + ?Sized>(
    model: &M,
    table: &EmbeddingTable,
    examples: &[LabeledExample],
    n: usize,
    config: &AttackConfig,
    seed: u64,
) -> Result<(Vec<AttackOutcome>, AttackSummary)> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let mut indices: Vec<usize> = (0..examples.len()).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    indices.truncate(n.min(examples.len()));

    let outcomes: Vec<AttackOutcome> = indices
        .iter()
        .map(|&i| generate_adversarial(model, table, &examples[i], config))
        .collect::<Result<_>>()?;
    let summary = summarize(&outcomes);
    Ok((outcomes, summary))
}

pub fn summarize(outcomes: &[AttackOutcome]) -> AttackSummary {
    let total = outcomes.len();
    let skipped = outcomes.iter().filter(|o| o.skipped).count();
    let attacked = total - skipped;
    let successes = outcomes.iter().filter(|o| o.success).count();
    let survived = attacked - successes;
    let mean = |iter: &mut dyn Iterator<Item = f64>| {
        let values: Vec<f64> = iter.collect();
        if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        }
    };
    AttackSummary {
        total,
        skipped,
        attacked,
        successes,
        clean_accuracy: ratio(attacked, total),
        robust_accuracy: if attacked == 0 {
            1.0
        } else {
            ratio(survived, attacked)
        },
        robust_accuracy_overall: ratio(survived, total),
        attack_success_rate: ratio(successes, attacked),
        mean_queries: mean(
            &mut outcomes
                .iter()
                .filter(|o| !o.skipped)
                .map(|o| o.queries as f64),
        ),
        mean_perturbed_words: mean(
            &mut outcomes
                .iter()
                .filter(|o| o.success)
                .map(|o| o.perturbed_indices.len() as f64),
        ),
        mean_similarity: mean(
            &mut outcomes.iter().filter(|o| o.success).map(|o| o.similarity),
        ),
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::BagOfEmbeddingsModel;
    use crate::classifier::TrainableModel;
    use crate::text::tokenize;
    use std::collections::HashMap;
    use std::sync::Arc;

    /// Test stub emitting fixed probabilities per detokenized text.
    struct ScriptedModel {
        scripts: HashMap<String, Vec<f64>>,
        default: Vec<f64>,
    }

    impl ScriptedModel {
        fn new(default: Vec<f64>) -> Self {
            ScriptedModel {
                scripts: HashMap::new(),
                default,
            }
        }
        fn on(mut self, text: &str, probs: Vec<f64>) -> Self {
            self.scripts.insert(text.to_string(), probs);
            self
        }
    }

    impl ClassifierModel for ScriptedModel {
        fn class_count(&self) -> usize {
            self.default.len()
        }
        fn predict_proba(&self, doc: &Document) -> Vec<f64> {
            self.scripts
                .get(&doc.detokenize())
                .cloned()
                .unwrap_or_else(|| self.default.clone())
        }
    }

    fn gate_table() -> EmbeddingTable {
        // good = [0.5, 0.866]; iffy is a 0.81-cosine synonym with an
        // opposite-sign first component; fine is a near-duplicate synonym;
        // pad is neutral filler.
        EmbeddingTable::load(
            "good 0.5 0.8660254\niffy -0.1 0.99498744\nfine 0.45 0.89302855\npad 0 1\n"
                .as_bytes(),
        )
        .unwrap()
    }

    fn gate_model(table: &Arc<EmbeddingTable>) -> BagOfEmbeddingsModel {
        let mut m = BagOfEmbeddingsModel::new(table.clone(), 2, 0);
        // class 0 scores the first embedding axis positively
        m.set_params(&[8.0, 0.0, -8.0, 0.0, 0.0, 0.0]);
        m
    }

    #[test]
    fn importance_zero_when_probs_unchanged() {
        let model = ScriptedModel::new(vec![0.7, 0.3]);
        let x = tokenize("a b c");
        let s = word_importance(&model, &x, 0, 1).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn importance_second_branch() {
        // My(X)=0.8, My(X')=0.3 with a flip: (0.8-0.3)+(0.7-0.2) = 1.0
        let model = ScriptedModel::new(vec![0.8, 0.2]).on("a c", vec![0.3, 0.7]);
        let x = tokenize("a b c");
        let s = word_importance(&model, &x, 0, 1).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn importance_first_branch() {
        let model = ScriptedModel::new(vec![0.9, 0.1]).on("a c", vec![0.6, 0.4]);
        let x = tokenize("a b c");
        let s = word_importance(&model, &x, 0, 1).unwrap();
        assert!((s - 0.3).abs() < 1e-12);
    }

    #[test]
    fn importance_single_token_error() {
        let model = ScriptedModel::new(vec![1.0, 0.0]);
        assert!(matches!(
            word_importance(&model, &tokenize("a"), 0, 0),
            Err(Error::NoDeletableWord)
        ));
    }

    #[test]
    fn rank_words_tie_rule_and_sorting() {
        // all deletions leave probs unchanged -> all scores 0 -> indices 0..k
        let model = ScriptedModel::new(vec![0.7, 0.3]);
        let x = tokenize("a b c d");
        let r = rank_words(&model, &x, 0, 3).unwrap();
        assert_eq!(r.entries.iter().map(|e| e.0).collect::<Vec<_>>(), vec![0, 1, 2]);

        // scores [0.1, 0.9, 0.5] via scripted deletions
        let model = ScriptedModel::new(vec![0.9, 0.1])
            .on("b c", vec![0.8, 0.2])
            .on("a c", vec![0.0, 1.0])
            .on("a b", vec![0.4, 0.6]);
        let x = tokenize("a b c");
        let r = rank_words(&model, &x, 0, 2).unwrap();
        assert_eq!(r.entries[0].0, 1);
        assert_eq!(r.entries[1].0, 2);
        assert!(r.entries[0].1 >= r.entries[1].1);
    }

    #[test]
    fn rank_words_matches_brute_force_oracle() {
        let table = Arc::new(gate_table());
        let model = gate_model(&table);
        let x = tokenize("good pad fine pad good pad pad iffy pad pad fine pad");
        let y = model.predict(&x);
        let r = rank_words(&model, &x, y, x.len()).unwrap();
        // independent brute-force deletion loop
        let base = model.predict_proba(&x);
        let mut expect: Vec<(usize, f64)> = (0..x.len())
            .map(|i| {
                let del = x.delete_word(i).unwrap();
                let dp = model.predict_proba(&del);
                let yd = argmax(&dp);
                let s = if yd == y {
                    base[y] - dp[y]
                } else {
                    (base[y] - dp[y]) + (dp[yd] - base[yd])
                };
                (i, s)
            })
            .collect();
        expect.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        assert_eq!(r.entries.len(), expect.len());
        for (got, want) in r.entries.iter().zip(&expect) {
            assert_eq!(got.0, want.0);
            assert!((got.1 - want.1).abs() < 1e-12);
        }
    }

    #[test]
    fn perturb_skips_oov_and_empty_candidate_sets() {
        let table = gate_table();
        let model = ScriptedModel::new(vec![0.9, 0.1]);
        let cfg = AttackConfig::default();
        let x = tokenize("unknownword pad");
        assert!(matches!(
            perturb_word(&model, &table, &x, 0, 0, &cfg).unwrap(),
            PerturbOutcome::OutOfVocabulary
        ));
        let strict = AttackConfig {
            min_word_cos: 0.9999,
            ..cfg
        };
        let x = tokenize("good pad");
        assert!(matches!(
            perturb_word(&model, &table, &x, 0, 0, &strict).unwrap(),
            PerturbOutcome::NoCandidates
        ));
    }

    #[test]
    fn perturb_picks_lowest_true_class_probability() {
        let table = gate_table();
        // candidates for "good" above 0.5 cosine: fine, pad, iffy
        let model = ScriptedModel::new(vec![0.9, 0.1])
            .on("fine pad", vec![0.6, 0.4])
            .on("iffy pad", vec![0.4, 0.6])
            .on("pad pad", vec![0.5, 0.5]);
        let cfg = AttackConfig::default();
        match perturb_word(&model, &table, &tokenize("good pad"), 0, 0, &cfg).unwrap() {
            PerturbOutcome::Replacement { word, .. } => assert_eq!(word, "iffy"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn perturb_single_candidate_is_chosen() {
        let table = EmbeddingTable::load("good 1 0\nfine 0.9 0.43588989\n".as_bytes()).unwrap();
        let model = ScriptedModel::new(vec![0.9, 0.1]);
        let cfg = AttackConfig::default();
        match perturb_word(&model, &table, &tokenize("good good"), 0, 0, &cfg).unwrap() {
            PerturbOutcome::Replacement { word, .. } => assert_eq!(word, "fine"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn attack_skips_already_misclassified() {
        let table = gate_table();
        let model = ScriptedModel::new(vec![0.2, 0.8]);
        let ex = LabeledExample::new(tokenize("good pad"), 0);
        let out = generate_adversarial(&model, &table, &ex, &AttackConfig::default()).unwrap();
        assert!(out.skipped);
        assert!(!out.success);
        assert!(out.perturbed_indices.is_empty());
        assert_eq!(out.adversarial, ex.document);
        assert_eq!(out.queries, 1);
    }

    #[test]
    fn attack_flips_via_best_synonym() {
        let table = gate_table();
        // only the single replacement good -> iffy flips the stub
        let model = ScriptedModel::new(vec![0.9, 0.1])
            .on("iffy pad pad pad pad pad", vec![0.2, 0.8]);
        let ex = LabeledExample::new(tokenize("good pad pad pad pad pad"), 0);
        let out = generate_adversarial(&model, &table, &ex, &AttackConfig::default()).unwrap();
        assert!(out.success, "attack failed: {out:?}");
        assert!(!out.skipped);
        assert_eq!(out.perturbed_indices, vec![0]);
        assert_eq!(out.adversarial.surface(0), Some("iffy"));
        assert!(out.similarity > 0.5);
        assert_eq!(model.predict(&out.adversarial), 1);
        assert_eq!(out.predicted_after, 1);
        // n deletions + base + candidate queries
        assert!(out.queries >= ex.document.len() as u64 + 1);
    }

    #[test]
    fn attack_commits_every_individually_flipping_perturbation() {
        // The loop runs over all ranked words even after a flip; with a
        // linear model every later swap also keeps the flipped prediction,
        // so every position commits.
        let table = Arc::new(gate_table());
        let model = gate_model(&table);
        let ex = LabeledExample::new(tokenize("good pad pad pad pad pad"), 0);
        assert_eq!(model.predict(&ex.document), 0);
        let out = generate_adversarial(&model, &*table, &ex, &AttackConfig::default()).unwrap();
        assert!(out.success);
        assert_eq!(out.perturbed_indices, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(model.predict(&out.adversarial), 1);
        assert!(out.similarity > 0.5);
    }

    #[test]
    fn attack_gate_rejection_returns_original() {
        let table = Arc::new(gate_table());
        let model = gate_model(&table);
        let ex = LabeledExample::new(tokenize("good pad pad pad pad pad"), 0);
        let cfg = AttackConfig {
            threshold: 0.999,
            ..AttackConfig::default()
        };
        let out = generate_adversarial(&model, &*table, &ex, &cfg).unwrap();
        assert!(!out.success);
        assert!(!out.skipped);
        assert_eq!(out.adversarial, ex.document);
        assert!(out.perturbed_indices.is_empty());
    }

    #[test]
    fn attack_degenerate_single_token() {
        let table = gate_table();
        let model = ScriptedModel::new(vec![0.9, 0.1]);
        let ex = LabeledExample::new(tokenize("good"), 0);
        let out = generate_adversarial(&model, &table, &ex, &AttackConfig::default()).unwrap();
        assert!(!out.success && !out.skipped);
        assert_eq!(out.adversarial, ex.document);
    }

    #[test]
    fn attack_is_deterministic() {
        let table = Arc::new(gate_table());
        let model = gate_model(&table);
        let ex = LabeledExample::new(tokenize("good fine pad pad good pad"), 0);
        let cfg = AttackConfig::default();
        let a = generate_adversarial(&model, &*table, &ex, &cfg).unwrap();
        let b = generate_adversarial(&model, &*table, &ex, &cfg).unwrap();
        assert_eq!(a.adversarial, b.adversarial);
        assert_eq!(a.queries, b.queries);
        assert_eq!(a.perturbed_indices, b.perturbed_indices);
    }

    #[test]
    fn corpus_gate_closed_bookkeeping() {
        let table = Arc::new(gate_table());
        let model = gate_model(&table);
        let examples: Vec<LabeledExample> = (0..10)
            .map(|i| {
                LabeledExample::new(
                    tokenize(if i % 2 == 0 {
                        "good good pad pad"
                    } else {
                        "iffy iffy pad pad"
                    }),
                    if i % 2 == 0 { 0 } else { 1 },
                )
            })
            .collect();
        let cfg = AttackConfig {
            threshold: 1.01,
            ..AttackConfig::default()
        };
        let (outcomes, summary) =
            attack_corpus(&model, &table, &examples, 10, &cfg, 0).unwrap();
        assert_eq!(summary.total, 10);
        assert_eq!(summary.skipped + summary.attacked, 10);
        assert_eq!(summary.successes, 0);
        assert_eq!(summary.robust_accuracy, 1.0);
        assert_eq!(summary.attack_success_rate, 0.0);
        for o in &outcomes {
            assert!(!o.success);
            assert_eq!(o.adversarial, o.original.document);
        }
    }

    #[test]
    fn corpus_uniform_model_skips_consistently() {
        let table = gate_table();
        let model = ScriptedModel::new(vec![0.5, 0.5]); // argmax always 0
        let examples: Vec<LabeledExample> = (0..8)
            .map(|i| LabeledExample::new(tokenize("good pad pad"), i % 2))
            .collect();
        let (_, summary) =
            attack_corpus(&model, &table, &examples, 8, &AttackConfig::default(), 1).unwrap();
        assert_eq!(summary.skipped + summary.attacked, summary.total);
        assert_eq!(summary.skipped, 4); // label-1 examples are misclassified
    }

    #[test]
    fn corpus_seeded_runs_identical() {
        let table = Arc::new(gate_table());
        let model = gate_model(&table);
        let examples: Vec<LabeledExample> = (0..20)
            .map(|i| {
                LabeledExample::new(
                    tokenize(if i % 3 == 0 {
                        "good pad pad pad"
                    } else {
                        "good fine pad pad pad pad"
                    }),
                    0,
                )
            })
            .collect();
        let cfg = AttackConfig::default();
        let (_, s1) = attack_corpus(&model, &table, &examples, 12, &cfg, 9).unwrap();
        let (_, s2) = attack_corpus(&model, &table, &examples, 12, &cfg, 9).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn successful_outcomes_respect_gate_and_topk() {
        let table = Arc::new(gate_table());
        let model = gate_model(&table);
        let examples: Vec<LabeledExample> = (0..30)
            .map(|_| LabeledExample::new(tokenize("good pad pad pad pad good pad pad"), 0))
            .collect();
        let cfg = AttackConfig {
            k: 3,
            ..AttackConfig::default()
        };
        let (outcomes, _) = attack_corpus(&model, &table, &examples, 30, &cfg, 3).unwrap();
        for o in outcomes {
            assert!(o.perturbed_indices.len() <= cfg.k);
            if o.success {
                assert!(
                    table.sentence_similarity(&o.adversarial, &o.original.document)
                        > cfg.threshold
                );
            } else {
                assert_eq!(o.adversarial, o.original.document);
            }
            if !o.skipped {
                assert!(o.queries >= o.original.document.len() as u64);
            }
        }
    }
}
