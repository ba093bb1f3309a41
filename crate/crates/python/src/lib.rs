//! Python bindings: embedding tables, classifiers, training loops, and the
//! substitution attack behind a small scripting-friendly surface.

use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use advtext::attack::{generate_adversarial, summarize, AttackConfig};
use advtext::classifier::{load_model, save_model, AnyModel, BagOfEmbeddingsModel, ClassifierModel};
use advtext::embedding::EmbeddingTable;
use advtext::harness::{evaluate_accuracy, generate_synthetic_corpus, SynthConfig};
use advtext::text::{tokenize as tokenize_rs, LabeledExample};
use advtext::training::{adversarial_train, natural_train, TrainConfig};

fn value_err(e: advtext::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_examples(pairs: Vec<(String, usize)>) -> Vec<LabeledExample> {
    pairs
        .into_iter()
        .map(|(text, label)| LabeledExample::new(tokenize_rs(&text), label))
        .collect()
}

/// Lowercased word and punctuation tokens.
#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    tokenize_rs(text).surfaces().map(str::to_owned).collect()
}

/// Word vectors in word2vec text format with cosine synonym lookup.
#[pyclass]
struct Embeddings {
    inner: Arc<EmbeddingTable>,
}

#[pymethods]
impl Embeddings {
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Embeddings> {
        let bytes = std::fs::read(path)
            .map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        Ok(Embeddings {
            inner: Arc::new(EmbeddingTable::load(&bytes[..]).map_err(value_err)?),
        })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Embeddings> {
        Ok(Embeddings {
            inner: Arc::new(EmbeddingTable::load(text.as_bytes()).map_err(value_err)?),
        })
    }

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, word: &str) -> bool {
        self.inner.contains(word)
    }

    /// Up to `m` nearest in-vocabulary words by cosine, as (word, cosine).
    fn nearest_synonyms(&self, word: &str, m: usize) -> PyResult<Vec<(String, f64)>> {
        Ok(self
            .inner
            .nearest_synonyms(word, m)
            .map_err(value_err)?
            .into_iter()
            .map(|c| (c.word, c.similarity))
            .collect())
    }

    /// Cosine between the mean word vectors of two texts.
    fn sentence_similarity(&self, a: &str, b: &str) -> f64 {
        self.inner
            .sentence_similarity(&tokenize_rs(a), &tokenize_rs(b))
    }
}

/// Outcome of one adversarial attack run.
#[pyclass]
struct AttackResult {
    #[pyo3(get)]
    success: bool,
    #[pyo3(get)]
    skipped: bool,
    #[pyo3(get)]
    adversarial_text: String,
    #[pyo3(get)]
    predicted_before: usize,
    #[pyo3(get)]
    predicted_after: usize,
    #[pyo3(get)]
    perturbed_indices: Vec<usize>,
    #[pyo3(get)]
    similarity: f64,
    #[pyo3(get)]
    queries: u64,
}

/// A trainable text classifier bound to an embedding table.
#[pyclass]
struct Model {
    inner: AnyModel,
}

#[pymethods]
impl Model {
    /// Mean-of-embeddings softmax classifier with random initial weights.
    #[staticmethod]
    #[pyo3(signature = (embeddings, class_count, seed = 0))]
    fn bag(embeddings: &Embeddings, class_count: usize, seed: u64) -> Model {
        Model {
            inner: AnyModel::Bag(BagOfEmbeddingsModel::new(
                embeddings.inner.clone(),
                class_count,
                seed,
            )),
        }
    }

    #[staticmethod]
    fn load(path: &str, embeddings: &Embeddings) -> PyResult<Model> {
        let bytes = std::fs::read(path)
            .map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        Ok(Model {
            inner: load_model(&bytes, embeddings.inner.clone()).map_err(value_err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        std::fs::write(path, save_model(&self.inner))
            .map_err(|e| PyIOError::new_err(format!("{path}: {e}")))
    }

    fn predict(&self, text: &str) -> usize {
        self.inner.predict(&tokenize_rs(text))
    }

    fn predict_proba(&self, text: &str) -> Vec<f64> {
        self.inner.predict_proba(&tokenize_rs(text))
    }

    /// Accuracy over (text, label) pairs.
    fn accuracy(&self, examples: Vec<(String, usize)>) -> f64 {
        evaluate_accuracy(&self.inner, &to_examples(examples))
    }

    /// Mini-batch cross-entropy training; returns per-epoch mean losses.
    #[pyo3(signature = (examples, epochs = 10, batch_size = 8, lr = 0.01, seed = 0))]
    fn train_natural(
        &mut self,
        examples: Vec<(String, usize)>,
        epochs: usize,
        batch_size: usize,
        lr: f64,
        seed: u64,
    ) -> PyResult<Vec<f64>> {
        let config = TrainConfig {
            n_nat: epochs,
            n_adv: 0,
            batch_size,
            lr,
            seed,
            ..TrainConfig::default()
        };
        let logs = natural_train(&mut self.inner, &to_examples(examples), &config)
            .map_err(value_err)?;
        Ok(logs.into_iter().map(|l| l.mean_loss).collect())
    }

    /// Natural epochs followed by adversarial epochs that mix in freshly
    /// generated adversarial examples with loss weight `gamma`; returns
    /// per-epoch mean losses.
    #[pyo3(signature = (examples, n_nat = 3, n_adv = 7, batch_size = 8, lr = 0.01,
                        adv_fraction = 0.2, gamma = 1.0, seed = 0))]
    #[allow(clippy::too_many_arguments)]
    fn train_adversarial(
        &mut self,
        examples: Vec<(String, usize)>,
        n_nat: usize,
        n_adv: usize,
        batch_size: usize,
        lr: f64,
        adv_fraction: f64,
        gamma: f64,
        seed: u64,
    ) -> PyResult<Vec<f64>> {
        let config = TrainConfig {
            n_nat,
            n_adv,
            batch_size,
            lr,
            adv_fraction,
            gamma,
            seed,
            ..TrainConfig::default()
        };
        let table = self.inner.table().clone();
        let logs = adversarial_train(&mut self.inner, &table, &to_examples(examples), &config)
            .map_err(value_err)?;
        Ok(logs.into_iter().map(|l| l.mean_loss).collect())
    }

    /// Greedy word-substitution attack against this model.
    #[pyo3(signature = (text, label, k = 10, m = 8, threshold = 0.5, min_word_cos = 0.5))]
    fn attack(
        &self,
        text: &str,
        label: usize,
        k: usize,
        m: usize,
        threshold: f64,
        min_word_cos: f64,
    ) -> PyResult<AttackResult> {
        let config = AttackConfig {
            k,
            m,
            threshold,
            min_word_cos,
        };
        let example = LabeledExample::new(tokenize_rs(text), label);
        let table = self.inner.table().clone();
        let outcome =
            generate_adversarial(&self.inner, &table, &example, &config).map_err(value_err)?;
        Ok(AttackResult {
            success: outcome.success,
            skipped: outcome.skipped,
            adversarial_text: outcome.adversarial.detokenize(),
            predicted_before: outcome.predicted_before,
            predicted_after: outcome.predicted_after,
            perturbed_indices: outcome.perturbed_indices,
            similarity: outcome.similarity,
            queries: outcome.queries,
        })
    }

    /// Attack each (text, label) pair and return summary statistics.
    #[pyo3(signature = (examples, k = 10, m = 8, threshold = 0.5, min_word_cos = 0.5))]
    fn attack_many(
        &self,
        py: Python<'_>,
        examples: Vec<(String, usize)>,
        k: usize,
        m: usize,
        threshold: f64,
        min_word_cos: f64,
    ) -> PyResult<PyObject> {
        let config = AttackConfig {
            k,
            m,
            threshold,
            min_word_cos,
        };
        let table = self.inner.table().clone();
        let outcomes: Vec<_> = to_examples(examples)
            .iter()
            .map(|ex| generate_adversarial(&self.inner, &table, ex, &config))
            .collect::<advtext::Result<_>>()
            .map_err(value_err)?;
        let summary = summarize(&outcomes);
        let dict = pyo3::types::PyDict::new_bound(py);
        dict.set_item("total", summary.total)?;
        dict.set_item("skipped", summary.skipped)?;
        dict.set_item("successes", summary.successes)?;
        dict.set_item("clean_accuracy", summary.clean_accuracy)?;
        dict.set_item("robust_accuracy", summary.robust_accuracy)?;
        dict.set_item("robust_accuracy_overall", summary.robust_accuracy_overall)?;
        dict.set_item("attack_success_rate", summary.attack_success_rate)?;
        Ok(dict.into())
    }
}

/// Deterministic two-class corpus; returns (train, dev, test, embeddings
/// text), each split a list of (text, label).
#[pyfunction]
#[pyo3(signature = (train_size = 2000, dev_size = 200, test_size = 500, seed = 7,
                    noise_rate = 0.0))]
fn synthesize_corpus(
    train_size: usize,
    dev_size: usize,
    test_size: usize,
    seed: u64,
    noise_rate: f64,
) -> PyResult<(
    Vec<(String, usize)>,
    Vec<(String, usize)>,
    Vec<(String, usize)>,
    String,
)> {
    let out = generate_synthetic_corpus(&SynthConfig {
        train_size,
        dev_size,
        test_size,
        seed,
        noise_rate,
    })
    .map_err(value_err)?;
    let pairs = |split: &[LabeledExample]| {
        split
            .iter()
            .map(|e| (e.document.detokenize(), e.label))
            .collect()
    };
    Ok((
        pairs(&out.corpus.train),
        pairs(&out.corpus.dev),
        pairs(&out.corpus.test),
        out.embeddings_text,
    ))
}

#[pymodule]
fn advtext_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_corpus, m)?)?;
    m.add_class::<Embeddings>()?;
    m.add_class::<Model>()?;
    m.add_class::<AttackResult>()?;
    Ok(())
}
