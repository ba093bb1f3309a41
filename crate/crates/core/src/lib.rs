//! Black-box synonym-substitution attacks on text classifiers, and the
//! adversarial-training defense against them.
//!
//! The crate is organized around five layers:
//!
//! - [`text`]: word-level tokenization, edits, and overlapping chunking
//! - [`embedding`]: word vectors, synonym queries, and sentence similarity
//! - [`classifier`]: trainable classifiers behind one probability interface
//! - [`attack`]: deletion-based word importance and greedy substitution
//! - [`training`]: natural, adversarial, and augmented training loops
//! - [`harness`]: corpus IO, synthetic data, metrics, and reports

pub mod attack;
pub mod classifier;
pub mod embedding;
pub mod error;
pub mod harness;
pub mod text;
pub mod training;

pub use error::{Error, Result};
