//! Synthetic desk-scale corpus with a matching embedding table.
//!
//! Two balanced classes. Each document is neutral filler plus a few
//! label-bearing keywords drawn from per-class synonym clusters. Strong
//! clusters mix overt members (large component on the overt class axis,
//! coordinate 0) with substitute members that trade the overt component
//! for a component on a second, latent class axis (coordinate 1) that no
//! naturally occurring word touches. Every keyword therefore has close
//! synonyms (pairwise cosine >= 0.8) whose overt class evidence is much
//! weaker, which is exactly the substitution the attack must find, while
//! the latent axis only ever enters a document through such a
//! substitution.
//!
//! Documents carry either one or two overt keywords. Two overt keywords
//! survive any single substitution on margin alone; a single overt
//! keyword does not, unless the model has learned the latent axis, which
//! plain training on natural text cannot do (the latent coordinate is
//! identically zero there).

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{tokenize, LabeledExample};

use super::Corpus;

const DIM: usize = 32;
/// Dimensions 2.. host topic directions and filler vectors alike, so no
/// single coordinate cleanly encodes cluster membership.
const SIGNAL_DIMS: usize = 2;
const STRONG_TOPICS: usize = 6;
const NEUTRAL_TOPICS: usize = 6;
const TOPICS_PER_CLASS: usize = STRONG_TOPICS + NEUTRAL_TOPICS;
/// Per-member components along the (overt, latent) class axes, in cluster
/// order. Members 0 and 1 are the overt forms that occur in documents;
/// members 2..=5 are the low-overt substitute forms carrying the latent
/// axis. All pairwise cosines within a cluster stay >= 0.8.
const MEMBER_AXES: [(f64, f64); 6] = [
    (0.45, 0.0),
    (0.42, 0.0),
    (0.10, 0.25),
    (0.02, 0.25),
    (-0.05, 0.25),
    (-0.10, 0.25),
];
const FILLER_COUNT: usize = 200;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub train_size: usize,
    pub dev_size: usize,
    pub test_size: usize,
    pub seed: u64,
    /// Probability of flipping an example's label.
    pub noise_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            train_size: 2000,
            dev_size: 200,
            test_size: 500,
            seed: 7,
            noise_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub corpus: Corpus,
    /// Matching word2vec-text embedding file contents.
    pub embeddings_text: String,
}

fn keyword_name(class: usize, topic: usize, member: usize) -> String {
    format!("k{class}t{topic:02}m{member}")
}

/// Parse a generated keyword name into (class, topic, member), if it is one.
pub fn keyword_parts(word: &str) -> Option<(usize, usize, usize)> {
    let bytes = word.as_bytes();
    if bytes.len() == 7 && bytes[0] == b'k' && bytes[2] == b't' && bytes[5] == b'm' {
        let class = (bytes[1] as char).to_digit(10)? as usize;
        let topic = 10 * (bytes[3] as char).to_digit(10)? as usize
            + (bytes[4] as char).to_digit(10)? as usize;
        let member = (bytes[6] as char).to_digit(10)? as usize;
        Some((class, topic, member))
    } else {
        None
    }
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim)
            .map(|_| {
                // Box-Muller
                let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
    v
}

/// A unit vector in the topic/filler subspace with bounded overlap against
/// every direction in `avoid`, so unrelated words never enter a cluster's
/// synonym neighborhood.
fn separated_unit(rng: &mut ChaCha8Rng, avoid: &[Vec<f64>]) -> Vec<f64> {
    loop {
        let v = random_unit(rng, DIM - SIGNAL_DIMS);
        if avoid.iter().all(|u| dot(u, &v).abs() < 0.4) {
            return v;
        }
    }
}

struct Vocabulary {
    lines: String,
}

fn build_vocabulary(rng: &mut ChaCha8Rng) -> Vocabulary {
    let mut lines = String::new();
    let mut push_word = |name: &str, v: &[f64]| {
        let comps: Vec<String> = v.iter().map(|c| format!("{c:.6}")).collect();
        lines.push_str(&format!("{name} {}\n", comps.join(" ")));
    };
    // coordinate 0: overt class axis; coordinate 1: latent class axis;
    // remaining coordinates: shared topic/filler subspace
    let mut topic_dirs: Vec<Vec<f64>> = Vec::new();
    for class in 0..2 {
        let sign = if class == 0 { 1.0 } else { -1.0 };
        for topic in 0..TOPICS_PER_CLASS {
            let u = separated_unit(rng, &topic_dirs);
            for (member, &(a0, a1)) in MEMBER_AXES.iter().enumerate() {
                // neutral clusters sit entirely on their topic direction
                let (a0, a1) = if topic < STRONG_TOPICS { (a0, a1) } else { (0.0, 0.0) };
                let b = (1.0 - a0 * a0 - a1 * a1).sqrt();
                let noise = random_unit(rng, DIM - SIGNAL_DIMS);
                let mut v = vec![sign * a0, sign * a1];
                v.extend(
                    (0..DIM - SIGNAL_DIMS).map(|i| b * u[i] + 0.005 * noise[i]),
                );
                push_word(&keyword_name(class, topic, member), &normalize(v));
            }
            topic_dirs.push(u);
        }
    }
    for f in 0..FILLER_COUNT {
        let tail = separated_unit(rng, &topic_dirs);
        let mut v = vec![0.0; SIGNAL_DIMS];
        v.extend(tail);
        push_word(&format!("f{f:03}"), &v);
    }
    Vocabulary { lines }
}

fn generate_document(rng: &mut ChaCha8Rng, class: usize) -> String {
    let n = rng.gen_range(15..=40usize);
    let keyword_count = rng.gen_range(2..=4usize);
    // most documents hinge on a single overt keyword; the rest carry two
    // and survive any one substitution on margin alone
    let overt_count = if rng.gen_range(0..100u32) < 85 { 1 } else { 2 };
    let mut words: Vec<String> = Vec::with_capacity(n);
    let first = rng.gen_range(0..STRONG_TOPICS);
    words.push(keyword_name(class, first, rng.gen_range(0..2)));
    if overt_count == 2 {
        let mut second = rng.gen_range(0..STRONG_TOPICS - 1);
        if second >= first {
            second += 1;
        }
        words.push(keyword_name(class, second, rng.gen_range(0..2)));
    }
    // topical but class-neutral context words, drawn from either class's
    // neutral clusters so their topic directions carry no label signal
    for _ in overt_count..keyword_count {
        let topic = STRONG_TOPICS + rng.gen_range(0..NEUTRAL_TOPICS);
        words.push(keyword_name(rng.gen_range(0..2), topic, rng.gen_range(0..6)));
    }
    while words.len() < n {
        words.push(format!("f{:03}", rng.gen_range(0..FILLER_COUNT)));
    }
    // random placement of keywords among the fillers
    for i in (1..words.len()).rev() {
        let j = rng.gen_range(0..=i);
        words.swap(i, j);
    }
    words.join(" ")
}

fn generate_split(
    rng: &mut ChaCha8Rng,
    size: usize,
    noise_rate: f64,
    seen: &mut HashSet<String>,
) -> Result<Vec<LabeledExample>> {
    let mut out = Vec::with_capacity(size);
    for i in 0..size {
        let class = i % 2;
        let mut text = None;
        for _ in 0..1000 {
            let candidate = generate_document(rng, class);
            if seen.insert(candidate.clone()) {
                text = Some(candidate);
                break;
            }
        }
        let text = text.ok_or_else(|| {
            Error::InvalidConfig("could not generate enough distinct documents".into())
        })?;
        let label = if noise_rate > 0.0 && rng.gen_bool(noise_rate) {
            1 - class
        } else {
            class
        };
        out.push(LabeledExample::new(tokenize(&text), label));
    }
    // shuffle so classes are not strictly alternating
    for i in (1..out.len()).rev() {
        let j = rng.gen_range(0..=i);
        out.swap(i, j);
    }
    Ok(out)
}

/// Deterministic two-class corpus plus its embedding file.
pub fn generate_synthetic_corpus(config: &SynthConfig) -> Result<SynthOutput> {
    if !(0.0..=1.0).contains(&config.noise_rate) {
        return Err(Error::InvalidConfig(format!(
            "noise_rate {} out of [0, 1]",
            config.noise_rate
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let vocab = build_vocabulary(&mut rng);
    let mut seen = HashSet::new();
    let train = generate_split(&mut rng, config.train_size, config.noise_rate, &mut seen)?;
    let dev = generate_split(&mut rng, config.dev_size, config.noise_rate, &mut seen)?;
    let test = generate_split(&mut rng, config.test_size, config.noise_rate, &mut seen)?;
    Ok(SynthOutput {
        corpus: Corpus {
            name: "synthetic".into(),
            class_count: 2,
            train,
            dev,
            test,
        },
        embeddings_text: vocab.lines,
    })
}
