use serde::{Deserialize, Serialize};

use crate::text::LabeledExample;

use super::Corpus;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitLengthStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    /// (bucket start, document count), ascending; empty buckets omitted.
    pub buckets: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LengthStats {
    pub bucket_width: usize,
    pub train: SplitLengthStats,
    pub dev: SplitLengthStats,
    pub test: SplitLengthStats,
}

fn split_stats(examples: &[LabeledExample], bucket_width: usize) -> SplitLengthStats {
    let mut lengths: Vec<usize> = examples.iter().map(|e| e.document.len()).collect();
    lengths.sort_unstable();
    let count = lengths.len();
    let mean = if count == 0 {
        0.0
    } else {
        lengths.iter().sum::<usize>() as f64 / count as f64
    };
    let median = if count == 0 {
        0.0
    } else if count % 2 == 1 {
        lengths[count / 2] as f64
    } else {
        (lengths[count / 2 - 1] + lengths[count / 2]) as f64 / 2.0
    };
    let mut buckets: Vec<(usize, usize)> = Vec::new();
    for len in lengths {
        let start = (len / bucket_width) * bucket_width;
        match buckets.last_mut() {
            Some((s, c)) if *s == start => *c += 1,
            _ => buckets.push((start, 1)),
        }
    }
    SplitLengthStats {
        count,
        mean,
        median,
        buckets,
    }
}

/// Token-length distribution of each split.
pub fn length_stats(corpus: &Corpus, bucket_width: usize) -> LengthStats {
    LengthStats {
        bucket_width,
        train: split_stats(&corpus.train, bucket_width),
        dev: split_stats(&corpus.dev, bucket_width),
        test: split_stats(&corpus.test, bucket_width),
    }
}
