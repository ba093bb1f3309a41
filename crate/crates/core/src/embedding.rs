//! Counter-fitted style word vectors: word2vec text loader, cosine synonym
//! queries, and the mean-vector sentence encoder used by the similarity gate.

use std::collections::HashMap;
use std::io::Read;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::text::Document;

/// A synonym query hit.
#[derive(Debug, Clone, PartialEq)]
pub struct SynonymCandidate {
    pub word: String,
    pub similarity: f64,
}

/// Immutable table of unit-normalized word vectors.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dimension: usize,
    words: Vec<String>,
    vectors: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
    checksum: String,
}

impl EmbeddingTable {
    /// Parse word2vec text format: an optional `count dim` header line, then
    /// one `word v1 .. vd` line per entry. Vectors are unit-normalized on
    /// load; duplicate words keep the first occurrence.
    pub fn load<R: Read>(mut source: R) -> Result<EmbeddingTable> {
        let mut bytes = Vec::new();
        source.read_to_end(&mut bytes)?;
        let checksum = hex_sha256(&bytes);
        let text = String::from_utf8(bytes).map_err(|e| Error::EmbeddingParse {
            line: 0,
            message: format!("not valid UTF-8: {e}"),
        })?;

        let mut words = Vec::new();
        let mut vectors: Vec<Vec<f64>> = Vec::new();
        let mut index = HashMap::new();
        let mut dimension = 0usize;

        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            // Header line: exactly two integer fields before any data line.
            if words.is_empty()
                && dimension == 0
                && fields.len() == 2
                && fields.iter().all(|f| f.parse::<usize>().is_ok())
            {
                continue;
            }
            if fields.len() < 2 {
                return Err(Error::EmbeddingParse {
                    line: lineno,
                    message: "expected a word and at least one component".into(),
                });
            }
            let word = fields[0].to_string();
            let comps: Vec<f64> = fields[1..]
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|_| Error::EmbeddingParse {
                        line: lineno,
                        message: format!("unparsable number {f:?}"),
                    })
                })
                .collect::<Result<_>>()?;
            if dimension == 0 {
                dimension = comps.len();
            } else if comps.len() != dimension {
                return Err(Error::EmbeddingParse {
                    line: lineno,
                    message: format!("expected {dimension} components, found {}", comps.len()),
                });
            }
            if index.contains_key(&word) {
                continue;
            }
            let norm = l2_norm(&comps);
            if norm == 0.0 {
                return Err(Error::EmbeddingParse {
                    line: lineno,
                    message: format!("zero vector for word {word:?}"),
                });
            }
            let unit: Vec<f64> = comps.iter().map(|c| c / norm).collect();
            index.insert(word.clone(), words.len());
            words.push(word);
            vectors.push(unit);
        }

        if words.is_empty() {
            return Err(Error::EmptyEmbeddings);
        }
        Ok(EmbeddingTable {
            dimension,
            words,
            vectors,
            index,
            checksum,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Hex SHA-256 of the source byte stream the table was loaded from.
    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.vectors[i].as_slice())
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    /// The `m` in-vocabulary words most cosine-similar to `word`, excluding
    /// the query itself, descending; ties break lexicographically.
    pub fn nearest_synonyms(&self, word: &str, m: usize) -> Result<Vec<SynonymCandidate>> {
        let &qi = self
            .index
            .get(word)
            .ok_or_else(|| Error::OutOfVocabulary(word.to_string()))?;
        let query = &self.vectors[qi];
        let mut hits: Vec<SynonymCandidate> = self
            .words
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != qi)
            .map(|(i, w)| SynonymCandidate {
                word: w.clone(),
                similarity: dot(query, &self.vectors[i]).clamp(-1.0, 1.0),
            })
            .collect();
        hits.sort_by(|a, b| {
            b.similarity
                .partial_cmp(&a.similarity)
                .unwrap()
                .then_with(|| a.word.cmp(&b.word))
        });
        hits.truncate(m);
        Ok(hits)
    }

    /// Mean of the unit vectors of in-vocabulary tokens, unit-normalized.
    /// Empty or all-OOV documents encode to the zero vector.
    pub fn encode_sentence(&self, doc: &Document) -> Vec<f64> {
        let mut sum = vec![0.0; self.dimension];
        let mut count = 0usize;
        for surface in doc.surfaces() {
            if let Some(v) = self.vector(surface) {
                for (s, c) in sum.iter_mut().zip(v) {
                    *s += c;
                }
                count += 1;
            }
        }
        if count == 0 {
            return sum;
        }
        let norm = l2_norm(&sum);
        if norm == 0.0 {
            return sum;
        }
        sum.iter().map(|s| s / norm).collect()
    }

    /// Mean of in-vocabulary token unit vectors without re-normalization.
    /// This is the classifier feature vector.
    pub fn mean_vector(&self, surfaces: impl Iterator<Item = impl AsRef<str>>) -> Vec<f64> {
        let mut sum = vec![0.0; self.dimension];
        let mut count = 0usize;
        for surface in surfaces {
            if let Some(v) = self.vector(surface.as_ref()) {
                for (s, c) in sum.iter_mut().zip(v) {
                    *s += c;
                }
                count += 1;
            }
        }
        if count > 0 {
            for s in sum.iter_mut() {
                *s /= count as f64;
            }
        }
        sum
    }

    /// Cosine of the two sentence encodings; 0 when either encodes to zero.
    pub fn sentence_similarity(&self, a: &Document, b: &Document) -> f64 {
        let ea = self.encode_sentence(a);
        let eb = self.encode_sentence(b);
        if l2_norm(&ea) == 0.0 || l2_norm(&eb) == 0.0 {
            return 0.0;
        }
        dot(&ea, &eb).clamp(-1.0, 1.0)
    }
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn l2_norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// `u·v / (‖u‖‖v‖)`, clamped to `[-1, 1]`.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(u.len(), v.len()));
    }
    let nu = l2_norm(u);
    let nv = l2_norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

pub fn hex_sha256(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(src: &str) -> EmbeddingTable {
        EmbeddingTable::load(src.as_bytes()).unwrap()
    }

    #[test]
    fn load_two_words() {
        let t = table("good 1 0\nfine 0.9 0.1\n");
        assert_eq!(t.dimension(), 2);
        assert_eq!(t.len(), 2);
        for w in ["good", "fine"] {
            let n = l2_norm(t.vector(w).unwrap());
            assert!((n - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn load_with_header_and_crlf() {
        let t = table("2 2\r\ngood 1 0\r\nfine 0 1\r\n");
        assert_eq!(t.len(), 2);
        assert_eq!(t.dimension(), 2);
    }

    #[test]
    fn load_wrong_component_count() {
        let err = EmbeddingTable::load("good 1 0\nbad 1 0 0\n".as_bytes()).unwrap_err();
        match err {
            Error::EmbeddingParse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn load_unparsable_number() {
        let err = EmbeddingTable::load("good 1 zz\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::EmbeddingParse { line: 1, .. }));
    }

    #[test]
    fn load_empty_source() {
        assert!(matches!(
            EmbeddingTable::load("".as_bytes()),
            Err(Error::EmptyEmbeddings)
        ));
    }

    #[test]
    fn load_duplicates_keep_first() {
        let t = table("good 1 0\ngood 0 1\n");
        assert_eq!(t.len(), 1);
        assert_eq!(t.vector("good").unwrap(), &[1.0, 0.0]);
    }

    #[test]
    fn load_100_words_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut src = String::new();
        for i in 0..100 {
            let v: Vec<String> = (0..8)
                .map(|_| format!("{:.5}", rng.gen_range(-1.0..1.0f64)))
                .collect();
            src.push_str(&format!("w{i} {}\n", v.join(" ")));
        }
        let t = table(&src);
        assert_eq!(t.len(), 100);
        for w in t.words.clone() {
            assert!((l2_norm(t.vector(&w).unwrap()) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn cosine_basics() {
        let v = vec![0.3, -0.4, 1.2];
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap().abs() < 1e-12);
        let c = cosine_similarity(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - 0.70710678).abs() < 1e-8);
    }

    #[test]
    fn cosine_errors() {
        assert!(matches!(
            cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::ZeroVector)
        ));
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 0.0]),
            Err(Error::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn nearest_synonyms_ordering() {
        // cosine(good, fine) = 0.9, cosine(good, bad) = -0.5 by construction
        let t = table("good 1 0\nfine 0.9 0.43588989435\nbad -0.5 0.86602540378\n");
        let hits = t.nearest_synonyms("good", 2).unwrap();
        assert_eq!(hits.len(), 2);
        assert_eq!(hits[0].word, "fine");
        assert!((hits[0].similarity - 0.9).abs() < 1e-9);
        assert_eq!(hits[1].word, "bad");
        assert!((hits[1].similarity + 0.5).abs() < 1e-9);
    }

    #[test]
    fn nearest_synonyms_oov() {
        let t = table("good 1 0\n");
        assert!(matches!(
            t.nearest_synonyms("missing", 3),
            Err(Error::OutOfVocabulary(_))
        ));
    }

    #[test]
    fn nearest_synonyms_m_larger_than_vocab() {
        let t = table("a 1 0\nb 0 1\nc -1 0\n");
        let hits = t.nearest_synonyms("a", 10).unwrap();
        assert_eq!(hits.len(), 2);
        assert!(hits[0].similarity >= hits[1].similarity);
    }

    #[test]
    fn nearest_synonyms_tie_lexicographic() {
        let t = table("q 1 0\nzz 0 1\naa 0 1\n");
        let hits = t.nearest_synonyms("q", 2).unwrap();
        assert_eq!(hits[0].word, "aa");
        assert_eq!(hits[1].word, "zz");
    }

    #[test]
    fn nearest_synonyms_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut src = String::new();
        for i in 0..400 {
            let v: Vec<String> = (0..6)
                .map(|_| format!("{:.6}", rng.gen_range(-1.0..1.0f64)))
                .collect();
            src.push_str(&format!("w{i:03} {}\n", v.join(" ")));
        }
        let t = table(&src);
        for qi in (0..400).step_by(37) {
            let q = format!("w{qi:03}");
            let hits = t.nearest_synonyms(&q, 5).unwrap();
            // independent exhaustive scan
            let qv = t.vector(&q).unwrap().to_vec();
            let mut all: Vec<(String, f64)> = t
                .words()
                .filter(|w| *w != q)
                .map(|w| (w.to_string(), cosine_similarity(&qv, t.vector(w).unwrap()).unwrap()))
                .collect();
            all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
            for (hit, (w, s)) in hits.iter().zip(all.iter()) {
                assert_eq!(&hit.word, w);
                assert!((hit.similarity - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn encode_sentence_cases() {
        let t = table("good 1 0\nfine 0 1\n");
        let single = t.encode_sentence(&tokenize("good"));
        assert!((single[0] - 1.0).abs() < 1e-12 && single[1].abs() < 1e-12);
        let empty = t.encode_sentence(&tokenize(""));
        assert_eq!(empty, vec![0.0, 0.0]);
        let both = t.encode_sentence(&tokenize("good fine"));
        assert!((both[0] - 0.7071).abs() < 1e-4 && (both[1] - 0.7071).abs() < 1e-4);
        let oov = t.encode_sentence(&tokenize("missing words"));
        assert_eq!(oov, vec![0.0, 0.0]);
    }

    #[test]
    fn sentence_similarity_cases() {
        let t = table("a 1 0 0\nb 0 1 0\nc 0 0 1\n");
        let x = tokenize("a b");
        assert!((t.sentence_similarity(&x, &x) - 1.0).abs() < 1e-12);
        // disjoint orthogonal vocabularies
        assert!(t.sentence_similarity(&tokenize("a"), &tokenize("c")).abs() < 1e-12);
        // zero encoding on one side
        assert_eq!(t.sentence_similarity(&tokenize("zzz"), &x), 0.0);
    }

    #[test]
    fn sentence_similarity_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut src = String::new();
        for i in 0..30 {
            let v: Vec<String> = (0..10)
                .map(|_| format!("{:.6}", rng.gen_range(-1.0..1.0f64)))
                .collect();
            src.push_str(&format!("w{i} {}\n", v.join(" ")));
        }
        let t = table(&src);
        for _ in 0..50 {
            let mk = |rng: &mut ChaCha8Rng| {
                let n = rng.gen_range(1..12);
                let words: Vec<String> =
                    (0..n).map(|_| format!("w{}", rng.gen_range(0..30))).collect();
                tokenize(&words.join(" "))
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            assert!((t.sentence_similarity(&a, &b) - t.sentence_similarity(&b, &a)).abs() < 1e-9);
        }
    }

    #[test]
    fn synonym_swap_similarity_lower_bound() {
        // With mutually orthogonal token vectors, replacing one token by a
        // synonym of cosine s >= 0 keeps sentence similarity at exactly
        // (n - 1 + s) / n; checked against brute-force vector arithmetic.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let n = rng.gen_range(2..25usize);
            let d = n + 2;
            let s: f64 = rng.gen_range(0.0..1.0);
            let mut src = String::new();
            for i in 0..n {
                let mut v = vec![0.0; d];
                v[i] = 1.0;
                let line: Vec<String> = v.iter().map(|c| format!("{c}")).collect();
                src.push_str(&format!("t{i:02} {}\n", line.join(" ")));
            }
            let mut syn = vec![0.0; d];
            syn[0] = s;
            syn[n] = (1.0 - s * s).sqrt();
            let line: Vec<String> = syn.iter().map(|c| format!("{c:.15}")).collect();
            src.push_str(&format!("syn {}\n", line.join(" ")));
            let t = table(&src);
            let words: Vec<String> = (0..n).map(|i| format!("t{i:02}")).collect();
            let orig = tokenize(&words.join(" "));
            let swapped = orig.replace_word(0, "syn").unwrap();
            let sim = t.sentence_similarity(&orig, &swapped);
            let bound = (n as f64 - 1.0 + s) / n as f64 - 1e-6;
            assert!(sim >= bound, "n={n} s={s} sim={sim} bound={bound}");
            // brute-force check of the encoder arithmetic
            let mut sum_b = vec![0.0; d];
            for w in swapped.surfaces() {
                for (acc, c) in sum_b.iter_mut().zip(t.vector(w).unwrap()) {
                    *acc += c;
                }
            }
            let mut sum_a = vec![0.0; d];
            for i in 0..n {
                sum_a[i] = 1.0;
            }
            let expect = cosine_similarity(&sum_a, &sum_b).unwrap();
            assert!((sim - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn one_synonym_swap_keeps_similarity_high() {
        // 20-token doc with one token swapped for a 0.9-cosine synonym.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d = 16;
        let mut src = String::new();
        for i in 0..20 {
            let v: Vec<String> = (0..d)
                .map(|_| format!("{:.6}", rng.gen_range(-1.0..1.0f64)))
                .collect();
            src.push_str(&format!("t{i:02} {}\n", v.join(" ")));
        }
        // synonym of t00 at cosine 0.9: rotate toward an orthogonal direction
        let t0 = table(&src);
        let v0 = t0.vector("t00").unwrap().to_vec();
        let mut orth: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let proj = dot(&orth, &v0);
        for (o, v) in orth.iter_mut().zip(&v0) {
            *o -= proj * v;
        }
        let on = l2_norm(&orth);
        let syn: Vec<f64> = v0
            .iter()
            .zip(&orth)
            .map(|(a, b)| 0.9 * a + (1.0 - 0.81f64).sqrt() * b / on)
            .collect();
        let syn_line: Vec<String> = syn.iter().map(|c| format!("{c:.12}")).collect();
        src.push_str(&format!("syn {}\n", syn_line.join(" ")));
        let t = table(&src);
        assert!((cosine_similarity(&t.vector("t00").unwrap(), &t.vector("syn").unwrap()).unwrap() - 0.9).abs() < 1e-6);

        let words: Vec<String> = (0..20).map(|i| format!("t{i:02}")).collect();
        let orig = tokenize(&words.join(" "));
        let swapped = orig.replace_word(0, "syn").unwrap();
        let sim = t.sentence_similarity(&orig, &swapped);
        // brute-force arithmetic on raw vectors
        let mut sum_a = vec![0.0; d];
        let mut sum_b = vec![0.0; d];
        for w in orig.surfaces() {
            for (s, c) in sum_a.iter_mut().zip(t.vector(w).unwrap()) {
                *s += c;
            }
        }
        for w in swapped.surfaces() {
            for (s, c) in sum_b.iter_mut().zip(t.vector(w).unwrap()) {
                *s += c;
            }
        }
        let expect = cosine_similarity(&sum_a, &sum_b).unwrap();
        assert!((sim - expect).abs() < 1e-9);
        assert!(sim > 0.95, "sim = {sim}");
    }
}
