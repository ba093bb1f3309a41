//! Word-level text primitives: tokenization, word edits, and overlapping
//! chunking for long documents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single word token with its position in the document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub position: usize,
}

/// An immutable tokenized text sample. Edit operations return new documents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    tokens: Vec<Token>,
    raw: String,
}

impl Document {
    fn from_surfaces<I: IntoIterator<Item = String>>(surfaces: I, raw: String) -> Self {
        let tokens = surfaces
            .into_iter()
            .enumerate()
            .map(|(position, surface)| Token { surface, position })
            .collect();
        Document { tokens, raw }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn surface(&self, i: usize) -> Option<&str> {
        self.tokens.get(i).map(|t| t.surface.as_str())
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.surface.as_str())
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// Whitespace-normalized text reconstructed from the token sequence.
    pub fn detokenize(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&t.surface);
        }
        out
    }

    /// New document with token `i` removed and positions re-indexed.
    pub fn delete_word(&self, i: usize) -> Result<Document> {
        if i >= self.tokens.len() {
            return Err(Error::InvalidIndex {
                index: i,
                len: self.tokens.len(),
            });
        }
        let surfaces = self
            .tokens
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, t)| t.surface.clone())
            .collect::<Vec<_>>();
        let raw = surfaces.join(" ");
        Ok(Document::from_surfaces(surfaces, raw))
    }

    /// New document with token `i`'s surface replaced.
    pub fn replace_word(&self, i: usize, replacement: &str) -> Result<Document> {
        if i >= self.tokens.len() {
            return Err(Error::InvalidIndex {
                index: i,
                len: self.tokens.len(),
            });
        }
        if replacement.is_empty() || replacement.chars().any(char::is_whitespace) {
            return Err(Error::InvalidReplacement(replacement.to_string()));
        }
        let surfaces = self
            .tokens
            .iter()
            .enumerate()
            .map(|(j, t)| {
                if j == i {
                    replacement.to_string()
                } else {
                    t.surface.clone()
                }
            })
            .collect::<Vec<_>>();
        let raw = surfaces.join(" ");
        Ok(Document::from_surfaces(surfaces, raw))
    }

    /// Sub-document covering token indices `[start, end)`.
    fn slice(&self, start: usize, end: usize) -> Document {
        let surfaces = self.tokens[start..end]
            .iter()
            .map(|t| t.surface.clone())
            .collect::<Vec<_>>();
        let raw = surfaces.join(" ");
        Document::from_surfaces(surfaces, raw)
    }
}

/// A document paired with its class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub document: Document,
    pub label: usize,
}

impl LabeledExample {
    pub fn new(document: Document, label: usize) -> Self {
        LabeledExample { document, label }
    }
}

/// Lowercasing whitespace tokenizer that detaches leading/trailing
/// punctuation into separate tokens. Interior punctuation is kept.
pub fn tokenize(text: &str) -> Document {
    let mut surfaces = Vec::new();
    for piece in text.split_whitespace() {
        let piece = piece.to_lowercase();
        let chars: Vec<char> = piece.chars().collect();
        let mut start = 0;
        let mut end = chars.len();
        let mut leading = Vec::new();
        let mut trailing = Vec::new();
        while start < end && chars[start].is_ascii_punctuation() {
            leading.push(chars[start].to_string());
            start += 1;
        }
        while end > start && chars[end - 1].is_ascii_punctuation() {
            trailing.push(chars[end - 1].to_string());
            end -= 1;
        }
        surfaces.extend(leading);
        if start < end {
            surfaces.push(chars[start..end].iter().collect());
        }
        trailing.reverse();
        surfaces.extend(trailing);
    }
    Document::from_surfaces(surfaces, text.to_string())
}

/// Offsets of overlapping chunks over a document of `n` tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkPlan {
    pub chunk_size: usize,
    pub overlap: usize,
    pub starts: Vec<usize>,
}

impl ChunkPlan {
    /// Chunks at stride `chunk_size - overlap`; the final chunk may be
    /// shorter. A document with `n <= chunk_size` yields one chunk.
    pub fn new(n: usize, chunk_size: usize, overlap: usize) -> Result<ChunkPlan> {
        if overlap == 0 || overlap >= chunk_size {
            return Err(Error::InvalidChunkParams {
                chunk_size,
                overlap,
            });
        }
        let stride = chunk_size - overlap;
        let mut starts = vec![0];
        while starts.last().unwrap() + chunk_size < n {
            starts.push(starts.last().unwrap() + stride);
        }
        Ok(ChunkPlan {
            chunk_size,
            overlap,
            starts,
        })
    }

    pub fn ranges(&self, n: usize) -> Vec<(usize, usize)> {
        self.starts
            .iter()
            .map(|&s| (s, (s + self.chunk_size).min(n)))
            .collect()
    }
}

/// Split a document into overlapping chunks per [`ChunkPlan`].
pub fn chunk_document(doc: &Document, chunk_size: usize, overlap: usize) -> Result<Vec<Document>> {
    let plan = ChunkPlan::new(doc.len(), chunk_size, overlap)?;
    Ok(plan
        .ranges(doc.len())
        .into_iter()
        .map(|(s, e)| doc.slice(s, e))
        .collect())
}
