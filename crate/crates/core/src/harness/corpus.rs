use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::text::{tokenize, LabeledExample};

/// A train/dev/test dataset with a declared class count.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub name: String,
    pub class_count: usize,
    pub train: Vec<LabeledExample>,
    pub dev: Vec<LabeledExample>,
    pub test: Vec<LabeledExample>,
}

impl Corpus {
    pub fn split(&self, name: &str) -> Option<&[LabeledExample]> {
        match name {
            "train" => Some(&self.train),
            "dev" => Some(&self.dev),
            "test" => Some(&self.test),
            _ => None,
        }
    }
}

#[derive(Deserialize)]
struct RawExample {
    text: String,
    label: i64,
}

fn load_split(path: &Path) -> Result<Vec<LabeledExample>> {
    let file = path.display().to_string();
    if !path.exists() {
        return Err(Error::MissingSplit(file));
    }
    let content = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawExample =
            serde_json::from_str(line).map_err(|e| Error::CorpusParse {
                file: file.clone(),
                line: lineno,
                message: e.to_string(),
            })?;
        if raw.label < 0 {
            return Err(Error::CorpusParse {
                file: file.clone(),
                line: lineno,
                message: format!("negative label {}", raw.label),
            });
        }
        out.push(LabeledExample::new(tokenize(&raw.text), raw.label as usize));
    }
    Ok(out)
}

/// Load `train.jsonl` / `dev.jsonl` / `test.jsonl` from a directory. The
/// class count is the maximum label + 1; a warning is returned for every
/// label value in that range with no examples.
pub fn load_corpus(dir: &Path) -> Result<(Corpus, Vec<String>)> {
    let train = load_split(&dir.join("train.jsonl"))?;
    let dev = load_split(&dir.join("dev.jsonl"))?;
    let test = load_split(&dir.join("test.jsonl"))?;
    let class_count = train
        .iter()
        .chain(&dev)
        .chain(&test)
        .map(|e| e.label + 1)
        .max()
        .unwrap_or(0);
    let mut seen = vec![false; class_count];
    for e in train.iter().chain(&dev).chain(&test) {
        seen[e.label] = true;
    }
    let warnings: Vec<String> = seen
        .iter()
        .enumerate()
        .filter(|(_, s)| !**s)
        .map(|(c, _)| format!("class {c} has no examples in any split"))
        .collect();
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".to_string());
    Ok((
        Corpus {
            name,
            class_count,
            train,
            dev,
            test,
        },
        warnings,
    ))
}

/// Write one split as JSONL with `text` and `label` fields.
pub fn write_split(path: &Path, examples: &[LabeledExample]) -> Result<()> {
    let mut out = fs::File::create(path)?;
    for ex in examples {
        let line = serde_json::json!({
            "text": ex.document.detokenize(),
            "label": ex.label,
        });
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn write(dir: &Path, name: &str, content: &str) {
        fs::write(dir.join(name), content).unwrap();
    }

    #[test]
    fn load_valid_corpus() {
        let dir = tempdir().unwrap();
        write(dir.path(), "train.jsonl", "{\"text\": \"a b\", \"label\": 0}\n{\"text\": \"c\", \"label\": 1}\n");
        write(dir.path(), "dev.jsonl", "{\"text\": \"d\", \"label\": 0}\n");
        write(dir.path(), "test.jsonl", "{\"text\": \"e\", \"label\": 1}\n");
        let (corpus, warnings) = load_corpus(dir.path()).unwrap();
        assert_eq!(corpus.class_count, 2);
        assert_eq!(corpus.train.len(), 2);
        assert_eq!(corpus.dev.len(), 1);
        assert_eq!(corpus.test.len(), 1);
        assert!(warnings.is_empty());
        assert_eq!(corpus.train[0].document.detokenize(), "a b");
    }

    #[test]
    fn missing_label_names_file_and_line() {
        let dir = tempdir().unwrap();
        write(dir.path(), "train.jsonl", "{\"text\": \"a\", \"label\": 0}\n{\"text\": \"b\"}\n");
        write(dir.path(), "dev.jsonl", "");
        write(dir.path(), "test.jsonl", "");
        match load_corpus(dir.path()).unwrap_err() {
            Error::CorpusParse { file, line, .. } => {
                assert!(file.contains("train.jsonl"));
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_split_file() {
        let dir = tempdir().unwrap();
        write(dir.path(), "train.jsonl", "");
        assert!(matches!(
            load_corpus(dir.path()),
            Err(Error::MissingSplit(_))
        ));
    }

    #[test]
    fn negative_label_rejected() {
        let dir = tempdir().unwrap();
        write(dir.path(), "train.jsonl", "{\"text\": \"a\", \"label\": -1}\n");
        write(dir.path(), "dev.jsonl", "");
        write(dir.path(), "test.jsonl", "");
        assert!(matches!(
            load_corpus(dir.path()),
            Err(Error::CorpusParse { line: 1, .. })
        ));
    }

    #[test]
    fn sparse_labels_warn_for_empty_class() {
        let dir = tempdir().unwrap();
        write(
            dir.path(),
            "train.jsonl",
            "{\"text\": \"a\", \"label\": 0}\n{\"text\": \"b\", \"label\": 1}\n{\"text\": \"c\", \"label\": 3}\n",
        );
        write(dir.path(), "dev.jsonl", "");
        write(dir.path(), "test.jsonl", "");
        let (corpus, warnings) = load_corpus(dir.path()).unwrap();
        assert_eq!(corpus.class_count, 4);
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("class 2"));
    }

    #[test]
    fn round_trip_split() {
        let dir = tempdir().unwrap();
        let examples = vec![
            LabeledExample::new(tokenize("the court held ."), 0),
            LabeledExample::new(tokenize("appeal dismissed"), 1),
        ];
        write_split(&dir.path().join("train.jsonl"), &examples).unwrap();
        write_split(&dir.path().join("dev.jsonl"), &[]).unwrap();
        write_split(&dir.path().join("test.jsonl"), &[]).unwrap();
        let (corpus, _) = load_corpus(dir.path()).unwrap();
        assert_eq!(corpus.train, examples);
    }
}
