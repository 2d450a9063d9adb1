//! Reading input records and gold corpora from disk.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::brat::{read_brat, BratError, GoldAnnotation};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("MalformedJsonl at line {line}: {message}")]
    MalformedJsonl { line: usize, message: String },
    #[error("{path}: {source}")]
    Brat { path: String, source: BratError },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// A directory of `.txt` files, one record each.
    TxtDir,
    /// One `{"id": ..., "text": ...}` object per line.
    Jsonl,
    /// A single text file holding one record.
    Text,
}

impl InputFormat {
    pub fn detect(path: &Path) -> InputFormat {
        if path.is_dir() {
            InputFormat::TxtDir
        } else if path.extension().is_some_and(|e| e == "jsonl") {
            InputFormat::Jsonl
        } else {
            InputFormat::Text
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputRecord {
    pub id: String,
    pub text: String,
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Files in `dir` with the given extension, sorted by name.
fn files_with_extension(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, CorpusError> {
    let io = |source| CorpusError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == ext) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

#[derive(Deserialize)]
struct JsonlRecord {
    id: String,
    text: String,
}

pub fn parse_jsonl(text: &str) -> Result<Vec<InputRecord>, CorpusError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: JsonlRecord =
            serde_json::from_str(line).map_err(|e| CorpusError::MalformedJsonl {
                line: n + 1,
                message: e.to_string(),
            })?;
        out.push(InputRecord {
            id: r.id,
            text: r.text,
        });
    }
    Ok(out)
}

pub fn read_corpus(path: &Path, format: InputFormat) -> Result<Vec<InputRecord>, CorpusError> {
    match format {
        InputFormat::TxtDir => files_with_extension(path, "txt")?
            .iter()
            .map(|f| {
                Ok(InputRecord {
                    id: stem(f),
                    text: read(f)?,
                })
            })
            .collect(),
        InputFormat::Jsonl => parse_jsonl(&read(path)?),
        InputFormat::Text => Ok(vec![InputRecord {
            id: stem(path),
            text: read(path)?,
        }]),
    }
}

/// A gold record: text plus its parsed annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldRecord {
    pub id: String,
    pub text: String,
    pub annotation: GoldAnnotation,
}

/// Reads every `<id>.txt` / `<id>.ann` pair in a directory. A text file with
/// no `.ann` sibling counts as a record with no annotations.
pub fn read_gold_dir(dir: &Path) -> Result<Vec<GoldRecord>, CorpusError> {
    let mut out = Vec::new();
    for txt_path in files_with_extension(dir, "txt")? {
        let text = read(&txt_path)?;
        let ann_path = txt_path.with_extension("ann");
        let ann = if ann_path.exists() {
            read(&ann_path)?
        } else {
            String::new()
        };
        let annotation = read_brat(&text, &ann).map_err(|source| CorpusError::Brat {
            path: ann_path.display().to_string(),
            source,
        })?;
        out.push(GoldRecord {
            id: stem(&txt_path),
            text,
            annotation,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn txt_directory() {
        let dir = tempfile::tempdir().unwrap();
        assert!(read_corpus(dir.path(), InputFormat::TxtDir)
            .unwrap()
            .is_empty());
        fs::write(
            dir.path().join("NCT01640873.txt"),
            "Body Mass Index ≤ 40 kg/m^2",
        )
        .unwrap();
        fs::write(dir.path().join("notes.md"), "ignored").unwrap();
        let records = read_corpus(dir.path(), InputFormat::TxtDir).unwrap();
        assert_eq!(
            records,
            [InputRecord {
                id: "NCT01640873".into(),
                text: "Body Mass Index ≤ 40 kg/m^2".into()
            }]
        );
    }

    #[test]
    fn jsonl() {
        let ok = parse_jsonl("{\"id\":\"a\",\"text\":\"x\"}\n\n{\"id\":\"b\",\"text\":\"y\"}\n")
            .unwrap();
        assert_eq!(ok.len(), 2);
        match parse_jsonl("{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\"}\n") {
            Err(CorpusError::MalformedJsonl { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detection() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(InputFormat::detect(dir.path()), InputFormat::TxtDir);
        assert_eq!(
            InputFormat::detect(Path::new("a.jsonl")),
            InputFormat::Jsonl
        );
        assert_eq!(InputFormat::detect(Path::new("a.txt")), InputFormat::Text);
    }

    #[test]
    fn bundled_gold() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus");
        let gold = read_gold_dir(&dir).unwrap();
        assert_eq!(gold.len(), 20);
        let relations: usize = gold.iter().map(|g| g.annotation.relations.len()).sum();
        assert_eq!(relations, 31);
    }
}
