//! Syntactic proximity between entity and attribute mentions.
//!
//! Distances come either from an external dependency parse (tree path
//! length between span heads) or from a clause-proximity heuristic over
//! tokens. Either way, `p_dep` turns the distances of all entities competing
//! for one attribute into a softmin distribution.

use std::collections::VecDeque;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attributes::AttributeMention;
use crate::entities::EntityMention;
use crate::segmentation::{SentenceRecord, TokenShape};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("ParseMismatch at token {index}: parse has {found:?}, sentence has {expected:?}")]
    ParseMismatch {
        index: usize,
        expected: String,
        found: String,
    },
    #[error("CycleDetected: head graph is not a tree (token {0})")]
    CycleDetected(usize),
    #[error("malformed parse at line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("parse file has {found} sentences, input has {expected}")]
    SentenceCount { expected: usize, found: usize },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SignalSource {
    ExternalParse,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntacticSignal {
    pub distance: f64,
    pub source: SignalSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntaxConfig {
    /// Softmin temperature.
    pub tau: f64,
    /// Cost of crossing one clause boundary in the heuristic.
    pub boundary_penalty: f64,
}

impl Default for SyntaxConfig {
    fn default() -> Self {
        SyntaxConfig {
            tau: 2.0,
            boundary_penalty: 5.0,
        }
    }
}

impl SyntaxConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(format!("tau must be positive, got {}", self.tau));
        }
        if !(self.boundary_penalty.is_finite() && self.boundary_penalty >= 0.0) {
            return Err(format!(
                "boundary_penalty must be non-negative, got {}",
                self.boundary_penalty
            ));
        }
        Ok(())
    }
}

/// One row of a parse file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRow {
    pub form: String,
    pub head: usize,
    pub deprel: String,
}

/// A validated dependency tree over the tokens of one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DependencyParse {
    /// 0 is the root, otherwise the 1-based index of the head token.
    pub heads: Vec<usize>,
    pub labels: Vec<String>,
}

impl DependencyParse {
    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    /// Checks `rows` against the sentence tokens and that the heads form a tree.
    pub fn align(rows: &[ParseRow], sentence: &SentenceRecord) -> Result<Self, ParseError> {
        let n = rows.len().max(sentence.tokens.len());
        for i in 0..n {
            let found = rows.get(i).map(|r| r.form.as_str()).unwrap_or("");
            let expected = sentence
                .tokens
                .get(i)
                .map(|t| t.surface.as_str())
                .unwrap_or("");
            if found != expected {
                return Err(ParseError::ParseMismatch {
                    index: i + 1,
                    expected: expected.to_string(),
                    found: found.to_string(),
                });
            }
        }
        let parse = DependencyParse {
            heads: rows.iter().map(|r| r.head).collect(),
            labels: rows.iter().map(|r| r.deprel.clone()).collect(),
        };
        parse.check_tree()?;
        Ok(parse)
    }

    fn check_tree(&self) -> Result<(), ParseError> {
        let n = self.heads.len();
        if n == 0 {
            return Ok(());
        }
        let mut roots = 0;
        for (i, &h) in self.heads.iter().enumerate() {
            if h > n {
                return Err(ParseError::Malformed {
                    line: i + 1,
                    message: format!("head {h} out of range"),
                });
            }
            if h == 0 {
                roots += 1;
            }
        }
        // every token must reach the root without revisiting a node
        for start in 1..=n {
            let mut node = start;
            for _ in 0..=n {
                if node == 0 {
                    break;
                }
                node = self.heads[node - 1];
            }
            if node != 0 {
                return Err(ParseError::CycleDetected(start));
            }
        }
        if roots != 1 {
            return Err(ParseError::Malformed {
                line: 0,
                message: format!("expected one root, found {roots}"),
            });
        }
        Ok(())
    }

    /// Number of edges from a 0-based token to the root.
    pub fn depth(&self, token: usize) -> usize {
        let mut d = 0;
        let mut node = self.heads[token];
        while node != 0 {
            d += 1;
            node = self.heads[node - 1];
        }
        d
    }

    /// Undirected tree path length between two 0-based tokens.
    pub fn path_length(&self, from: usize, to: usize) -> usize {
        let n = self.heads.len();
        let mut adjacent = vec![Vec::new(); n];
        for (i, &h) in self.heads.iter().enumerate() {
            if h != 0 {
                adjacent[i].push(h - 1);
                adjacent[h - 1].push(i);
            }
        }
        let mut dist = vec![usize::MAX; n];
        dist[from] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            if u == to {
                break;
            }
            for &v in &adjacent[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist[to]
    }
}

/// Splits a parse file into sentence blocks.
///
/// Rows have either four tab-separated columns (ID, FORM, HEAD, DEPREL) or the
/// ten columns of CoNLL-U. Comment lines, multiword ranges (`1-2`) and empty
/// nodes (`1.1`) are skipped; a blank line ends a sentence.
pub fn read_parse_blocks(text: &str) -> Result<Vec<Vec<ParseRow>>, ParseError> {
    let mut blocks = Vec::new();
    let mut current: Vec<ParseRow> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let malformed = |message: String| ParseError::Malformed {
            line: line_no,
            message,
        };
        if line.trim().is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let (form, head, deprel) = match cols.len() {
            4 => (cols[1], cols[2], cols[3]),
            10 => (cols[1], cols[6], cols[7]),
            n => return Err(malformed(format!("expected 4 or 10 columns, found {n}"))),
        };
        if cols[0].contains(['-', '.']) {
            continue;
        }
        let id: usize = cols[0]
            .parse()
            .map_err(|_| malformed(format!("bad token id {:?}", cols[0])))?;
        if id != current.len() + 1 {
            return Err(malformed(format!("token id {id} out of sequence")));
        }
        let head: usize = head
            .parse()
            .map_err(|_| malformed(format!("bad head {head:?}")))?;
        current.push(ParseRow {
            form: form.to_string(),
            head,
            deprel: deprel.to_string(),
        });
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    Ok(blocks)
}

/// Reads a single-sentence parse file and aligns it to `sentence`.
pub fn ingest_parse(
    path: impl AsRef<Path>,
    sentence: &SentenceRecord,
) -> Result<DependencyParse, ParseError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let blocks = read_parse_blocks(&text)?;
    match blocks.as_slice() {
        [] => DependencyParse::align(&[], sentence),
        [rows] => DependencyParse::align(rows, sentence),
        _ => Err(ParseError::SentenceCount {
            expected: 1,
            found: blocks.len(),
        }),
    }
}

/// Aligns parse blocks to sentences in order.
pub fn align_parses(
    blocks: &[Vec<ParseRow>],
    sentences: &[&SentenceRecord],
) -> Result<Vec<DependencyParse>, ParseError> {
    if blocks.len() != sentences.len() {
        return Err(ParseError::SentenceCount {
            expected: sentences.len(),
            found: blocks.len(),
        });
    }
    blocks
        .iter()
        .zip(sentences)
        .map(|(rows, s)| DependencyParse::align(rows, s))
        .collect()
}

fn head_token(sentence: &SentenceRecord, start: usize, end: usize) -> usize {
    let r = sentence.token_range(start, end);
    r.end.max(1) - 1
}

/// Shortest tree path between the last tokens of the two spans.
pub fn path_distance(
    parse: &DependencyParse,
    sentence: &SentenceRecord,
    e: &EntityMention,
    a: &AttributeMention,
) -> SyntacticSignal {
    let from = head_token(sentence, e.start, e.end);
    let to = head_token(sentence, a.start, a.end);
    SyntacticSignal {
        distance: parse.path_length(from, to) as f64,
        source: SignalSource::ExternalParse,
    }
}

const BOUNDARY_WORDS: &[&str] = &["and", "or", "but", "who", "which", "that", "whom", "whose"];

fn is_clause_boundary(sentence: &SentenceRecord, i: usize) -> bool {
    let t = &sentence.tokens[i];
    match t.shape {
        TokenShape::Punct => t.surface == "," || t.surface == ";",
        TokenShape::Word => BOUNDARY_WORDS.contains(&t.surface.to_lowercase().as_str()),
        _ => false,
    }
}

/// (gap tokens, clause boundaries) strictly between two token ranges.
fn gap(sentence: &SentenceRecord, left_end: usize, right_start: usize) -> (usize, usize) {
    if right_start <= left_end {
        return (0, 0);
    }
    let boundaries = (left_end..right_start)
        .filter(|&i| is_clause_boundary(sentence, i))
        .count();
    (right_start - left_end, boundaries)
}

/// Token gap plus a penalty per clause boundary crossed.
pub fn heuristic_distance(
    sentence: &SentenceRecord,
    e: &EntityMention,
    a: &AttributeMention,
    config: &SyntaxConfig,
) -> SyntacticSignal {
    let er = sentence.token_range(e.start, e.end);
    let ar = sentence.token_range(a.start, a.end);
    let (tokens, boundaries) = if er.start <= ar.start {
        gap(sentence, er.end, ar.start)
    } else {
        gap(sentence, ar.end, er.start)
    };
    SyntacticSignal {
        distance: tokens as f64 + config.boundary_penalty * boundaries as f64,
        source: SignalSource::Heuristic,
    }
}

/// Distance between mentions in different sentences of one record.
///
/// The heuristic counts the tokens in between plus one penalty per sentence
/// break; with parses, both heads are joined through a virtual document root.
pub fn cross_sentence_distance(
    sentences: &[SentenceRecord],
    parses: Option<&[DependencyParse]>,
    e: &EntityMention,
    a: &AttributeMention,
    config: &SyntaxConfig,
) -> SyntacticSignal {
    let (es, as_) = (e.sentence_index, a.sentence_index);
    if let Some(parses) = parses {
        let eh = head_token(&sentences[es], e.start, e.end);
        let ah = head_token(&sentences[as_], a.start, a.end);
        let d = parses[es].depth(eh) + parses[as_].depth(ah) + 2;
        return SyntacticSignal {
            distance: d as f64,
            source: SignalSource::ExternalParse,
        };
    }
    let er = sentences[es].token_range(e.start, e.end);
    let ar = sentences[as_].token_range(a.start, a.end);
    let ((ls, lr), (rs, rr)) = if es < as_ {
        ((es, er), (as_, ar))
    } else {
        ((as_, ar), (es, er))
    };
    let left = &sentences[ls];
    let right = &sentences[rs];
    let (t1, b1) = gap(left, lr.end, left.tokens.len());
    let (t2, b2) = gap(right, 0, rr.start);
    let (mut tokens, mut boundaries) = (t1 + t2, b1 + b2);
    for s in &sentences[ls + 1..rs] {
        let (t, b) = gap(s, 0, s.tokens.len());
        tokens += t;
        boundaries += b;
    }
    boundaries += rs - ls;
    SyntacticSignal {
        distance: tokens as f64 + config.boundary_penalty * boundaries as f64,
        source: SignalSource::Heuristic,
    }
}

/// Softmin over the distances of the entities competing for one attribute.
pub fn p_dep(signals: &[SyntacticSignal], tau: f64) -> Vec<f64> {
    let distances: Vec<f64> = signals.iter().map(|s| s.distance).collect();
    softmin(&distances, tau)
}

pub fn softmin(distances: &[f64], tau: f64) -> Vec<f64> {
    let Some(min) = distances.iter().copied().reduce(f64::min) else {
        return Vec::new();
    };
    let weights: Vec<f64> = distances.iter().map(|d| (-(d - min) / tau).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}
