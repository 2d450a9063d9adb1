//! Brat standoff annotations.
//!
//! Only text-bound (`T`) and relation (`R`) lines are read; other line types
//! (notes, events, attributes) are ignored. Offsets are character offsets.

use thiserror::Error;

use crate::segmentation::char_slice;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BratError {
    #[error("SpanMismatch: {id} does not match the text at its offsets")]
    SpanMismatch { id: String },
    #[error("DanglingRef: {id} refers to an undeclared span")]
    DanglingRef { id: String },
    #[error("unknown label {label:?} on {id}")]
    UnknownLabel { id: String, label: String },
    #[error("malformed annotation at line {line}: {message}")]
    Malformed { line: usize, message: String },
}

pub const ENTITY_LABELS: &[&str] = &["Entity"];
pub const ATTRIBUTE_LABELS: &[&str] = &["Attribute", "Value", "Temporal", "Qualifier"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldSpan {
    pub id: String,
    pub label: String,
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldRelation {
    pub id: String,
    pub label: String,
    /// Index into `GoldAnnotation::entities`.
    pub entity: usize,
    /// Index into `GoldAnnotation::attributes`.
    pub attribute: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GoldAnnotation {
    pub entities: Vec<GoldSpan>,
    pub attributes: Vec<GoldSpan>,
    pub relations: Vec<GoldRelation>,
}

#[derive(Clone, Copy)]
enum Side {
    Entity(usize),
    Attribute(usize),
}

/// Parses an `.ann` file, checking every span against `txt`.
pub fn read_brat(txt: &str, ann: &str) -> Result<GoldAnnotation, BratError> {
    let mut gold = GoldAnnotation::default();
    let mut ids: Vec<(String, Side)> = Vec::new();
    let mut pending = Vec::new();
    for (n, line) in ann.lines().enumerate() {
        let line_no = n + 1;
        let malformed = |message: &str| BratError::Malformed {
            line: line_no,
            message: message.to_string(),
        };
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.splitn(3, '\t');
        let id = cols.next().unwrap_or_default();
        let body = cols.next().ok_or_else(|| malformed("missing tab"))?;
        if id.starts_with('T') {
            let surface = cols.next().ok_or_else(|| malformed("missing surface"))?;
            if body.contains(';') {
                return Err(malformed("discontinuous spans are not supported"));
            }
            let parts: Vec<&str> = body.split(' ').collect();
            let [label, start, end] = parts[..] else {
                return Err(malformed("expected `<Label> <start> <end>`"));
            };
            let start: usize = start.parse().map_err(|_| malformed("bad start offset"))?;
            let end: usize = end.parse().map_err(|_| malformed("bad end offset"))?;
            if start > end || char_slice(txt, start, end) != surface {
                return Err(BratError::SpanMismatch { id: id.to_string() });
            }
            let span = GoldSpan {
                id: id.to_string(),
                label: label.to_string(),
                start,
                end,
                surface: surface.to_string(),
            };
            let side = if ENTITY_LABELS.contains(&label) {
                gold.entities.push(span);
                Side::Entity(gold.entities.len() - 1)
            } else if ATTRIBUTE_LABELS.contains(&label) {
                gold.attributes.push(span);
                Side::Attribute(gold.attributes.len() - 1)
            } else {
                return Err(BratError::UnknownLabel {
                    id: id.to_string(),
                    label: label.to_string(),
                });
            };
            ids.push((id.to_string(), side));
        } else if id.starts_with('R') {
            let parts: Vec<&str> = body.split(' ').collect();
            let [label, a1, a2] = parts[..] else {
                return Err(malformed("expected `<Label> Arg1:<T> Arg2:<T>`"));
            };
            let arg = |s: &str, key: &str| {
                s.strip_prefix(key)
                    .map(str::to_string)
                    .ok_or_else(|| malformed("bad relation argument"))
            };
            pending.push((
                id.to_string(),
                label.to_string(),
                arg(a1, "Arg1:")?,
                arg(a2, "Arg2:")?,
                line_no,
            ));
        }
    }
    for (id, label, a1, a2, line) in pending {
        let find = |t: &str| ids.iter().find(|(x, _)| x == t).map(|(_, s)| *s);
        let (Some(x), Some(y)) = (find(&a1), find(&a2)) else {
            return Err(BratError::DanglingRef { id });
        };
        let (entity, attribute) = match (x, y) {
            (Side::Entity(e), Side::Attribute(a)) | (Side::Attribute(a), Side::Entity(e)) => (e, a),
            _ => {
                return Err(BratError::Malformed {
                    line,
                    message: "a relation joins one entity and one attribute".into(),
                })
            }
        };
        gold.relations.push(GoldRelation {
            id,
            label,
            entity,
            attribute,
        });
    }
    Ok(gold)
}
