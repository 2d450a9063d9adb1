//! The JSON result document.
//!
//! The compact form carries only entity and attribute surfaces:
//!
//! ```json
//! {"result":{"id":"1","text":"...","relation":[{"entity":"ages","attribute":"21-45"}]}}
//! ```
//!
//! The extended form adds an `extended` object after `relation` with every
//! mention (record-level character offsets), the relation indices, labels and
//! scores, and the attributes left unlinked. Evaluation needs it.

use serde::{Deserialize, Serialize};

use crate::attributes::AttributeMention;
use crate::entities::EntityMention;
use crate::pipeline::AnnotatedRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationPair {
    pub entity: String,
    pub attribute: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendedRelation {
    /// Index into `Extended::entities`.
    pub entity: usize,
    /// Index into `Extended::attributes`.
    pub attribute: usize,
    pub label: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Extended {
    pub entities: Vec<EntityMention>,
    pub attributes: Vec<AttributeMention>,
    pub relations: Vec<ExtendedRelation>,
    /// Score of each relation, in relation order.
    pub scores: Vec<f64>,
    pub unlinked_attributes: Vec<AttributeMention>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuredRecord {
    pub id: String,
    pub text: String,
    #[serde(rename = "relation")]
    pub relations: Vec<RelationPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extended: Option<Extended>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    result: StructuredRecord,
}

#[derive(Serialize)]
struct DocumentRef<'a> {
    result: &'a StructuredRecord,
}

impl StructuredRecord {
    /// Builds the record, shifting mention offsets from sentence-relative to
    /// record-relative.
    pub fn from_annotated(record: &AnnotatedRecord) -> Self {
        let offset = |sentence: usize| record.sentences[sentence].char_offset;
        let entities: Vec<EntityMention> = record
            .entities
            .iter()
            .map(|e| {
                let d = offset(e.sentence_index);
                EntityMention {
                    start: e.start + d,
                    end: e.end + d,
                    ..e.clone()
                }
            })
            .collect();
        let attributes: Vec<AttributeMention> = record
            .attributes
            .iter()
            .map(|a| {
                let d = offset(a.sentence_index);
                AttributeMention {
                    start: a.start + d,
                    end: a.end + d,
                    anchor_span: a.anchor_span.map(|(x, y)| (x + d, y + d)),
                    ..a.clone()
                }
            })
            .collect();
        let relations = &record.linking.relations;
        StructuredRecord {
            id: record.id.clone(),
            text: record.text.clone(),
            relations: relations
                .iter()
                .map(|r| RelationPair {
                    entity: r.entity.surface.clone(),
                    attribute: r.attribute.surface.clone(),
                })
                .collect(),
            extended: Some(Extended {
                relations: relations
                    .iter()
                    .map(|r| ExtendedRelation {
                        entity: r.entity_index,
                        attribute: r.attribute_index,
                        label: r.label.clone(),
                        score: r.score,
                    })
                    .collect(),
                scores: relations.iter().map(|r| r.score).collect(),
                unlinked_attributes: record
                    .linking
                    .unlinked
                    .iter()
                    .map(|&i| attributes[i].clone())
                    .collect(),
                entities,
                attributes,
            }),
        }
    }

    pub fn without_extended(mut self) -> Self {
        self.extended = None;
        self
    }
}

/// Serializes one record as a single-line document. The extended block is
/// written only when `extended` is set and the record carries one.
pub fn to_json(record: &StructuredRecord, extended: bool) -> String {
    if extended || record.extended.is_none() {
        serde_json::to_string(&DocumentRef { result: record })
    } else {
        serde_json::to_string(&DocumentRef {
            result: &record.clone().without_extended(),
        })
    }
    .expect("records serialize")
}

/// Pretty-printed variant of [`to_json`].
pub fn to_json_pretty(record: &StructuredRecord, extended: bool) -> String {
    let compact = to_json(record, extended);
    let value: serde_json::Value = serde_json::from_str(&compact).expect("own output parses");
    serde_json::to_string_pretty(&value).expect("values serialize")
}

pub fn from_json(text: &str) -> Result<StructuredRecord, serde_json::Error> {
    serde_json::from_str::<Document>(text).map(|d| d.result)
}

/// Reads every document from a stream of JSON values (JSON Lines or
/// concatenated pretty documents).
pub fn read_documents(text: &str) -> Result<Vec<StructuredRecord>, serde_json::Error> {
    serde_json::Deserializer::from_str(text)
        .into_iter::<Document>()
        .map(|d| d.map(|d| d.result))
        .collect()
}
