//! End-to-end annotation of one record.

use serde::{Deserialize, Serialize};

use crate::attributes::{extract_attributes_with, AttributeMention};
use crate::entities::{link_abbreviations, recognize_entities, EntityMention};
use crate::kb::{CompatibilityWeights, KnowledgeBase};
use crate::linker::{link, LinkError, LinkerConfig, Linking};
use crate::segmentation::{split_records, SentenceRecord, SplitMode};
use crate::syntax::{DependencyParse, SyntaxConfig};

/// Every tunable of the pipeline. Printed by `critex config --show-defaults`
/// and accepted back through `--config`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: SplitMode,
    pub linker: LinkerConfig,
    pub syntax: SyntaxConfig,
    pub weights: CompatibilityWeights,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: SplitMode::Paragraphs,
            linker: LinkerConfig::default(),
            syntax: SyntaxConfig::default(),
            weights: CompatibilityWeights::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.linker.validate().map_err(|e| e.to_string())?;
        self.syntax.validate()?;
        self.weights.validate().map_err(|e| e.to_string())?;
        Ok(())
    }
}

/// A record after segmentation, recognition and linking. Mention offsets are
/// relative to their sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedRecord {
    pub id: String,
    pub text: String,
    pub sentences: Vec<SentenceRecord>,
    pub entities: Vec<EntityMention>,
    pub attributes: Vec<AttributeMention>,
    pub linking: Linking,
}

/// Splits a record into sentences under `config.mode`.
pub fn segment(id: &str, text: &str, config: &PipelineConfig) -> Vec<SentenceRecord> {
    split_records(id, text, config.mode)
}

/// Annotates one record. `parses`, when given, holds one aligned parse per
/// sentence of the record.
pub fn annotate(
    id: &str,
    text: &str,
    kb: &KnowledgeBase,
    config: &PipelineConfig,
    parses: Option<&[DependencyParse]>,
) -> Result<AnnotatedRecord, LinkError> {
    let sentences = segment(id, text, config);
    let per_sentence: Vec<Vec<EntityMention>> = sentences
        .iter()
        .map(|s| recognize_entities(s, kb))
        .collect();
    let per_sentence = link_abbreviations(&sentences, per_sentence);
    let mut attributes = Vec::new();
    for (s, ents) in sentences.iter().zip(&per_sentence) {
        attributes.extend(extract_attributes_with(s, kb, ents));
    }
    let entities: Vec<EntityMention> = per_sentence.into_iter().flatten().collect();
    let linking = link(
        &sentences,
        parses,
        &entities,
        &attributes,
        kb,
        &config.weights,
        &config.syntax,
        &config.linker,
    )?;
    Ok(AnnotatedRecord {
        id: id.to_string(),
        text: text.to_string(),
        sentences,
        entities,
        attributes,
        linking,
    })
}
