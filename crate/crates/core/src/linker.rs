//! Relation candidates, the θ-mixture, and per-attribute assignment.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attributes::{AttributeKind, AttributeMention};
use crate::entities::EntityMention;
use crate::kb::{score_compatibility, CompatibilityWeights, KnowledgeBase};
use crate::segmentation::SentenceRecord;
use crate::syntax::{
    cross_sentence_distance, heuristic_distance, path_distance, softmin, DependencyParse,
    SyntacticSignal, SyntaxConfig,
};

#[derive(Debug, Error, PartialEq)]
pub enum LinkError {
    #[error("UnknownConcept: {0} is not in the knowledge base")]
    UnknownConcept(String),
    #[error("invalid linker config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkerConfig {
    pub theta: f64,
    pub min_score: f64,
    pub same_sentence_only: bool,
}

impl Default for LinkerConfig {
    fn default() -> Self {
        LinkerConfig {
            theta: 0.5,
            min_score: 0.2,
            same_sentence_only: true,
        }
    }
}

impl LinkerConfig {
    pub fn validate(&self) -> Result<(), LinkError> {
        for (name, v) in [("theta", self.theta), ("min_score", self.min_score)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(LinkError::InvalidConfig(format!(
                    "{name} must be in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// One entity/attribute pair with its two signals and the mixed score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationCandidate {
    pub entity_index: usize,
    pub attribute_index: usize,
    pub entity: EntityMention,
    pub attribute: AttributeMention,
    pub distance: f64,
    /// Characters between the two mentions, for tie-breaking.
    pub char_gap: usize,
    pub compatibility: f64,
    pub p_dep: f64,
    pub p_sup: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub entity_index: usize,
    pub attribute_index: usize,
    pub entity: EntityMention,
    pub attribute: AttributeMention,
    pub label: String,
    pub score: f64,
}

pub fn relation_label(kind: AttributeKind) -> &'static str {
    match kind {
        AttributeKind::Comparison | AttributeKind::Range | AttributeKind::Ratio => "has_value",
        AttributeKind::Temporal | AttributeKind::Frequency => "has_temporal",
        AttributeKind::Qualifier => "has_qualifier",
    }
}

fn excluded(e: &EntityMention, a: &AttributeMention) -> bool {
    e.sentence_index == a.sentence_index
        && ((a.start < e.end && e.start < a.end) || a.anchors(e.start, e.end))
}

/// Pairs every attribute with every entity, attribute-major. Signals are
/// left at zero.
pub fn generate_candidates(
    entities: &[EntityMention],
    attributes: &[AttributeMention],
    config: &LinkerConfig,
) -> Vec<RelationCandidate> {
    let mut out = Vec::new();
    for (ai, a) in attributes.iter().enumerate() {
        for (ei, e) in entities.iter().enumerate() {
            if config.same_sentence_only && e.sentence_index != a.sentence_index {
                continue;
            }
            if excluded(e, a) {
                continue;
            }
            out.push(RelationCandidate {
                entity_index: ei,
                attribute_index: ai,
                entity: e.clone(),
                attribute: a.clone(),
                distance: 0.0,
                char_gap: 0,
                compatibility: 0.0,
                p_dep: 0.0,
                p_sup: 0.0,
                score: 0.0,
            });
        }
    }
    out
}

/// Normalizes raw compatibilities over the entities competing for one
/// attribute; uniform when they are all zero.
pub fn p_sup(compatibilities: &[f64]) -> Vec<f64> {
    let total: f64 = compatibilities.iter().sum();
    if total > 0.0 {
        compatibilities.iter().map(|c| c / total).collect()
    } else {
        let n = compatibilities.len() as f64;
        compatibilities.iter().map(|_| 1.0 / n).collect()
    }
}

pub fn mix(p_sup: f64, p_dep: f64, theta: f64) -> f64 {
    theta * p_sup + (1.0 - theta) * p_dep
}

/// Fills in compatibility, distance, both probabilities and the score.
///
/// Candidates must be grouped by attribute, as `generate_candidates` emits
/// them. `parses`, when given, holds one parse per sentence.
pub fn score_candidates(
    candidates: &mut [RelationCandidate],
    sentences: &[SentenceRecord],
    parses: Option<&[DependencyParse]>,
    kb: &KnowledgeBase,
    weights: &CompatibilityWeights,
    syntax: &SyntaxConfig,
    config: &LinkerConfig,
) -> Result<(), LinkError> {
    for c in candidates.iter_mut() {
        let entry = kb
            .get(&c.entity.concept_id)
            .ok_or_else(|| LinkError::UnknownConcept(c.entity.concept_id.clone()))?;
        c.compatibility = score_compatibility(entry, &c.attribute, weights).score;
        let signal = signal(sentences, parses, &c.entity, &c.attribute, syntax);
        c.distance = signal.distance;
        c.char_gap = char_gap(sentences, &c.entity, &c.attribute);
    }
    for group in candidates.chunk_by_mut(|x, y| x.attribute_index == y.attribute_index) {
        let dep = softmin(
            &group.iter().map(|c| c.distance).collect::<Vec<_>>(),
            syntax.tau,
        );
        let sup = p_sup(&group.iter().map(|c| c.compatibility).collect::<Vec<_>>());
        for ((c, d), s) in group.iter_mut().zip(dep).zip(sup) {
            c.p_dep = d;
            c.p_sup = s;
            c.score = mix(s, d, config.theta);
        }
    }
    Ok(())
}

fn signal(
    sentences: &[SentenceRecord],
    parses: Option<&[DependencyParse]>,
    e: &EntityMention,
    a: &AttributeMention,
    syntax: &SyntaxConfig,
) -> SyntacticSignal {
    if e.sentence_index != a.sentence_index {
        return cross_sentence_distance(sentences, parses, e, a, syntax);
    }
    let sentence = &sentences[e.sentence_index];
    match parses {
        Some(p) => path_distance(&p[e.sentence_index], sentence, e, a),
        None => heuristic_distance(sentence, e, a, syntax),
    }
}

fn char_gap(sentences: &[SentenceRecord], e: &EntityMention, a: &AttributeMention) -> usize {
    let offset = |i: usize| sentences.get(i).map_or(0, |s| s.char_offset);
    let (es, ee) = (
        offset(e.sentence_index) + e.start,
        offset(e.sentence_index) + e.end,
    );
    let (as_, ae) = (
        offset(a.sentence_index) + a.start,
        offset(a.sentence_index) + a.end,
    );
    if ee <= as_ {
        as_ - ee
    } else {
        es.saturating_sub(ae)
    }
}

/// Orders candidates for one attribute, best first.
pub fn preference(x: &RelationCandidate, y: &RelationCandidate) -> Ordering {
    y.score
        .total_cmp(&x.score)
        .then(x.distance.total_cmp(&y.distance))
        .then(x.char_gap.cmp(&y.char_gap))
        .then(
            (x.entity.sentence_index, x.entity.start)
                .cmp(&(y.entity.sentence_index, y.entity.start)),
        )
}

/// Picks the best entity for each attribute, keeping it only if its score
/// reaches `min_score`. Relations come out in attribute order.
pub fn assign(candidates: &[RelationCandidate], config: &LinkerConfig) -> Vec<Relation> {
    let mut order: Vec<usize> = candidates.iter().map(|c| c.attribute_index).collect();
    order.sort_unstable();
    order.dedup();
    let mut out = Vec::new();
    for ai in order {
        let best = candidates
            .iter()
            .filter(|c| c.attribute_index == ai)
            .min_by(|x, y| preference(x, y))
            .expect("attribute has a candidate");
        if best.score >= config.min_score {
            out.push(Relation {
                entity_index: best.entity_index,
                attribute_index: best.attribute_index,
                entity: best.entity.clone(),
                attribute: best.attribute.clone(),
                label: relation_label(best.attribute.kind).to_string(),
                score: best.score,
            });
        }
    }
    out
}

/// Everything the linker decided for one record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Linking {
    pub candidates: Vec<RelationCandidate>,
    pub relations: Vec<Relation>,
    /// Indices of attributes with no relation.
    pub unlinked: Vec<usize>,
}

#[allow(clippy::too_many_arguments)]
pub fn link(
    sentences: &[SentenceRecord],
    parses: Option<&[DependencyParse]>,
    entities: &[EntityMention],
    attributes: &[AttributeMention],
    kb: &KnowledgeBase,
    weights: &CompatibilityWeights,
    syntax: &SyntaxConfig,
    config: &LinkerConfig,
) -> Result<Linking, LinkError> {
    let mut candidates = generate_candidates(entities, attributes, config);
    score_candidates(
        &mut candidates,
        sentences,
        parses,
        kb,
        weights,
        syntax,
        config,
    )?;
    let relations = assign(&candidates, config);
    let unlinked = (0..attributes.len())
        .filter(|i| !relations.iter().any(|r| r.attribute_index == *i))
        .collect();
    Ok(Linking {
        candidates,
        relations,
        unlinked,
    })
}
