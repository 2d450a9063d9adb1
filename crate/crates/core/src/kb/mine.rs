use std::collections::BTreeMap;

use super::{fold_case, local_concept_id, Category, KbEntry, KnowledgeBase, ValuePattern};
use crate::attributes::{extract_attributes_with, AttributeShape};
use crate::segmentation::{SentenceRecord, TokenShape};
use crate::units;

const MAX_NP: usize = 4;

/// Words allowed between a noun phrase and its value.
const CONNECTORS: &[&str] = &[
    "of", "is", "was", "be", "must", "should", "than", "less", "more", "greater", "fewer", "at",
    "least", "most", "no", "under", "over", "below", "above",
];

const STOP_WORDS: &[&str] = &[
    "a",
    "an",
    "the",
    "and",
    "or",
    "but",
    "with",
    "without",
    "of",
    "in",
    "on",
    "at",
    "for",
    "to",
    "by",
    "from",
    "who",
    "which",
    "that",
    "is",
    "are",
    "was",
    "were",
    "be",
    "has",
    "have",
    "had",
    "must",
    "should",
    "any",
    "all",
    "no",
    "not",
    "patients",
    "subjects",
    "participants",
];

/// Proposes KB entries from `<noun phrase> [of|comparator] <value> <unit>`
/// patterns. Candidates carry a `LOCAL:` id and no value range; repeated
/// phrases are merged.
pub fn mine_kb_candidates(sentences: &[SentenceRecord]) -> Vec<KbEntry> {
    let empty = KnowledgeBase::empty();
    let mut found: BTreeMap<String, KbEntry> = BTreeMap::new();
    for sentence in sentences {
        for attr in extract_attributes_with(sentence, &empty, &[]) {
            let (Some(unit), pattern) = (attr.unit.as_ref(), attr.shape()) else {
                continue;
            };
            if units::is_time_unit(unit) {
                continue;
            }
            let pattern = match pattern {
                AttributeShape::Scalar => ValuePattern::Scalar,
                AttributeShape::Ratio => ValuePattern::Ratio,
                AttributeShape::Range => ValuePattern::Range,
                AttributeShape::NonNumeric => continue,
            };
            let Some(phrase) = noun_phrase_before(sentence, attr.start) else {
                continue;
            };
            let entry = found.entry(fold_case(&phrase)).or_insert_with(|| {
                KbEntry::new(&local_concept_id(&phrase), &phrase, Category::Measurement)
                    .with_pattern(pattern)
            });
            if !entry.expected_units.contains(unit) {
                entry.expected_units.push(unit.clone());
                entry.expected_units.sort();
            }
            if entry.value_pattern != Some(pattern) {
                entry.value_pattern = Some(ValuePattern::Any);
            }
        }
    }
    let mut entries: Vec<KbEntry> = found.into_values().collect();
    let mut ids = std::collections::BTreeSet::new();
    for e in &mut entries {
        let base = e.concept_id.clone();
        let mut n = 1;
        while !ids.insert(e.concept_id.clone()) {
            n += 1;
            e.concept_id = format!("{base}-{n}");
        }
    }
    entries
}

fn noun_phrase_before(sentence: &SentenceRecord, char_start: usize) -> Option<String> {
    let tokens = &sentence.tokens;
    let mut i = tokens.iter().position(|t| t.start >= char_start)?;
    let lower = |k: usize| tokens[k].surface.to_lowercase();
    while i > 0 && CONNECTORS.contains(&lower(i - 1).as_str()) {
        i -= 1;
    }
    let end = i;
    while i > 0
        && end - i < MAX_NP
        && tokens[i - 1].shape == TokenShape::Word
        && !STOP_WORDS.contains(&lower(i - 1).as_str())
    {
        i -= 1;
    }
    (i < end).then(|| {
        sentence
            .slice(tokens[i].start, tokens[end - 1].end)
            .to_string()
    })
}
