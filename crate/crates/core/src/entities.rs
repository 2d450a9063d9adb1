//! Dictionary-based recognition of medical entity mentions.

use serde::{Deserialize, Serialize};

use crate::kb::{fold_case, Category, KbEntry, KnowledgeBase};
use crate::segmentation::{SentenceRecord, TokenShape};

/// Longest n-gram, in tokens, tried against the knowledge base.
pub const MAX_NGRAM: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub sentence_index: usize,
    /// Character offsets into the sentence text.
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub concept_id: String,
    /// The KB term, synonym or record-local abbreviation that fired.
    pub matched_term: String,
}

impl EntityMention {
    pub fn overlaps(&self, other: &EntityMention) -> bool {
        self.sentence_index == other.sentence_index
            && self.start < other.end
            && other.start < self.end
    }
}

struct Match<'k> {
    first: usize,
    len: usize,
    entry: &'k KbEntry,
    term: String,
}

/// Greedy longest-match scan over token n-grams.
///
/// Overlapping matches are resolved in favour of the longer one, then the
/// leftmost. A trailing `s` on the last token is folded when the exact phrase
/// is unknown, so `antidepressants` finds `antidepressant`.
pub fn recognize_entities(sentence: &SentenceRecord, kb: &KnowledgeBase) -> Vec<EntityMention> {
    let tokens = &sentence.tokens;
    let has_number = tokens.iter().any(|t| t.is_numeric());
    let mut matches = Vec::new();

    for first in 0..tokens.len() {
        for len in 1..=MAX_NGRAM.min(tokens.len() - first) {
            let window = &tokens[first..first + len];
            if window
                .iter()
                .any(|t| matches!(t.shape, TokenShape::Punct | TokenShape::Symbol))
            {
                break;
            }
            let phrase = sentence.slice(window[0].start, window[len - 1].end);
            if let Some((entry, term)) = resolve(kb, phrase, has_number) {
                matches.push(Match {
                    first,
                    len,
                    entry,
                    term,
                });
            }
        }
    }

    matches.sort_by(|a, b| b.len.cmp(&a.len).then(a.first.cmp(&b.first)));
    let mut taken = vec![false; tokens.len()];
    let mut chosen = Vec::new();
    for m in matches {
        let span = m.first..m.first + m.len;
        if span.clone().any(|i| taken[i]) {
            continue;
        }
        span.for_each(|i| taken[i] = true);
        chosen.push(m);
    }
    chosen.sort_by_key(|m| m.first);

    chosen
        .into_iter()
        .map(|m| {
            let start = tokens[m.first].start;
            let end = tokens[m.first + m.len - 1].end;
            EntityMention {
                sentence_index: sentence.sentence_index,
                start,
                end,
                surface: sentence.slice(start, end).to_string(),
                concept_id: m.entry.concept_id.clone(),
                matched_term: m.term,
            }
        })
        .collect()
}

fn resolve<'k>(
    kb: &'k KnowledgeBase,
    phrase: &str,
    has_number: bool,
) -> Option<(&'k KbEntry, String)> {
    let mut key = phrase.to_string();
    let mut hits = kb.lookup(&key);
    if hits.is_empty() && phrase.chars().count() > 3 && phrase.ends_with('s') {
        key.pop();
        hits = kb.lookup(&key);
    }
    let entry = pick_entry(hits, has_number)?;
    let folded = fold_case(&key);
    let term = entry
        .terms()
        .find(|t| fold_case(t) == folded)
        .unwrap_or(&entry.preferred_term)
        .to_string();
    Some((entry, term))
}

/// Resolves an ambiguous lookup: prefer a measurement concept when the
/// sentence carries numbers, otherwise the smallest concept id.
fn pick_entry(mut hits: Vec<&KbEntry>, has_number: bool) -> Option<&KbEntry> {
    hits.sort_by(|a, b| a.concept_id.cmp(&b.concept_id));
    if has_number {
        if let Some(m) = hits.iter().find(|e| e.category == Category::Measurement) {
            return Some(m);
        }
    }
    hits.first().copied()
}

/// Links parenthesized short forms to the mention they follow, e.g.
/// `electrocardiograph (ECG)`, and recognizes later uses of the short form
/// anywhere in the same record.
///
/// `mentions` holds one list per sentence, in sentence order.
pub fn link_abbreviations(
    sentences: &[SentenceRecord],
    mut mentions: Vec<Vec<EntityMention>>,
) -> Vec<Vec<EntityMention>> {
    // (short form, concept id, sentence, token after the definition)
    let mut defs: Vec<(String, String, usize, usize)> = Vec::new();

    for (si, sentence) in sentences.iter().enumerate() {
        let tokens = &sentence.tokens;
        let current = &mentions[si];
        for m in current {
            let range = sentence.token_range(m.start, m.end);
            let k = range.end;
            if k + 2 >= tokens.len() {
                continue;
            }
            if tokens[k].surface != "(" || tokens[k + 2].surface != ")" {
                continue;
            }
            let short = &tokens[k + 1];
            if !matches!(short.shape, TokenShape::Word | TokenShape::UnitLike)
                || !short.surface.chars().any(char::is_uppercase)
            {
                continue;
            }
            if is_abbreviation_of(&short.surface, &m.surface)
                && !defs.iter().any(|d| d.0 == short.surface)
            {
                defs.push((short.surface.clone(), m.concept_id.clone(), si, k + 1));
            }
        }

        let mut added = Vec::new();
        for (short, concept, def_sentence, def_token) in &defs {
            for (ti, tok) in tokens.iter().enumerate() {
                if si == *def_sentence && ti < *def_token {
                    continue;
                }
                let plural = format!("{short}s");
                if tok.surface != *short && tok.surface != plural {
                    continue;
                }
                let covered = mentions[si]
                    .iter()
                    .chain(added.iter())
                    .any(|m: &EntityMention| m.start < tok.end && tok.start < m.end);
                if !covered {
                    added.push(EntityMention {
                        sentence_index: sentence.sentence_index,
                        start: tok.start,
                        end: tok.end,
                        surface: tok.surface.clone(),
                        concept_id: concept.clone(),
                        matched_term: short.clone(),
                    });
                }
            }
        }
        mentions[si].extend(added);
        mentions[si].sort_by_key(|m| m.start);
    }
    mentions
}

/// Schwartz-Hearst style check: every letter of the short form appears in
/// order in the long form, and the first one starts a word.
pub fn is_abbreviation_of(short: &str, long: &str) -> bool {
    let mut sf: Vec<char> = short.chars().collect();
    // plural short forms: SSRIs
    if sf.len() > 2 && sf[sf.len() - 1] == 's' && sf[sf.len() - 2].is_uppercase() {
        sf.pop();
    }
    if sf.len() < 2 || sf.len() > 10 {
        return false;
    }
    let lf: Vec<char> = long.chars().collect();
    if lf.len() <= sf.len() {
        return false;
    }
    let lower = |c: char| c.to_lowercase().next().unwrap_or(c);
    let mut s = sf.len() as isize - 1;
    let mut l = lf.len() as isize - 1;
    while s >= 0 {
        let c = lower(sf[s as usize]);
        if !c.is_alphanumeric() {
            s -= 1;
            continue;
        }
        while l >= 0
            && (lower(lf[l as usize]) != c
                || (s == 0 && l > 0 && lf[l as usize - 1].is_alphanumeric()))
        {
            l -= 1;
        }
        if l < 0 {
            return false;
        }
        l -= 1;
        s -= 1;
    }
    true
}
