//! Attribute expressions: numeric comparisons, ranges, ratios, temporal
//! expressions, frequencies and qualifiers.
//!
//! The grammar works over tokens, scanning left to right and keeping the
//! longest parse at each position:
//!
//! ```text
//! attribute  := comparison | range | ratio | temporal | frequency | qualifier
//! comparison := [comparator] number [unit]
//! range      := number "-" number [unit] | "between" number "and" number [unit]
//! ratio      := [comparator] number "/" number [unit]
//! temporal   := ("within" | comparator) number time_unit [anchor]
//! frequency  := [comparator] (number | "once" | "twice" | number "times")
//!               ("a" | "per") time_unit [anchor]
//! ```
//!
//! Verbal comparators ("less than") on value expressions are kept in the
//! payload but left out of the span, so `less than 140/90 mmHg` yields the
//! span `140/90 mmHg`; glyphs (`≤ 40 kg/m^2`) stay in the span. Temporal and
//! frequency spans include their lead words.

use serde::{Deserialize, Serialize};

use crate::entities::{recognize_entities, EntityMention};
use crate::kb::KnowledgeBase;
use crate::segmentation::{SentenceRecord, Token, TokenShape};
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AttributeKind {
    Comparison,
    Range,
    Ratio,
    Temporal,
    Frequency,
    Qualifier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Comparator {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "≤",
            Comparator::Gt => ">",
            Comparator::Ge => "≥",
            Comparator::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TimeUnit {
    Hour,
    Day,
    Week,
    Month,
    Year,
}

impl TimeUnit {
    fn from_canonical(unit: &str) -> Option<TimeUnit> {
        Some(match unit {
            "hour" => TimeUnit::Hour,
            "day" => TimeUnit::Day,
            "week" => TimeUnit::Week,
            "month" => TimeUnit::Month,
            "year" => TimeUnit::Year,
            _ => return None,
        })
    }
}

/// Numeric shape of an attribute, as compared against a KB value pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AttributeShape {
    Scalar,
    Ratio,
    Range,
    NonNumeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeMention {
    pub sentence_index: usize,
    /// Character offsets into the sentence text.
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub kind: AttributeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparator: Option<Comparator>,
    #[serde(default)]
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_unit: Option<TimeUnit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<String>,
    /// Character offsets of the anchor phrase, which may extend past `end`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor_span: Option<(usize, usize)>,
}

impl AttributeMention {
    pub fn shape(&self) -> AttributeShape {
        attribute_shape(self)
    }

    /// Whether a character span lies inside this attribute's anchor phrase.
    pub fn anchors(&self, start: usize, end: usize) -> bool {
        self.anchor_span
            .is_some_and(|(a, b)| a <= start && end <= b && start < end)
    }
}

pub fn attribute_shape(attr: &AttributeMention) -> AttributeShape {
    match attr.kind {
        AttributeKind::Comparison => AttributeShape::Scalar,
        AttributeKind::Ratio => AttributeShape::Ratio,
        AttributeKind::Range => AttributeShape::Range,
        AttributeKind::Temporal | AttributeKind::Frequency | AttributeKind::Qualifier => {
            AttributeShape::NonNumeric
        }
    }
}

/// Extracts attributes, recognizing entities first so qualifiers and anchors
/// can see them.
pub fn extract_attributes(sentence: &SentenceRecord, kb: &KnowledgeBase) -> Vec<AttributeMention> {
    let entities = recognize_entities(sentence, kb);
    extract_attributes_with(sentence, kb, &entities)
}

/// Extracts attributes given the entity mentions already found in the sentence.
pub fn extract_attributes_with(
    sentence: &SentenceRecord,
    kb: &KnowledgeBase,
    entities: &[EntityMention],
) -> Vec<AttributeMention> {
    let parser = Parser::new(sentence, kb, entities);
    let mut out = Vec::new();
    let mut i = 0;
    while i < sentence.tokens.len() {
        match parser.best_at(i) {
            Some(p) => {
                out.push(parser.mention(&p));
                i = p.consumed;
            }
            None => i += 1,
        }
    }
    out
}

const QUALIFIER_LEXICON: &[&str] = &["concomitant", "stable", "normal", "resting"];
const ANCHOR_TRIM: &[&str] = &[
    "to", "of", "the", "their", "his", "her", "its", "a", "an", "for", "in", "during", "over",
    "with",
];
const BOUNDARY_WORDS: &[&str] = &[
    "and",
    "or",
    "but",
    "who",
    "which",
    "that",
    "whom",
    "whose",
    "where",
    "whichever",
    "while",
];

fn number_word(w: &str) -> Option<f64> {
    const WORDS: [&str; 21] = [
        "zero",
        "one",
        "two",
        "three",
        "four",
        "five",
        "six",
        "seven",
        "eight",
        "nine",
        "ten",
        "eleven",
        "twelve",
        "thirteen",
        "fourteen",
        "fifteen",
        "sixteen",
        "seventeen",
        "eighteen",
        "nineteen",
        "twenty",
    ];
    WORDS.iter().position(|x| *x == w).map(|n| n as f64)
}

fn parse_number(s: &str) -> Option<f64> {
    s.replace(',', "")
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
}

fn split_pair(s: &str, seps: &[char]) -> Option<(f64, f64)> {
    let (a, b) = s.split_once(seps)?;
    Some((parse_number(a)?, parse_number(b)?))
}

#[derive(Debug, Clone)]
struct Parse {
    kind: AttributeKind,
    first: usize,
    /// Exclusive token end of the emitted span.
    span_end: usize,
    /// Exclusive token end of everything consumed, anchor included.
    consumed: usize,
    comparator: Option<Comparator>,
    values: Vec<f64>,
    unit: Option<String>,
    time_unit: Option<TimeUnit>,
    anchor: Option<(usize, usize)>,
    lead_anchor: Option<(usize, usize)>,
}

impl Parse {
    fn new(kind: AttributeKind, first: usize, end: usize) -> Self {
        Parse {
            kind,
            first,
            span_end: end,
            consumed: end,
            comparator: None,
            values: Vec::new(),
            unit: None,
            time_unit: None,
            anchor: None,
            lead_anchor: None,
        }
    }
}

struct Parser<'a> {
    sentence: &'a SentenceRecord,
    kb: &'a KnowledgeBase,
    lower: Vec<String>,
    in_entity: Vec<bool>,
    entity_first: Vec<bool>,
    entity_last: Vec<bool>,
}

impl<'a> Parser<'a> {
    fn new(
        sentence: &'a SentenceRecord,
        kb: &'a KnowledgeBase,
        entities: &[EntityMention],
    ) -> Self {
        let n = sentence.tokens.len();
        let mut in_entity = vec![false; n];
        let mut entity_first = vec![false; n];
        let mut entity_last = vec![false; n];
        for e in entities
            .iter()
            .filter(|e| e.sentence_index == sentence.sentence_index)
        {
            let r = sentence.token_range(e.start, e.end);
            if r.is_empty() {
                continue;
            }
            entity_first[r.start] = true;
            entity_last[r.end - 1] = true;
            r.for_each(|i| in_entity[i] = true);
        }
        Parser {
            sentence,
            kb,
            lower: sentence
                .tokens
                .iter()
                .map(|t| t.surface.to_lowercase())
                .collect(),
            in_entity,
            entity_first,
            entity_last,
        }
    }

    fn tok(&self, i: usize) -> Option<&Token> {
        self.sentence.tokens.get(i)
    }

    fn word(&self, i: usize) -> Option<&str> {
        self.lower.get(i).map(String::as_str)
    }

    fn is(&self, i: usize, w: &str) -> bool {
        self.word(i) == Some(w)
    }

    fn is_any(&self, i: usize, ws: &[&str]) -> bool {
        self.word(i).is_some_and(|x| ws.contains(&x))
    }

    fn best_at(&self, i: usize) -> Option<Parse> {
        if self.in_entity[i] {
            return None;
        }
        let candidates = [
            self.comparison(i),
            self.range(i),
            self.ratio(i),
            self.temporal(i),
            self.frequency(i),
            self.qualifier(i),
        ];
        let mut best: Option<Parse> = None;
        for p in candidates.into_iter().flatten() {
            if best.as_ref().is_none_or(|b| p.consumed > b.consumed) {
                best = Some(p);
            }
        }
        best
    }

    /// Comparator phrase at `i`: (comparator, next token, is a glyph).
    fn comparator(&self, i: usize) -> Option<(Comparator, usize, bool)> {
        let tok = self.tok(i)?;
        if tok.shape == TokenShape::Symbol {
            let c = match tok.normalized() {
                "≤" => Comparator::Le,
                "≥" => Comparator::Ge,
                "<" => Comparator::Lt,
                ">" => Comparator::Gt,
                "=" => Comparator::Eq,
                _ => return None,
            };
            return Some((c, i + 1, true));
        }
        const PHRASES: &[(&[&str], Comparator)] = &[
            (&["no", "more", "than"], Comparator::Le),
            (&["no", "less", "than"], Comparator::Ge),
            (&["less", "than"], Comparator::Lt),
            (&["fewer", "than"], Comparator::Lt),
            (&["greater", "than"], Comparator::Gt),
            (&["more", "than"], Comparator::Gt),
            (&["at", "least"], Comparator::Ge),
            (&["at", "most"], Comparator::Le),
            (&["under"], Comparator::Lt),
            (&["over"], Comparator::Gt),
        ];
        PHRASES.iter().find_map(|(words, c)| {
            words
                .iter()
                .enumerate()
                .all(|(k, w)| self.is(i + k, w))
                .then_some((*c, i + words.len(), false))
        })
    }

    fn number(&self, i: usize, allow_words: bool) -> Option<(f64, usize)> {
        let tok = self.tok(i)?;
        if tok.shape == TokenShape::Number {
            return parse_number(&tok.surface).map(|v| (v, i + 1));
        }
        if allow_words {
            return number_word(self.word(i)?).map(|v| (v, i + 1));
        }
        None
    }

    /// Longest unit (up to three tokens) starting at `i`.
    fn unit(&self, i: usize, allow_time: bool) -> Option<(String, usize)> {
        let tokens = &self.sentence.tokens;
        for len in (1..=3).rev() {
            if i + len > tokens.len() {
                continue;
            }
            let window = &tokens[i..i + len];
            if window.iter().any(|t| t.is_numeric()) || self.in_entity[i] {
                continue;
            }
            let mut joined = String::new();
            for (k, t) in window.iter().enumerate() {
                if k > 0 && t.start > window[k - 1].end {
                    joined.push(' ');
                }
                joined.push_str(&t.surface);
            }
            if let Some(canonical) = self.kb.normalize_unit(&joined) {
                if allow_time || !units::is_time_unit(&canonical) {
                    return Some((canonical, i + len));
                }
            }
        }
        None
    }

    fn time_unit(&self, i: usize) -> Option<(TimeUnit, usize)> {
        let canonical = self.kb.normalize_unit(&self.tok(i)?.surface)?;
        TimeUnit::from_canonical(&canonical).map(|u| (u, i + 1))
    }

    fn comparison(&self, i: usize) -> Option<Parse> {
        let (cmp, j, glyph) = match self.comparator(i) {
            Some(c) => c,
            None => {
                let (v, k) = self.number(i, false)?;
                let (unit, end) = self.unit(k, false)?;
                let mut p = Parse::new(AttributeKind::Comparison, i, end);
                p.comparator = Some(Comparator::Eq);
                p.values = vec![v];
                p.unit = Some(unit);
                return Some(p);
            }
        };
        let (v, k) = self.number(j, true)?;
        let (unit, end) = match self.unit(k, false) {
            Some((u, e)) => (Some(u), e),
            None => (None, k),
        };
        let mut p = Parse::new(AttributeKind::Comparison, if glyph { i } else { j }, end);
        p.comparator = Some(cmp);
        p.values = vec![v];
        p.unit = unit;
        Some(p)
    }

    fn ratio(&self, i: usize) -> Option<Parse> {
        let (cmp, j, glyph) = match self.comparator(i) {
            Some((c, j, g)) => (Some(c), j, g),
            None => (None, i, true),
        };
        let tok = self.tok(j).filter(|t| t.shape == TokenShape::Ratio)?;
        let (num, den) = split_pair(&tok.surface, &['/'])?;
        if num <= 0.0 || den <= 0.0 {
            return None;
        }
        let (unit, end) = match self.unit(j + 1, true) {
            Some((u, e)) => (Some(u), e),
            None => (None, j + 1),
        };
        let mut p = Parse::new(AttributeKind::Ratio, if glyph { i } else { j }, end);
        p.comparator = cmp;
        p.values = vec![num, den];
        p.unit = unit;
        Some(p)
    }

    fn range(&self, i: usize) -> Option<Parse> {
        let (lo, hi, k) = if self.tok(i)?.shape == TokenShape::Range {
            let (lo, hi) = split_pair(&self.tok(i)?.surface, &['-', '–', '‐'])?;
            (lo, hi, i + 1)
        } else if self.is(i, "between") {
            let (lo, j) = self.number(i + 1, true)?;
            if !self.is(j, "and") {
                return None;
            }
            let (hi, k) = self.number(j + 1, true)?;
            (lo, hi, k)
        } else {
            return None;
        };
        if lo > hi {
            return None;
        }
        let (unit, end) = match self.unit(k, true) {
            Some((u, e)) => (Some(u), e),
            None => (None, k),
        };
        let mut p = Parse::new(AttributeKind::Range, i, end);
        p.values = vec![lo, hi];
        p.unit = unit;
        Some(p)
    }

    /// `the past`, `in the last`, `past` ...: returns the token after it.
    fn past_lead(&self, i: usize) -> Option<usize> {
        let mut j = i;
        if self.is_any(j, &["in", "during", "over", "for"]) && self.is(j + 1, "the") {
            j += 1;
        }
        if self.is(j, "the") {
            j += 1;
        }
        self.is_any(j, &["past", "last", "previous"])
            .then_some(j + 1)
    }

    fn temporal(&self, i: usize) -> Option<Parse> {
        let mut lead_anchor = None;
        let (cmp, j) = if self.is(i, "within") {
            let j = match self.past_lead(i + 1) {
                Some(j) if self.is(i + 1, "the") || self.is_any(i + 1, &["past", "last"]) => j,
                _ => i + 1,
            };
            (Some(Comparator::Le), j)
        } else if let Some((c, j, _)) = self.comparator(i) {
            (Some(c), j)
        } else if let Some(j) = self.past_lead(i) {
            lead_anchor = Some((i, j));
            (None, j)
        } else {
            (None, i)
        };
        let (v, k) = self.number(j, true)?;
        let (time_unit, end) = self.time_unit(k)?;
        let mut p = Parse::new(AttributeKind::Temporal, i, end);
        p.comparator = cmp;
        p.values = vec![v];
        p.time_unit = Some(time_unit);
        p.lead_anchor = lead_anchor;
        self.attach_anchor(&mut p, false);
        Some(p)
    }

    fn frequency(&self, i: usize) -> Option<Parse> {
        let (cmp, j) = match self.comparator(i) {
            Some((c, j, _)) => (Some(c), j),
            None => (None, i),
        };
        let (count, mut k, times) = match self.word(j)? {
            "once" => (1.0, j + 1, true),
            "twice" => (2.0, j + 1, true),
            "thrice" => (3.0, j + 1, true),
            _ => {
                let (v, k) = self.number(j, true)?;
                if self.is(k, "times") {
                    (v, k + 1, true)
                } else {
                    (v, k, false)
                }
            }
        };
        let mut p = Parse::new(AttributeKind::Frequency, i, k);
        p.comparator = cmp;
        p.values = vec![count];
        if self.is_any(k, &["a", "an", "per"]) {
            let (unit, end) = self.time_unit(k + 1)?;
            p.time_unit = Some(unit);
            k = end;
        } else if let Some(unit) = self.word(k).and_then(|w| match w {
            "daily" => Some(TimeUnit::Day),
            "weekly" => Some(TimeUnit::Week),
            "monthly" => Some(TimeUnit::Month),
            "yearly" | "annually" => Some(TimeUnit::Year),
            _ => None,
        }) {
            p.time_unit = Some(unit);
            k += 1;
        } else if times && self.is(k, "of") {
            p.span_end = k;
            p.consumed = k;
            self.attach_anchor(&mut p, true);
            return p.anchor.is_some().then_some(p);
        } else {
            return None;
        }
        p.span_end = k;
        p.consumed = k;
        self.attach_anchor(&mut p, false);
        Some(p)
    }

    fn qualifier(&self, i: usize) -> Option<Parse> {
        let tok = self.tok(i)?;
        let word = self.word(i)?;
        let compound = tok.shape == TokenShape::Word && {
            let (num, rest) = word.split_once('-').unwrap_or(("", ""));
            !num.is_empty()
                && parse_number(num).is_some()
                && !rest.is_empty()
                && rest.chars().all(|c| c.is_alphabetic() || c == '-')
        };
        let adjacent = QUALIFIER_LEXICON.contains(&word)
            && ((i + 1 < self.in_entity.len() && self.entity_first[i + 1])
                || (i > 0 && self.entity_last[i - 1]));
        (compound || adjacent).then(|| Parse::new(AttributeKind::Qualifier, i, i + 1))
    }

    fn is_boundary(&self, i: usize) -> bool {
        match self.tok(i) {
            None => true,
            Some(t) => {
                matches!(t.shape, TokenShape::Punct | TokenShape::Symbol)
                    || self.is_any(i, BOUNDARY_WORDS)
            }
        }
    }

    /// Anchor phrase starting at `k`, as a token range.
    fn anchor_at(&self, k: usize, allow_of: bool) -> Option<(usize, usize)> {
        // for the past six months
        if let Some(j) = self.past_lead(k) {
            let j = self.number(j, true).map_or(j, |(_, j)| j);
            if let Some((_, end)) = self.time_unit(j) {
                return Some((k, end));
            }
        }
        let body = if self.is(k, "prior") && self.is(k + 1, "to") {
            k + 2
        } else if self.is_any(k, &["before", "after", "since", "following", "until"])
            || (allow_of && self.is(k, "of"))
        {
            k + 1
        } else {
            return None;
        };
        let mut end = body;
        while end < body + 8 && !self.is_boundary(end) {
            end += 1;
        }
        (end > body).then_some((k, end))
    }

    fn attach_anchor(&self, p: &mut Parse, allow_of: bool) {
        let Some((a, b)) = self.anchor_at(p.consumed, allow_of) else {
            return;
        };
        p.anchor = Some((a, b));
        p.consumed = b;
        // the span stops at the first entity inside the anchor
        let mut end = (a..b).find(|&t| self.in_entity[t]).unwrap_or(b);
        while end > a && self.is_any(end - 1, ANCHOR_TRIM) {
            end -= 1;
        }
        p.span_end = end;
    }

    fn mention(&self, p: &Parse) -> AttributeMention {
        let tokens = &self.sentence.tokens;
        let start = tokens[p.first].start;
        let end = tokens[p.span_end - 1].end;
        let anchor_tokens = p.anchor.or(p.lead_anchor);
        let anchor_span = anchor_tokens.map(|(a, b)| (tokens[a].start, tokens[b - 1].end));
        AttributeMention {
            sentence_index: self.sentence.sentence_index,
            start,
            end,
            surface: self.sentence.slice(start, end).to_string(),
            kind: p.kind,
            comparator: p.comparator,
            values: p.values.clone(),
            unit: p.unit.clone(),
            time_unit: p.time_unit,
            anchor: anchor_span.map(|(a, b)| self.sentence.slice(a, b).to_string()),
            anchor_span,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::bundled_kb;

    fn attrs(text: &str) -> Vec<AttributeMention> {
        let s = SentenceRecord::new("r", 0, text, 0);
        extract_attributes(&s, &bundled_kb())
    }

    fn one(text: &str) -> AttributeMention {
        let mut v = attrs(text);
        assert_eq!(v.len(), 1, "{text}: {v:?}");
        v.remove(0)
    }

    #[test]
    fn glyph_comparison_with_unit() {
        let a = one("Body Mass Index ≤ 40 kg/m^2");
        assert_eq!(a.kind, AttributeKind::Comparison);
        assert_eq!(a.comparator, Some(Comparator::Le));
        assert_eq!(a.values, [40.0]);
        assert_eq!(a.unit.as_deref(), Some("kg/m^2"));
        assert_eq!(a.surface, "≤ 40 kg/m^2");
    }

    #[test]
    fn range_token() {
        let a = one("ages 21-45");
        assert_eq!(a.kind, AttributeKind::Range);
        assert_eq!(a.values, [21.0, 45.0]);
        assert_eq!(a.unit, None);
        assert_eq!(a.surface, "21-45");
    }

    #[test]
    fn ratio_with_verbal_comparator() {
        let a = one("blood pressure of less than 140/90 mmHg");
        assert_eq!(a.kind, AttributeKind::Ratio);
        assert_eq!(a.comparator, Some(Comparator::Lt));
        assert_eq!(a.values, [140.0, 90.0]);
        assert_eq!(a.unit.as_deref(), Some("mmHg"));
        assert_eq!(a.surface, "140/90 mmHg");
    }

    #[test]
    fn within_days() {
        let a = one("analgesics taken within three days");
        assert_eq!(a.kind, AttributeKind::Temporal);
        assert_eq!(a.comparator, Some(Comparator::Le));
        assert_eq!(a.values, [3.0]);
        assert_eq!(a.time_unit, Some(TimeUnit::Day));
        assert_eq!(a.surface, "within three days");
    }

    #[test]
    fn temporal_with_anchor() {
        let a = one("on a stable dose for at least 30 days prior to screening");
        assert_eq!(a.kind, AttributeKind::Temporal);
        assert_eq!(a.comparator, Some(Comparator::Ge));
        assert_eq!(a.values, [30.0]);
        assert_eq!(a.time_unit, Some(TimeUnit::Day));
        assert_eq!(a.anchor.as_deref(), Some("prior to screening"));
        // span stops before the anchored entity
        assert_eq!(a.surface, "at least 30 days prior");
    }

    #[test]
    fn frequency_with_past_anchor() {
        let a = one("smoked cocaine use at least twice a week for the past six months");
        assert_eq!(a.kind, AttributeKind::Frequency);
        assert_eq!(a.comparator, Some(Comparator::Ge));
        assert_eq!(a.values, [2.0]);
        assert_eq!(a.time_unit, Some(TimeUnit::Week));
        assert_eq!(a.anchor.as_deref(), Some("for the past six months"));
        assert_eq!(a.surface, "at least twice a week for the past six months");
    }

    #[test]
    fn hyphenated_qualifier() {
        let a = one("A normal resting 12-lead electrocardiograph");
        assert_eq!(a.kind, AttributeKind::Qualifier);
        assert_eq!(a.surface, "12-lead");
        assert!(a.values.is_empty());
        assert_eq!(a.unit, None);
    }

    #[test]
    fn times_of_anchor() {
        let v = attrs("analgesics taken within three days or five times of their elimination half-lives, whichever is longer");
        assert_eq!(v.len(), 2);
        let a = &v[1];
        assert_eq!(a.kind, AttributeKind::Frequency);
        assert_eq!(a.values, [5.0]);
        assert_eq!(a.surface, "five times");
        assert_eq!(a.anchor.as_deref(), Some("of their elimination half-lives"));
    }

    #[test]
    fn lexicon_qualifier_needs_an_adjacent_entity() {
        let a = one("taking any concomitant medications");
        assert_eq!(a.kind, AttributeKind::Qualifier);
        assert_eq!(a.surface, "concomitant");
        assert!(attrs("a normal resting state").is_empty());
    }

    #[test]
    fn between_range_and_bare_unit_value() {
        let v = attrs("Body weight of at least 50 kg and BMI between 18.5 and 30 kg/m2");
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].surface, "50 kg");
        assert_eq!(v[0].comparator, Some(Comparator::Ge));
        assert_eq!(v[1].kind, AttributeKind::Range);
        assert_eq!(v[1].values, [18.5, 30.0]);
        assert_eq!(v[1].unit.as_deref(), Some("kg/m^2"));
        assert_eq!(v[1].surface, "between 18.5 and 30 kg/m2");
        let w = one("weight 70 kg");
        assert_eq!(w.comparator, Some(Comparator::Eq));
    }

    #[test]
    fn time_unit_after_comparator_is_temporal() {
        let a = one("Age ≥ 18 years");
        assert_eq!(a.kind, AttributeKind::Temporal);
        assert_eq!(a.comparator, Some(Comparator::Ge));
        assert_eq!(a.surface, "≥ 18 years");
    }

    #[test]
    fn multi_token_units_and_separators() {
        let a = one("Heart rate less than 50 beats per minute at rest");
        assert_eq!(a.unit.as_deref(), Some("bpm"));
        assert_eq!(a.surface, "50 beats per minute");
        let a = one("ANC < 1,500 cells/mm3");
        assert_eq!(a.values, [1500.0]);
        assert_eq!(a.unit.as_deref(), Some("cells/mm^3"));
    }

    #[test]
    fn past_lead_temporal() {
        let a = one("Received chemotherapy within the past 4 weeks");
        assert_eq!(a.surface, "within the past 4 weeks");
        assert_eq!(a.comparator, Some(Comparator::Le));
        let a = one("hospitalized in the last 2 years");
        assert_eq!(a.comparator, None);
        assert_eq!(a.anchor.as_deref(), Some("in the last"));
        assert_eq!(a.time_unit, Some(TimeUnit::Year));
    }

    #[test]
    fn unparseable_fragments_are_skipped() {
        assert!(attrs("the 45-21 score").is_empty());
        assert!(attrs("ratio 0/5 mmHg").is_empty());
        assert!(attrs("visit 3 of the study").is_empty());
        assert!(attrs("less than ideal").is_empty());
    }

    #[test]
    fn frequency_variants() {
        let a = one("use more than 3 times a week");
        assert_eq!(a.kind, AttributeKind::Frequency);
        assert_eq!(a.surface, "more than 3 times a week");
        let a = one("dosed twice daily");
        assert_eq!(a.time_unit, Some(TimeUnit::Day));
        assert_eq!(a.values, [2.0]);
    }

    #[test]
    fn shapes() {
        assert_eq!(one("≤ 40 kg").shape(), AttributeShape::Scalar);
        assert_eq!(one("140/90 mmHg").shape(), AttributeShape::Ratio);
        assert_eq!(one("21-45").shape(), AttributeShape::Range);
        assert_eq!(one("12-lead").shape(), AttributeShape::NonNumeric);
    }
}
