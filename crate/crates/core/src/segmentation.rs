//! Sentence splitting and tokenization.
//!
//! Every offset produced here is a character (Unicode scalar) offset, which is
//! also what Brat standoff files use. Use [`char_slice`] to turn a span back
//! into a `&str`.

use serde::{Deserialize, Serialize};

use crate::units;

/// Coarse lexical class of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TokenShape {
    Word,
    Number,
    Ratio,
    Range,
    UnitLike,
    Punct,
    Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Inclusive start, in characters, relative to the sentence text.
    pub start: usize,
    /// Exclusive end, in characters.
    pub end: usize,
    pub shape: TokenShape,
}

impl Token {
    /// The surface with comparison glyph variants folded onto one form
    /// (`≦`, `<=`, `=<` all become `≤`). Other tokens are returned as is.
    pub fn normalized(&self) -> &str {
        match self.surface.as_str() {
            "≦" | "<=" | "=<" | "⩽" => "≤",
            "≧" | ">=" | "=>" | "⩾" => "≥",
            s => s,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(
            self.shape,
            TokenShape::Number | TokenShape::Ratio | TokenShape::Range
        )
    }
}

/// One sentence of a record, with its tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub record_id: String,
    pub sentence_index: usize,
    pub text: String,
    /// Character offset of `text` in the original record.
    pub char_offset: usize,
    pub tokens: Vec<Token>,
}

impl SentenceRecord {
    pub fn new(record_id: &str, sentence_index: usize, text: &str, char_offset: usize) -> Self {
        SentenceRecord {
            record_id: record_id.to_string(),
            sentence_index,
            text: text.to_string(),
            char_offset,
            tokens: tokenize(text),
        }
    }

    /// Slice of the sentence text between two character offsets.
    pub fn slice(&self, start: usize, end: usize) -> &str {
        char_slice(&self.text, start, end)
    }

    /// Indices of the tokens lying inside `[start, end)`.
    pub fn token_range(&self, start: usize, end: usize) -> std::ops::Range<usize> {
        let first = self
            .tokens
            .iter()
            .position(|t| t.end > start)
            .unwrap_or(self.tokens.len());
        let last = self
            .tokens
            .iter()
            .rposition(|t| t.start < end)
            .map(|i| i + 1)
            .unwrap_or(0);
        first..last.max(first)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    /// One sentence per non-empty line (eligibility criteria lists).
    Lines,
    /// Prose: split on terminal punctuation.
    Paragraphs,
}

/// Returns `text[start..end]` where both bounds are character offsets.
///
/// Out-of-range bounds are clamped to the end of the string.
pub fn char_slice(text: &str, start: usize, end: usize) -> &str {
    let byte_at = |n: usize| {
        text.char_indices()
            .nth(n)
            .map(|(b, _)| b)
            .unwrap_or(text.len())
    };
    let (b0, b1) = (byte_at(start), byte_at(end));
    &text[b0..b1.max(b0)]
}

const ABBREVIATIONS: &[&str] = &[
    "e.g", "i.e", "vs", "dr", "mr", "mrs", "ms", "etc", "fig", "approx", "no", "st", "et al", "al",
    "ca", "cf", "inc", "jr", "sr", "prof",
];

/// Splits one record into sentences.
pub fn split_records(record_id: &str, raw: &str, mode: SplitMode) -> Vec<SentenceRecord> {
    let chars: Vec<char> = raw.chars().collect();
    let spans = match mode {
        SplitMode::Lines => line_spans(&chars),
        SplitMode::Paragraphs => sentence_spans(&chars),
    };
    spans
        .into_iter()
        .filter_map(|(s, e)| trim_span(&chars, s, e))
        .enumerate()
        .map(|(i, (s, e))| {
            let text: String = chars[s..e].iter().collect();
            SentenceRecord::new(record_id, i, &text, s)
        })
        .collect()
}

fn trim_span(chars: &[char], mut s: usize, mut e: usize) -> Option<(usize, usize)> {
    while s < e && chars[s].is_whitespace() {
        s += 1;
    }
    while e > s && chars[e - 1].is_whitespace() {
        e -= 1;
    }
    (s < e).then_some((s, e))
}

fn line_spans(chars: &[char]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0;
    for (i, &c) in chars.iter().enumerate() {
        if c == '\n' {
            spans.push((start, i));
            start = i + 1;
        }
    }
    spans.push((start, chars.len()));
    spans
}

fn sentence_spans(chars: &[char]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0;
    let mut depth: i32 = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth = (depth - 1).max(0),
            '\n' => {
                // blank line is a hard break
                let mut j = i + 1;
                while j < chars.len() && chars[j] != '\n' && chars[j].is_whitespace() {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '\n' {
                    spans.push((start, i));
                    start = j + 1;
                    depth = 0;
                    i = j + 1;
                    continue;
                }
            }
            '.' | '?' | '!' => {
                let mut end = i + 1;
                // absorb closing quotes/brackets and repeated terminators
                while end < chars.len()
                    && matches!(chars[end], '.' | '?' | '!' | '"' | '\'' | '”' | '’')
                {
                    end += 1;
                }
                let mut j = end;
                while j < chars.len() && chars[j].is_whitespace() {
                    j += 1;
                }
                let followed = j > end
                    && j < chars.len()
                    && (chars[j].is_uppercase() || chars[j].is_ascii_digit());
                if followed && !(c == '.' && (depth > 0 || is_abbreviation(chars, start, i))) {
                    spans.push((start, end));
                    start = j;
                    i = j;
                    continue;
                }
            }
            _ => {}
        }
        i += 1;
    }
    spans.push((start, chars.len()));
    spans
}

/// Whether the period at `dot` ends an abbreviation rather than a sentence.
fn is_abbreviation(chars: &[char], floor: usize, dot: usize) -> bool {
    let mut k = dot;
    while k > floor && !chars[k - 1].is_whitespace() && chars[k - 1] != '(' {
        k -= 1;
    }
    let word: String = chars[k..dot].iter().collect();
    if word.chars().count() == 1 && word.chars().all(char::is_uppercase) {
        return true;
    }
    let lower = word.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}

fn is_comparison_glyph(c: char) -> bool {
    matches!(c, '≤' | '≥' | '<' | '>' | '=' | '≦' | '≧' | '⩽' | '⩾' | '≠')
}

fn is_symbol(c: char) -> bool {
    is_comparison_glyph(c) || matches!(c, '+' | '±' | '~' | '×' | '*' | '&' | '#' | '@' | '^')
}

fn is_dash(c: char) -> bool {
    matches!(c, '-' | '–' | '‐')
}

/// Splits a sentence into tokens.
///
/// Numbers joined by `/` form one RATIO token, numbers joined by a hyphen form
/// one RANGE token, and a number hyphenated with a word (`12-lead`) stays one
/// WORD token. Word runs may contain `/` and `^` so that compound units such as
/// `kg/m^2` or `mg/dL` survive as a single token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut tokens = Vec::new();
    let mut i = 0;
    let digit = |k: usize| k < n && chars[k].is_ascii_digit();

    while i < n {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let shape;
        if c.is_ascii_digit() {
            i = scan_number(&chars, i);
            if i + 1 < n && chars[i] == '/' && digit(i + 1) {
                i = scan_number(&chars, i + 1);
                shape = TokenShape::Ratio;
            } else if i + 1 < n && is_dash(chars[i]) && digit(i + 1) {
                i = scan_number(&chars, i + 1);
                shape = TokenShape::Range;
            } else if i + 1 < n && is_dash(chars[i]) && chars[i + 1].is_alphabetic() {
                i = scan_word(&chars, i + 1);
                shape = TokenShape::Word;
            } else {
                shape = TokenShape::Number;
            }
        } else if c.is_alphanumeric() || (c == '°' && i + 1 < n && chars[i + 1].is_alphabetic()) {
            i = scan_word(&chars, i + 1);
            let surface: String = chars[start..i].iter().collect();
            shape = if units::is_unit(&surface) {
                TokenShape::UnitLike
            } else {
                TokenShape::Word
            };
        } else if is_comparison_glyph(c) {
            i += 1;
            let two_char = i < n
                && (((c == '<' || c == '>') && chars[i] == '=')
                    || (c == '=' && (chars[i] == '<' || chars[i] == '>')));
            if two_char {
                i += 1;
            }
            shape = TokenShape::Symbol;
        } else if c == '%' {
            i += 1;
            shape = TokenShape::UnitLike;
        } else if is_symbol(c) {
            i += 1;
            shape = TokenShape::Symbol;
        } else {
            i += 1;
            shape = TokenShape::Punct;
        }
        tokens.push(Token {
            surface: chars[start..i].iter().collect(),
            start,
            end: i,
            shape,
        });
    }
    tokens
}

/// Digits with optional thousands groups and a decimal part.
fn scan_number(chars: &[char], mut i: usize) -> usize {
    let n = chars.len();
    while i < n && chars[i].is_ascii_digit() {
        i += 1;
    }
    // thousands separators: exactly three digits, not followed by another digit
    while i + 3 < n
        && chars[i] == ','
        && chars[i + 1..i + 4].iter().all(|c| c.is_ascii_digit())
        && !(i + 4 < n && chars[i + 4].is_ascii_digit())
    {
        i += 4;
    }
    if i + 1 < n && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
        i += 1;
        while i < n && chars[i].is_ascii_digit() {
            i += 1;
        }
    }
    i
}

fn scan_word(chars: &[char], mut i: usize) -> usize {
    let n = chars.len();
    loop {
        while i < n && chars[i].is_alphanumeric() {
            i += 1;
        }
        if i + 1 < n {
            let (c, next) = (chars[i], chars[i + 1]);
            let joins = match c {
                '-' | '‐' | '\'' | '’' => next.is_alphanumeric(),
                '/' => next.is_alphanumeric(),
                '^' => next.is_ascii_digit(),
                _ => false,
            };
            if joins {
                i += 1;
                continue;
            }
        }
        return i;
    }
}
