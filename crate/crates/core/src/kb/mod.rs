//! The knowledge base: concepts with the units, value ranges and value shapes
//! they are usually reported with.
//!
//! A KB file is a versioned JSON document:
//!
//! ```json
//! {"version": 1,
//!  "units": {"mm Hg": "mmHg"},
//!  "entries": [{"concept_id": "C0005823", "preferred_term": "blood pressure",
//!               "synonyms": ["BP"], "expected_units": ["mmHg"],
//!               "value_min": 30, "value_max": 300, "value_pattern": "RATIO",
//!               "category": "MEASUREMENT"}]}
//! ```
//!
//! `units` extends the built-in unit table. Three-column TSV tables
//! (`term`, `value_range`, `units`) can be imported with [`parse_tsv`].

mod compat;
mod mine;

pub use compat::{score_compatibility, CompatibilityScore, CompatibilityWeights, TermMatch};
pub use mine::mine_kb_candidates;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::UnitTable;

pub const KB_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("malformed knowledge base at {location}: {message}")]
    MalformedKb { location: String, message: String },
    #[error("duplicate concept id {0}")]
    DuplicateConceptId(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn malformed(location: impl Into<String>, message: impl Into<String>) -> KbError {
    KbError::MalformedKb {
        location: location.into(),
        message: message.into(),
    }
}

/// Expected shape of the values reported for a concept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ValuePattern {
    Scalar,
    Ratio,
    Range,
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Category {
    Measurement,
    Drug,
    Condition,
    Procedure,
    Demographic,
    Other,
}

/// One knowledge-base row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbEntry {
    pub concept_id: String,
    pub preferred_term: String,
    #[serde(default)]
    pub synonyms: Vec<String>,
    #[serde(default)]
    pub expected_units: Vec<String>,
    #[serde(default)]
    pub value_min: Option<f64>,
    #[serde(default)]
    pub value_max: Option<f64>,
    #[serde(default)]
    pub value_pattern: Option<ValuePattern>,
    #[serde(default = "default_category")]
    pub category: Category,
}

fn default_category() -> Category {
    Category::Other
}

impl KbEntry {
    pub fn new(concept_id: &str, preferred_term: &str, category: Category) -> Self {
        KbEntry {
            concept_id: concept_id.to_string(),
            preferred_term: preferred_term.to_string(),
            synonyms: Vec::new(),
            expected_units: Vec::new(),
            value_min: None,
            value_max: None,
            value_pattern: None,
            category,
        }
    }

    pub fn with_synonyms(mut self, synonyms: &[&str]) -> Self {
        self.synonyms = synonyms.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_units(mut self, units: &[&str]) -> Self {
        self.expected_units = units.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_range(mut self, min: Option<f64>, max: Option<f64>) -> Self {
        self.value_min = min;
        self.value_max = max;
        self
    }

    pub fn with_pattern(mut self, pattern: ValuePattern) -> Self {
        self.value_pattern = Some(pattern);
        self
    }

    /// Preferred term followed by the synonyms.
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.preferred_term.as_str())
            .chain(self.synonyms.iter().map(String::as_str))
    }

    fn validate(&self, location: &str, units: &UnitTable) -> Result<(), KbError> {
        if self.concept_id.trim().is_empty() {
            return Err(malformed(
                format!("{location}.concept_id"),
                "empty concept id",
            ));
        }
        if self.preferred_term.trim().is_empty() {
            return Err(malformed(
                format!("{location}.preferred_term"),
                "empty preferred term",
            ));
        }
        let mut seen = BTreeSet::new();
        seen.insert(fold_case(&self.preferred_term));
        for syn in &self.synonyms {
            if syn.trim().is_empty() {
                return Err(malformed(format!("{location}.synonyms"), "empty synonym"));
            }
            if !seen.insert(fold_case(syn)) {
                return Err(malformed(
                    format!("{location}.synonyms"),
                    format!("duplicate synonym {syn:?} (or equal to the preferred term)"),
                ));
            }
        }
        for unit in &self.expected_units {
            if let Some(canonical) = units.normalize(unit) {
                if canonical != unit {
                    return Err(malformed(
                        format!("{location}.expected_units"),
                        format!("{unit:?} is not canonical, use {canonical:?}"),
                    ));
                }
            }
        }
        for (field, v) in [("value_min", self.value_min), ("value_max", self.value_max)] {
            if v.is_some_and(|v| !v.is_finite()) {
                return Err(malformed(
                    format!("{location}.{field}"),
                    "not a finite number",
                ));
            }
        }
        if let (Some(lo), Some(hi)) = (self.value_min, self.value_max) {
            if lo > hi {
                return Err(malformed(
                    format!("{location}.value_min"),
                    format!(
                        "value_min {lo} exceeds value_max {hi} for {:?}",
                        self.preferred_term
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// Case folding used for every term comparison.
pub fn fold_case(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_uppercase()
        .to_lowercase()
}

/// An immutable, validated knowledge base.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    entries: Vec<KbEntry>,
    extra_units: BTreeMap<String, String>,
    unit_table: UnitTable,
    term_index: BTreeMap<String, Vec<usize>>,
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries && self.extra_units == other.extra_units
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KbFile {
    version: u32,
    #[serde(default)]
    units: BTreeMap<String, String>,
    #[serde(default)]
    entries: Vec<KbEntry>,
}

impl KnowledgeBase {
    /// Validates the entries and builds the term index.
    pub fn new(
        entries: Vec<KbEntry>,
        extra_units: BTreeMap<String, String>,
    ) -> Result<Self, KbError> {
        let mut unit_table = UnitTable::builtin().clone();
        for (variant, canonical) in &extra_units {
            unit_table.insert(variant, canonical);
        }
        let mut ids = BTreeSet::new();
        let mut term_index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, entry) in entries.iter().enumerate() {
            entry.validate(&format!("entries[{i}]"), &unit_table)?;
            if !ids.insert(entry.concept_id.clone()) {
                return Err(KbError::DuplicateConceptId(entry.concept_id.clone()));
            }
            for term in entry.terms() {
                term_index.entry(fold_case(term)).or_default().push(i);
            }
        }
        Ok(KnowledgeBase {
            entries,
            extra_units,
            unit_table,
            term_index,
        })
    }

    pub fn empty() -> Self {
        KnowledgeBase::new(Vec::new(), BTreeMap::new()).expect("empty KB is valid")
    }

    pub fn entries(&self) -> &[KbEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn unit_table(&self) -> &UnitTable {
        &self.unit_table
    }

    /// Case-insensitive exact match over preferred terms and synonyms. All
    /// matching entries are returned, in file order.
    pub fn lookup(&self, phrase: &str) -> Vec<&KbEntry> {
        self.term_index
            .get(&fold_case(phrase))
            .map(|ids| ids.iter().map(|&i| &self.entries[i]).collect())
            .unwrap_or_default()
    }

    pub fn get(&self, concept_id: &str) -> Option<&KbEntry> {
        self.entries.iter().find(|e| e.concept_id == concept_id)
    }

    /// Canonical unit for a surface, using the built-in table plus any units
    /// declared by the KB file.
    pub fn normalize_unit(&self, surface: &str) -> Option<String> {
        self.unit_table.normalize(surface).map(str::to_string)
    }

    pub fn to_json(&self) -> String {
        let file = KbFile {
            version: KB_VERSION,
            units: self.extra_units.clone(),
            entries: self.entries.clone(),
        };
        serde_json::to_string_pretty(&file).expect("KB serializes")
    }
}

/// Parses a KB JSON document.
pub fn parse_kb_json(text: &str) -> Result<KnowledgeBase, KbError> {
    let file: KbFile = serde_json::from_str(text).map_err(|e| {
        malformed(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    if file.version != KB_VERSION {
        return Err(malformed(
            "version",
            format!(
                "unsupported version {}, expected {KB_VERSION}",
                file.version
            ),
        ));
    }
    KnowledgeBase::new(file.entries, file.units)
}

/// Imports a three-column table: `term`, `value_range` (`lo..hi`, either side
/// optional) and `units` (comma-separated). A header row is required.
pub fn parse_tsv(text: &str) -> Result<KnowledgeBase, KbError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) => {
            let cols: Vec<_> = header
                .split('\t')
                .map(|c| c.trim().to_lowercase())
                .collect();
            if cols.len() < 3 || cols[0] != "term" || cols[1] != "value_range" || cols[2] != "units"
            {
                return Err(malformed(
                    "line 1",
                    "expected header: term<TAB>value_range<TAB>units",
                ));
            }
        }
        None => return Ok(KnowledgeBase::empty()),
    }
    let mut entries = Vec::new();
    for (n, line) in lines {
        let loc = format!("line {}", n + 1);
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 3 {
            return Err(malformed(loc, "expected 3 tab-separated columns"));
        }
        let term = cols[0].trim();
        let (lo, hi) = parse_value_range(cols[1].trim())
            .ok_or_else(|| malformed(&loc, format!("bad value range {:?}", cols[1].trim())))?;
        let units: Vec<String> = cols[2]
            .split(',')
            .map(str::trim)
            .filter(|u| !u.is_empty())
            .map(|u| crate::units::normalize_unit(u).unwrap_or_else(|| u.to_string()))
            .collect();
        let category = if units.is_empty() && lo.is_none() && hi.is_none() {
            Category::Other
        } else {
            Category::Measurement
        };
        let mut entry = KbEntry::new(&local_concept_id(term), term, category).with_range(lo, hi);
        entry.expected_units = units;
        entry.validate(&loc, UnitTable::builtin())?;
        entries.push(entry);
    }
    KnowledgeBase::new(entries, BTreeMap::new())
}

fn parse_value_range(s: &str) -> Option<(Option<f64>, Option<f64>)> {
    if s.is_empty() {
        return Some((None, None));
    }
    let (lo, hi) = s.split_once("..")?;
    let parse = |p: &str| -> Option<Option<f64>> {
        let p = p.trim();
        if p.is_empty() {
            Some(None)
        } else {
            p.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some)
        }
    };
    Some((parse(lo)?, parse(hi)?))
}

/// `LOCAL:<slug>` identifier for curated or mined entries.
pub fn local_concept_id(term: &str) -> String {
    let mut slug = String::new();
    for c in term.to_lowercase().chars() {
        if c.is_alphanumeric() {
            slug.push(c);
        } else if !slug.ends_with('-') {
            slug.push('-');
        }
    }
    format!("LOCAL:{}", slug.trim_matches('-'))
}

/// Loads a KB from disk. Files ending in `.tsv` go through the table importer.
pub fn load_kb(path: impl AsRef<Path>) -> Result<KnowledgeBase, KbError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| KbError::Io {
        path: path.display().to_string(),
        source,
    })?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("tsv"))
    {
        parse_tsv(&text)
    } else {
        parse_kb_json(&text)
    }
}

pub fn save_kb(kb: &KnowledgeBase, path: impl AsRef<Path>) -> Result<(), KbError> {
    let path = path.as_ref();
    fs::write(path, kb.to_json() + "\n").map_err(|source| KbError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// The mini knowledge base bundled with the crate.
pub fn bundled_kb() -> KnowledgeBase {
    parse_kb_json(include_str!("../../data/mini_kb.json")).expect("bundled KB is valid")
}
