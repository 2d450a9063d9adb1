//! Precision, recall and F1 against Brat gold annotations.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::brat::{GoldAnnotation, GoldSpan};
use crate::output::{Extended, StructuredRecord};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("RecordMismatch: {0}")]
    RecordMismatch(String),
    #[error("prediction {0} has no extended block; annotate with extended output")]
    MissingExtended(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ElementType {
    Entity,
    Attribute,
    Relation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MatchMode {
    Exact,
    Overlap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Counts {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        f1(self.precision(), self.recall())
    }

    fn add(&mut self, other: Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub element: ElementType,
    pub mode: MatchMode,
    #[serde(flatten)]
    pub counts: Counts,
    /// Scores over the pooled counts.
    pub micro: Scores,
    /// Mean of the per-record scores, skipping records with no items of
    /// this type on either side.
    #[serde(rename = "macro")]
    pub macro_avg: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub records: usize,
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    pub fn row(&self, element: ElementType, mode: MatchMode) -> &ReportRow {
        self.rows
            .iter()
            .find(|r| r.element == element && r.mode == mode)
            .expect("report has every element and mode")
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "records: {}", self.records)?;
        writeln!(
            f,
            "{:<10} {:<8} {:>5} {:>5} {:>5} {:>9} {:>9} {:>9} {:>9}",
            "element", "mode", "tp", "fp", "fn", "precision", "recall", "f1", "macro-f1"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<10} {:<8} {:>5} {:>5} {:>5} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
                format!("{:?}", r.element).to_lowercase(),
                format!("{:?}", r.mode).to_lowercase(),
                r.counts.tp,
                r.counts.fp,
                r.counts.fn_,
                r.micro.precision,
                r.micro.recall,
                r.micro.f1,
                r.macro_avg.f1
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalOptions {
    /// Require predicted relation labels to equal the gold labels.
    pub match_labels: bool,
}

type Span = (usize, usize);

/// Greedy one-to-one matching of predicted to gold spans, by offset. Overlap
/// mode runs an exact pass first so exact pairs are never stolen.
pub fn match_spans(pred: &[Span], gold: &[Span], mode: MatchMode) -> Vec<Option<usize>> {
    let by_offset = |spans: &[Span]| {
        let mut order: Vec<usize> = (0..spans.len()).collect();
        order.sort_by_key(|&i| spans[i]);
        order
    };
    let pred_order = by_offset(pred);
    let gold_order = by_offset(gold);
    let mut used = vec![false; gold.len()];
    let mut out = vec![None; pred.len()];
    let mut pass = |accept: &dyn Fn(Span, Span) -> bool, out: &mut Vec<Option<usize>>| {
        for &p in &pred_order {
            if out[p].is_some() {
                continue;
            }
            if let Some(&g) = gold_order
                .iter()
                .find(|&&g| !used[g] && accept(pred[p], gold[g]))
            {
                used[g] = true;
                out[p] = Some(g);
            }
        }
    };
    pass(&|p, g| p == g, &mut out);
    if mode == MatchMode::Overlap {
        pass(&|p, g| p.0 < g.1 && g.0 < p.1, &mut out);
    }
    out
}

fn span_counts(matches: &[Option<usize>], gold_len: usize) -> Counts {
    let tp = matches.iter().filter(|m| m.is_some()).count();
    Counts {
        tp,
        fp: matches.len() - tp,
        fn_: gold_len - tp,
    }
}

fn spans(gold: &[GoldSpan]) -> Vec<Span> {
    gold.iter().map(|s| (s.start, s.end)).collect()
}

/// Counts for one record in one mode, per element type.
pub fn record_counts(
    pred: &Extended,
    gold: &GoldAnnotation,
    mode: MatchMode,
    options: EvalOptions,
) -> BTreeMap<ElementType, Counts> {
    let pe: Vec<Span> = pred.entities.iter().map(|e| (e.start, e.end)).collect();
    let pa: Vec<Span> = pred.attributes.iter().map(|a| (a.start, a.end)).collect();
    let me = match_spans(&pe, &spans(&gold.entities), mode);
    let ma = match_spans(&pa, &spans(&gold.attributes), mode);

    let mut used = vec![false; gold.relations.len()];
    let mut tp = 0;
    for r in &pred.relations {
        let (Some(ge), Some(ga)) = (me[r.entity], ma[r.attribute]) else {
            continue;
        };
        let hit = gold.relations.iter().enumerate().position(|(i, g)| {
            !used[i]
                && g.entity == ge
                && g.attribute == ga
                && (!options.match_labels || g.label == r.label)
        });
        if let Some(i) = hit {
            used[i] = true;
            tp += 1;
        }
    }
    BTreeMap::from([
        (ElementType::Entity, span_counts(&me, gold.entities.len())),
        (
            ElementType::Attribute,
            span_counts(&ma, gold.attributes.len()),
        ),
        (
            ElementType::Relation,
            Counts {
                tp,
                fp: pred.relations.len() - tp,
                fn_: gold.relations.len() - tp,
            },
        ),
    ])
}

/// Scores predictions against gold, matching records by id. Both sides must
/// hold the same set of ids.
pub fn evaluate(
    predictions: &[StructuredRecord],
    gold: &[(String, GoldAnnotation)],
    options: EvalOptions,
) -> Result<EvalReport, EvalError> {
    let mut by_id: BTreeMap<&str, &GoldAnnotation> = BTreeMap::new();
    for (id, g) in gold {
        if by_id.insert(id, g).is_some() {
            return Err(EvalError::RecordMismatch(format!("duplicate gold id {id}")));
        }
    }
    let mut pairs: BTreeMap<&str, (&Extended, &GoldAnnotation)> = BTreeMap::new();
    for p in predictions {
        let ext = p
            .extended
            .as_ref()
            .ok_or_else(|| EvalError::MissingExtended(p.id.clone()))?;
        let g = by_id
            .get(p.id.as_str())
            .ok_or_else(|| EvalError::RecordMismatch(format!("no gold record for {}", p.id)))?;
        if pairs.insert(&p.id, (ext, g)).is_some() {
            return Err(EvalError::RecordMismatch(format!(
                "duplicate prediction id {}",
                p.id
            )));
        }
    }
    if let Some(missing) = by_id.keys().find(|id| !pairs.contains_key(*id)) {
        return Err(EvalError::RecordMismatch(format!(
            "no prediction for {missing}"
        )));
    }

    let mut rows = Vec::new();
    for mode in [MatchMode::Exact, MatchMode::Overlap] {
        let per_record: Vec<_> = pairs
            .values()
            .map(|(p, g)| record_counts(p, g, mode, options))
            .collect();
        for element in [
            ElementType::Entity,
            ElementType::Attribute,
            ElementType::Relation,
        ] {
            let mut total = Counts::default();
            let (mut p, mut r, mut f, mut n) = (0.0, 0.0, 0.0, 0usize);
            for counts in &per_record {
                let c = counts[&element];
                total.add(c);
                // records with nothing predicted and nothing gold carry no signal
                if c.tp + c.fp + c.fn_ == 0 {
                    continue;
                }
                n += 1;
                p += c.precision();
                r += c.recall();
                f += c.f1();
            }
            let n = n.max(1) as f64;
            rows.push(ReportRow {
                element,
                mode,
                counts: total,
                micro: Scores {
                    precision: total.precision(),
                    recall: total.recall(),
                    f1: total.f1(),
                },
                macro_avg: Scores {
                    precision: p / n,
                    recall: r / n,
                    f1: f / n,
                },
            });
        }
    }
    Ok(EvalReport {
        records: pairs.len(),
        rows,
    })
}

/// Turns gold annotations into an extended prediction, for self-comparison.
pub fn gold_as_prediction(id: &str, text: &str, gold: &GoldAnnotation) -> StructuredRecord {
    use crate::attributes::{AttributeKind, AttributeMention};
    use crate::entities::EntityMention;
    use crate::output::{ExtendedRelation, RelationPair};

    let entities = gold
        .entities
        .iter()
        .map(|s| EntityMention {
            sentence_index: 0,
            start: s.start,
            end: s.end,
            surface: s.surface.clone(),
            concept_id: String::new(),
            matched_term: s.surface.clone(),
        })
        .collect();
    let attributes = gold
        .attributes
        .iter()
        .map(|s| AttributeMention {
            sentence_index: 0,
            start: s.start,
            end: s.end,
            surface: s.surface.clone(),
            kind: AttributeKind::Qualifier,
            comparator: None,
            values: Vec::new(),
            unit: None,
            time_unit: None,
            anchor: None,
            anchor_span: None,
        })
        .collect();
    StructuredRecord {
        id: id.to_string(),
        text: text.to_string(),
        relations: gold
            .relations
            .iter()
            .map(|r| RelationPair {
                entity: gold.entities[r.entity].surface.clone(),
                attribute: gold.attributes[r.attribute].surface.clone(),
            })
            .collect(),
        extended: Some(Extended {
            entities,
            attributes,
            relations: gold
                .relations
                .iter()
                .map(|r| ExtendedRelation {
                    entity: r.entity,
                    attribute: r.attribute,
                    label: r.label.clone(),
                    score: 1.0,
                })
                .collect(),
            scores: vec![1.0; gold.relations.len()],
            unlinked_attributes: Vec::new(),
        }),
    }
}
