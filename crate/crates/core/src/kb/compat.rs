use serde::{Deserialize, Serialize};

use super::{KbEntry, KbError, ValuePattern};
use crate::attributes::{AttributeMention, AttributeShape};

/// Relative weight of the unit, value-pattern and range checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompatibilityWeights {
    pub unit: f64,
    pub pattern: f64,
    pub range: f64,
}

impl Default for CompatibilityWeights {
    fn default() -> Self {
        CompatibilityWeights {
            unit: 0.6,
            pattern: 0.25,
            range: 0.15,
        }
    }
}

impl CompatibilityWeights {
    /// Weights must be non-negative, sum to one, and rank unit above pattern
    /// above range.
    pub fn validate(&self) -> Result<(), KbError> {
        let bad = |message: &str| KbError::MalformedKb {
            location: "weights".to_string(),
            message: message.to_string(),
        };
        let all = [self.unit, self.pattern, self.range];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(bad("weights must be finite and non-negative"));
        }
        if (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(bad("weights must sum to 1"));
        }
        if !(self.unit > self.pattern && self.pattern > self.range) {
            return Err(bad("weights must satisfy unit > pattern > range"));
        }
        Ok(())
    }
}

/// Outcome of one compatibility check. `Neutral` means the check had
/// nothing to compare and contributes half its weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TermMatch {
    Matched,
    Mismatched,
    Neutral,
}

impl TermMatch {
    pub fn factor(self) -> f64 {
        match self {
            TermMatch::Matched => 1.0,
            TermMatch::Mismatched => 0.0,
            TermMatch::Neutral => 0.5,
        }
    }

    fn from_bool(b: bool) -> Self {
        if b {
            TermMatch::Matched
        } else {
            TermMatch::Mismatched
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityScore {
    pub score: f64,
    pub unit: TermMatch,
    pub pattern: TermMatch,
    pub range: TermMatch,
}

impl CompatibilityScore {
    pub fn unit_matched(&self) -> bool {
        self.unit == TermMatch::Matched
    }

    pub fn pattern_matched(&self) -> bool {
        self.pattern == TermMatch::Matched
    }

    pub fn range_matched(&self) -> bool {
        self.range == TermMatch::Matched
    }
}

/// Scores how well an attribute fits what the KB expects of a concept.
pub fn score_compatibility(
    entry: &KbEntry,
    attr: &AttributeMention,
    weights: &CompatibilityWeights,
) -> CompatibilityScore {
    let shape = attr.shape();
    let numeric = shape != AttributeShape::NonNumeric;

    let unit = match (&attr.unit, numeric, entry.expected_units.is_empty()) {
        (_, false, _) | (_, _, true) | (None, _, _) => TermMatch::Neutral,
        (Some(u), true, false) => TermMatch::from_bool(entry.expected_units.iter().any(|e| e == u)),
    };

    let pattern = match entry.value_pattern {
        None => TermMatch::Neutral,
        Some(ValuePattern::Any) => TermMatch::Matched,
        Some(p) => TermMatch::from_bool(matches!(
            (p, shape),
            (ValuePattern::Scalar, AttributeShape::Scalar)
                | (ValuePattern::Ratio, AttributeShape::Ratio)
                | (ValuePattern::Range, AttributeShape::Range)
        )),
    };

    let range = if !numeric || (entry.value_min.is_none() && entry.value_max.is_none()) {
        TermMatch::Neutral
    } else {
        let lo = entry.value_min.unwrap_or(f64::NEG_INFINITY);
        let hi = entry.value_max.unwrap_or(f64::INFINITY);
        TermMatch::from_bool(attr.values.iter().all(|v| lo <= *v && *v <= hi))
    };

    let score = weights.unit * unit.factor()
        + weights.pattern * pattern.factor()
        + weights.range * range.factor();
    CompatibilityScore {
        score: score.clamp(0.0, 1.0),
        unit,
        pattern,
        range,
    }
}
