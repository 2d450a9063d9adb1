//! Unit surface normalization.

use std::collections::BTreeMap;
use std::sync::OnceLock;

/// Canonical unit followed by the surface variants that map onto it.
const DEFAULT_UNITS: &[(&str, &[&str])] = &[
    ("mmHg", &["mm Hg", "millimeters of mercury"]),
    ("kg/m^2", &["kg/m2", "kg per m2", "kg per m^2", "kg/sqm"]),
    ("kg", &["kgs", "kilogram", "kilograms"]),
    ("g", &["gram", "grams"]),
    ("mg", &["milligram", "milligrams"]),
    ("µg", &["mcg", "ug", "μg", "microgram", "micrograms"]),
    ("lb", &["lbs", "pound", "pounds"]),
    (
        "cm",
        &["centimeter", "centimeters", "centimetre", "centimetres"],
    ),
    ("mg/dL", &["mg/dl", "mg per dL"]),
    ("g/dL", &["g/dl", "g per dL"]),
    ("g/L", &["g/l"]),
    ("mmol/L", &["mmol/l", "mmol per L"]),
    ("µmol/L", &["umol/L", "μmol/L"]),
    ("mEq/L", &["meq/l"]),
    ("ng/mL", &["ng/ml"]),
    ("IU/L", &["U/L", "iu/l"]),
    ("mg/kg", &["mg per kg"]),
    ("mL/min", &["ml/min", "mL per min", "ml per minute"]),
    ("mL", &["ml", "milliliter", "milliliters"]),
    ("%", &["percent", "pct"]),
    ("bpm", &["beats/min", "beats per minute", "beats/minute"]),
    ("ms", &["msec", "millisecond", "milliseconds"]),
    ("°C", &["degC", "celsius"]),
    ("°F", &["degF", "fahrenheit"]),
    (
        "cells/mm^3",
        &["cells/mm3", "cells/uL", "cells/µL", "cells per mm3"],
    ),
    ("hour", &["hours", "hr", "hrs"]),
    ("day", &["days"]),
    ("week", &["weeks", "wk", "wks"]),
    ("month", &["months"]),
    ("year", &["years", "yr", "yrs"]),
];

const TIME_UNITS: &[&str] = &["hour", "day", "week", "month", "year"];

/// Lookup key shared by all variants of one unit: lowercase, `per` as `/`,
/// superscripts and carets folded, whitespace removed.
pub fn unit_key(surface: &str) -> String {
    let lower = surface.trim().to_lowercase();
    let spaced = format!(
        " {} ",
        lower.split_whitespace().collect::<Vec<_>>().join(" ")
    );
    spaced
        .replace(" per ", "/")
        .replace(['²'], "2")
        .replace(['³'], "3")
        .replace('μ', "µ")
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '^')
        .collect()
}

/// Mapping from unit variants to canonical names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UnitTable {
    by_key: BTreeMap<String, String>,
}

impl UnitTable {
    pub fn builtin() -> &'static UnitTable {
        static TABLE: OnceLock<UnitTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            let mut t = UnitTable::default();
            for (canonical, variants) in DEFAULT_UNITS {
                t.insert(canonical, canonical);
                for v in *variants {
                    t.insert(v, canonical);
                }
            }
            t
        })
    }

    pub fn insert(&mut self, variant: &str, canonical: &str) {
        self.by_key
            .insert(unit_key(canonical), canonical.to_string());
        self.by_key.insert(unit_key(variant), canonical.to_string());
    }

    pub fn normalize(&self, surface: &str) -> Option<&str> {
        if surface.trim().is_empty() {
            return None;
        }
        self.by_key.get(&unit_key(surface)).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.by_key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }
}

/// Normalizes against the built-in table.
pub fn normalize_unit(surface: &str) -> Option<String> {
    UnitTable::builtin().normalize(surface).map(str::to_string)
}

pub fn is_unit(surface: &str) -> bool {
    UnitTable::builtin().normalize(surface).is_some()
}

pub fn is_time_unit(canonical: &str) -> bool {
    TIME_UNITS.contains(&canonical)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variants_collapse() {
        for s in ["kg/m2", "kg/m^2", "kg per m2", "KG/M2", "kg/m²"] {
            assert_eq!(normalize_unit(s).as_deref(), Some("kg/m^2"), "{s}");
        }
        assert_eq!(normalize_unit("mm Hg").as_deref(), Some("mmHg"));
        assert_eq!(normalize_unit("mmHg").as_deref(), Some("mmHg"));
        assert_eq!(normalize_unit("beats per minute").as_deref(), Some("bpm"));
        assert_eq!(normalize_unit("cells/mm3").as_deref(), Some("cells/mm^3"));
        assert_eq!(normalize_unit("days").as_deref(), Some("day"));
    }

    #[test]
    fn unknown_is_absent() {
        assert_eq!(normalize_unit("banana"), None);
        assert_eq!(normalize_unit(""), None);
        assert_eq!(normalize_unit("a"), None);
    }

    #[test]
    fn builtin_size() {
        assert!(DEFAULT_UNITS.len() >= 30);
    }

    #[test]
    fn canonical_forms_are_fixed_points() {
        for (c, _) in DEFAULT_UNITS {
            assert_eq!(normalize_unit(c).as_deref(), Some(*c));
        }
    }
}
