//! Ordinal survey codes to the fixed `[-1, +1]` response scale.
//!
//! A question's declared code order is authoritative: the first code maps to
//! `-1`, the last to `+1`, the rest are evenly spaced in between. Codes listed
//! as excluded (e.g. "other") and codes the schema does not know become
//! missing and are tallied separately.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Deserializer, Serialize};
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

/// A raw response code as it appears in a data file.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Code(String);

impl Code {
    pub fn new(s: impl Into<String>) -> Self {
        Code(s.into().trim().to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Textual match, falling back to numeric equality (`"1"` matches `"1.0"`).
    pub fn matches(&self, raw: &str) -> bool {
        let raw = raw.trim();
        if self.0 == raw {
            return true;
        }
        match (self.0.parse::<f64>(), raw.parse::<f64>()) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Code {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Str(String),
        }
        Ok(match Raw::deserialize(deserializer)? {
            Raw::Int(i) => Code(i.to_string()),
            Raw::Float(f) => Code(f.to_string()),
            Raw::Str(s) => Code::new(s),
        })
    }
}

impl From<&str> for Code {
    fn from(s: &str) -> Self {
        Code::new(s)
    }
}

impl From<i64> for Code {
    fn from(i: i64) -> Self {
        Code(i.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuestionSchema {
    pub question_id: String,
    pub ordered_codes: Vec<Code>,
    #[serde(default)]
    pub excluded_codes: Vec<Code>,
    #[serde(default)]
    pub topics: Vec<String>,
}

/// How a single raw cell was classified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Encoded<T> {
    Present(T),
    Absent,
    Excluded,
    Unrecognized,
}

impl<T: Copy> Encoded<T> {
    pub fn value(self) -> Option<T> {
        match self {
            Encoded::Present(v) => Some(v),
            _ => None,
        }
    }
}

/// Per-question tallies from [`encode_dataset`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodeCounts {
    pub present: usize,
    pub missing: usize,
    pub excluded: usize,
    pub unrecognized: usize,
}

/// Raw string table: column names plus rows of optional cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<String>>>,
}

/// Encoded respondents x questions; `None` marks a missing cell.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedTable<T> {
    pub questions: Vec<String>,
    pub values: Vec<Vec<Option<T>>>,
    pub counts: Vec<EncodeCounts>,
}

impl QuestionSchema {
    pub fn new<C: Into<Code>>(id: &str, ordered: impl IntoIterator<Item = C>) -> Self {
        QuestionSchema {
            question_id: id.to_string(),
            ordered_codes: ordered.into_iter().map(Into::into).collect(),
            excluded_codes: Vec::new(),
            topics: Vec::new(),
        }
    }

    pub fn with_excluded<C: Into<Code>>(mut self, excluded: impl IntoIterator<Item = C>) -> Self {
        self.excluded_codes = excluded.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_topics(mut self, topics: &[&str]) -> Self {
        self.topics = topics.iter().map(|t| t.to_string()).collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::InvalidSchema {
            question: self.question_id.clone(),
            reason: reason.to_string(),
        };
        if self.ordered_codes.len() < 2 {
            return Err(bad("ordered_codes needs at least two codes"));
        }
        let mut seen = HashSet::new();
        if !self.ordered_codes.iter().all(|c| seen.insert(c.as_str())) {
            return Err(bad("ordered_codes contains duplicates"));
        }
        if self.excluded_codes.iter().any(|c| seen.contains(c.as_str())) {
            return Err(bad("excluded_codes overlaps ordered_codes"));
        }
        Ok(())
    }

    /// Number of scale points.
    pub fn levels(&self) -> usize {
        self.ordered_codes.len()
    }

    pub fn classify<T: Scalar>(&self, raw: Option<&str>) -> Encoded<T> {
        let raw = match raw.map(str::trim) {
            None | Some("") => return Encoded::Absent,
            Some(r) => r,
        };
        if let Some(i) = self.ordered_codes.iter().position(|c| c.matches(raw)) {
            return Encoded::Present(scale_point(i, self.ordered_codes.len()));
        }
        if self.excluded_codes.iter().any(|c| c.matches(raw)) {
            return Encoded::Excluded;
        }
        Encoded::Unrecognized
    }
}

/// Position `i` of `levels` evenly spaced points on `[-1, 1]`; the endpoints are exact.
pub fn scale_point<T: Scalar>(i: usize, levels: usize) -> T {
    debug_assert!(levels >= 2 && i < levels);
    if i == 0 {
        return -T::one();
    }
    if i + 1 == levels {
        return T::one();
    }
    let i = T::of(i as f64);
    let span = T::of((levels - 1) as f64);
    -T::one() + T::of(2.0) * i / span
}

/// Encodes one raw cell; absent, excluded and unrecognized codes are all missing.
pub fn encode_value<T: Scalar>(schema: &QuestionSchema, raw: Option<&str>) -> Option<T> {
    schema.classify(raw).value()
}

pub fn encode_dataset<T: Scalar>(schemas: &[QuestionSchema], table: &RawTable) -> Result<EncodedTable<T>> {
    let by_id: HashMap<&str, &QuestionSchema> =
        schemas.iter().map(|s| (s.question_id.as_str(), s)).collect();
    let cols: Vec<&QuestionSchema> = table
        .columns
        .iter()
        .map(|c| by_id.get(c.as_str()).copied().ok_or_else(|| Error::SchemaMismatch(c.clone())))
        .collect::<Result<_>>()?;
    for s in &cols {
        s.validate()?;
    }
    let mut counts = vec![EncodeCounts::default(); cols.len()];
    let mut values = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        if row.len() != cols.len() {
            return Err(Error::DimensionMismatch { expected: cols.len(), got: row.len() });
        }
        let encoded = row
            .iter()
            .zip(&cols)
            .zip(counts.iter_mut())
            .map(|((cell, schema), count)| {
                let e = schema.classify::<T>(cell.as_deref());
                match e {
                    Encoded::Present(_) => count.present += 1,
                    Encoded::Absent => count.missing += 1,
                    Encoded::Excluded => count.excluded += 1,
                    Encoded::Unrecognized => count.unrecognized += 1,
                }
                e.value()
            })
            .collect();
        values.push(encoded);
    }
    Ok(EncodedTable { questions: table.columns.clone(), values, counts })
}

pub fn parse_schemas(json: &str) -> Result<Vec<QuestionSchema>> {
    let schemas: Vec<QuestionSchema> = serde_json::from_str(json)?;
    for s in &schemas {
        s.validate()?;
    }
    Ok(schemas)
}

pub fn load_schemas(path: &Path) -> Result<Vec<QuestionSchema>> {
    parse_schemas(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_maps_to_plus_minus_one() {
        let s = QuestionSchema::new("q", [1, 2]);
        assert_eq!(encode_value::<f64>(&s, Some("1")), Some(-1.0));
        assert_eq!(encode_value::<f64>(&s, Some("2")), Some(1.0));
    }

    #[test]
    fn three_and_seven_point_scales() {
        let s = QuestionSchema::new("q", [1, 2, 3]);
        assert_eq!(encode_value::<f64>(&s, Some("2")), Some(0.0));
        let s = QuestionSchema::new("q", 1..=7i64);
        let v = encode_value::<f64>(&s, Some("3")).unwrap();
        assert!((v + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn excluded_absent_unknown_are_missing() {
        let s = QuestionSchema::new("q", [1, 2, 3, 4]).with_excluded([5]);
        assert_eq!(s.classify::<f64>(Some("5")), Encoded::Excluded);
        assert_eq!(s.classify::<f64>(None), Encoded::Absent);
        assert_eq!(s.classify::<f64>(Some("  ")), Encoded::Absent);
        assert_eq!(s.classify::<f64>(Some("9")), Encoded::Unrecognized);
        assert_eq!(s.classify::<f64>(Some("4.0")), Encoded::Present(1.0));
    }

    #[test]
    fn declared_order_is_authoritative() {
        // semantic order differs from numeric order
        let s = QuestionSchema::new("q", [4, 5, 1]);
        assert_eq!(encode_value::<f64>(&s, Some("4")), Some(-1.0));
        assert_eq!(encode_value::<f64>(&s, Some("1")), Some(1.0));
    }

    #[test]
    fn encode_dataset_counts() {
        let s = QuestionSchema::new("q", [1, 2]);
        let t = RawTable {
            columns: vec!["q".into()],
            rows: vec![vec![Some("1".into())], vec![Some("2".into())], vec![None]],
        };
        let e = encode_dataset::<f64>(&[s.clone()], &t).unwrap();
        assert_eq!(e.values, vec![vec![Some(-1.0)], vec![Some(1.0)], vec![None]]);
        assert_eq!(e.counts[0], EncodeCounts { present: 2, missing: 1, excluded: 0, unrecognized: 0 });

        let empty = RawTable { columns: vec!["q".into()], rows: vec![] };
        let e = encode_dataset::<f64>(&[s], &empty).unwrap();
        assert!(e.values.is_empty());
        assert_eq!(e.counts[0], EncodeCounts::default());
    }

    #[test]
    fn encode_dataset_requires_schema() {
        let t = RawTable { columns: vec!["nope".into()], rows: vec![] };
        assert!(matches!(encode_dataset::<f64>(&[], &t), Err(Error::SchemaMismatch(c)) if c == "nope"));
    }

    #[test]
    fn schema_validation() {
        assert!(QuestionSchema::new("q", [1]).validate().is_err());
        assert!(QuestionSchema::new("q", [1, 1]).validate().is_err());
        assert!(QuestionSchema::new("q", [1, 2]).with_excluded([2]).validate().is_err());
    }

    #[test]
    fn schema_json_accepts_numbers_and_strings() {
        let json = r#"[{"question_id":"abany","ordered_codes":[1,"2"],"excluded_codes":[8],"topics":["abortion"]}]"#;
        let s = parse_schemas(json).unwrap();
        assert_eq!(s[0].ordered_codes, vec![Code::from(1), Code::from("2")]);
        assert_eq!(s[0].excluded_codes, vec![Code::from(8)]);
        assert_eq!(s[0].topics, vec!["abortion".to_string()]);
    }

    #[test]
    fn endpoints_are_exact_for_every_scale() {
        for k in 2..40 {
            assert_eq!(scale_point::<f64>(0, k), -1.0);
            assert_eq!(scale_point::<f64>(k - 1, k), 1.0);
        }
    }
}
