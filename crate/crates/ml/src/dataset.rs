//! Tabular datasets with a typed schema.
//!
//! A [`Dataset`] is a row-major table whose columns are declared up front as
//! categorical, continuous or discrete. Rows are validated on construction:
//! arity must match, categorical cells must hold strings and numeric cells
//! must be finite. Continuous gaps are rejected here rather than imputed.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{MlError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Categorical,
    Continuous,
    Discrete,
}

impl FeatureKind {
    pub fn is_numeric(self) -> bool {
        !matches!(self, FeatureKind::Categorical)
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureKind::Categorical => "categorical",
            FeatureKind::Continuous => "continuous",
            FeatureKind::Discrete => "discrete",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
}

impl FeatureSpec {
    pub fn new(name: impl Into<String>, kind: FeatureKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        Self::new(name, FeatureKind::Categorical)
    }

    pub fn continuous(name: impl Into<String>) -> Self {
        Self::new(name, FeatureKind::Continuous)
    }

    pub fn discrete(name: impl Into<String>) -> Self {
        Self::new(name, FeatureKind::Discrete)
    }
}

/// Ordered list of feature declarations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schema(pub Vec<FeatureSpec>);

impl Schema {
    pub fn new(features: Vec<FeatureSpec>) -> Self {
        Schema(features)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|f| f.name == name)
    }

    /// Hex SHA-256 over `name:kind` lines. Models refuse inputs whose
    /// fingerprint differs from the one they were trained on.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for f in &self.0 {
            hasher.update(f.name.as_bytes());
            hasher.update(b":");
            hasher.update(f.kind.to_string().as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

/// A single cell. Serializes untagged so JSON rows read naturally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureValue {
    Number(f64),
    Category(String),
}

impl FeatureValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            FeatureValue::Number(v) => Some(*v),
            FeatureValue::Category(_) => None,
        }
    }

    pub fn as_category(&self) -> Option<&str> {
        match self {
            FeatureValue::Category(s) => Some(s),
            FeatureValue::Number(_) => None,
        }
    }
}

impl From<f64> for FeatureValue {
    fn from(v: f64) -> Self {
        FeatureValue::Number(v)
    }
}

impl From<&str> for FeatureValue {
    fn from(v: &str) -> Self {
        FeatureValue::Category(v.to_string())
    }
}

impl From<String> for FeatureValue {
    fn from(v: String) -> Self {
        FeatureValue::Category(v)
    }
}

impl From<bool> for FeatureValue {
    fn from(v: bool) -> Self {
        FeatureValue::Category(if v { "true" } else { "false" }.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    rows: Vec<Vec<FeatureValue>>,
    target: Vec<f64>,
    row_ids: Vec<String>,
    vocabulary: Vec<BTreeSet<String>>,
}

impl Dataset {
    pub fn new(
        schema: Schema,
        rows: Vec<Vec<FeatureValue>>,
        target: Vec<f64>,
        row_ids: Vec<String>,
    ) -> Result<Self> {
        if rows.len() != target.len() || rows.len() != row_ids.len() {
            return Err(MlError::LengthMismatch {
                rows: rows.len(),
                targets: target.len(),
                ids: row_ids.len(),
            });
        }
        let mut vocabulary = vec![BTreeSet::new(); schema.len()];
        for ((row, id), y) in rows.iter().zip(&row_ids).zip(&target) {
            if row.len() != schema.len() {
                return Err(MlError::Arity {
                    row_id: id.clone(),
                    expected: schema.len(),
                    found: row.len(),
                });
            }
            if !y.is_finite() {
                return Err(MlError::NonFiniteTarget { row_id: id.clone() });
            }
            for ((spec, value), vocab) in schema.0.iter().zip(row).zip(vocabulary.iter_mut()) {
                match (spec.kind, value) {
                    (FeatureKind::Categorical, FeatureValue::Category(level)) => {
                        if !vocab.contains(level) {
                            vocab.insert(level.clone());
                        }
                    }
                    (FeatureKind::Categorical, FeatureValue::Number(_)) => {
                        return Err(MlError::KindMismatch {
                            row_id: id.clone(),
                            feature: spec.name.clone(),
                            expected: "a category string",
                        })
                    }
                    (_, FeatureValue::Number(v)) => {
                        if !v.is_finite() {
                            return Err(MlError::NonFinite {
                                row_id: id.clone(),
                                feature: spec.name.clone(),
                            });
                        }
                    }
                    (_, FeatureValue::Category(_)) => {
                        return Err(MlError::KindMismatch {
                            row_id: id.clone(),
                            feature: spec.name.clone(),
                            expected: "a finite number",
                        })
                    }
                }
            }
        }
        Ok(Self {
            schema,
            rows,
            target,
            row_ids,
            vocabulary,
        })
    }

    pub fn empty(schema: Schema) -> Self {
        let vocabulary = vec![BTreeSet::new(); schema.len()];
        Self {
            schema,
            rows: Vec::new(),
            target: Vec::new(),
            row_ids: Vec::new(),
            vocabulary,
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<FeatureValue>] {
        &self.rows
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Levels observed for column `feature` (empty for numeric columns).
    pub fn vocabulary(&self, feature: usize) -> &BTreeSet<String> {
        &self.vocabulary[feature]
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let rows: Vec<_> = indices.iter().map(|&i| self.rows[i].clone()).collect();
        let target: Vec<_> = indices.iter().map(|&i| self.target[i]).collect();
        let row_ids: Vec<_> = indices.iter().map(|&i| self.row_ids[i].clone()).collect();
        // Subsets of a validated dataset are valid by construction.
        let mut vocabulary = vec![BTreeSet::new(); self.schema.len()];
        for row in &rows {
            for (value, vocab) in row.iter().zip(vocabulary.iter_mut()) {
                if let FeatureValue::Category(level) = value {
                    if !vocab.contains(level) {
                        vocab.insert(level.clone());
                    }
                }
            }
        }
        Dataset {
            schema: self.schema.clone(),
            rows,
            target,
            row_ids,
            vocabulary,
        }
    }

    /// Drop the named columns, keeping everything else in order.
    pub fn without_features(&self, names: &[&str]) -> Dataset {
        let keep: Vec<usize> = (0..self.schema.len())
            .filter(|&i| !names.contains(&self.schema.0[i].name.as_str()))
            .collect();
        let schema = Schema(keep.iter().map(|&i| self.schema.0[i].clone()).collect());
        let rows = self
            .rows
            .iter()
            .map(|r| keep.iter().map(|&i| r[i].clone()).collect())
            .collect();
        let vocabulary = keep.iter().map(|&i| self.vocabulary[i].clone()).collect();
        Dataset {
            schema,
            rows,
            target: self.target.clone(),
            row_ids: self.row_ids.clone(),
            vocabulary,
        }
    }

    /// Share of rows with target 1.
    pub fn prevalence(&self) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        let positives = self.target.iter().filter(|&&y| y == 1.0).count();
        Some(positives as f64 / self.len() as f64)
    }

    /// Ensure every target is 0 or 1.
    pub fn check_binary(&self) -> Result<()> {
        for (y, id) in self.target.iter().zip(&self.row_ids) {
            if *y != 0.0 && *y != 1.0 {
                return Err(MlError::NonBinaryTarget {
                    row_id: id.clone(),
                    value: *y,
                });
            }
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        let header = serde_json::json!({ "schema": self.schema });
        out.push_str(&serde_json::to_string(&header)?);
        out.push('\n');
        for ((row, y), id) in self.rows.iter().zip(&self.target).zip(&self.row_ids) {
            let line = JsonlRow {
                row_id: id.clone(),
                values: row.clone(),
                target: *y,
            };
            out.push_str(&serde_json::to_string(&line)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Dataset> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: JsonlHeader = match lines.next() {
            Some(l) => serde_json::from_str(l)?,
            None => return Err(MlError::EmptyDataset),
        };
        let mut rows = Vec::new();
        let mut target = Vec::new();
        let mut ids = Vec::new();
        for line in lines {
            let r: JsonlRow = serde_json::from_str(line)?;
            rows.push(r.values);
            target.push(r.target);
            ids.push(r.row_id);
        }
        Dataset::new(header.schema, rows, target, ids)
    }
}

#[derive(Serialize, Deserialize)]
struct JsonlHeader {
    schema: Schema,
}

#[derive(Serialize, Deserialize)]
struct JsonlRow {
    row_id: String,
    values: Vec<FeatureValue>,
    target: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Schema {
        Schema::new(vec![
            FeatureSpec::categorical("body_part"),
            FeatureSpec::continuous("distance"),
        ])
    }

    #[test]
    fn rejects_non_finite_continuous_and_names_row() {
        let err = Dataset::new(
            schema(),
            vec![vec!["Head".into(), f64::NAN.into()]],
            vec![0.0],
            vec!["m1:c3".into()],
        )
        .unwrap_err();
        assert!(err.to_string().contains("m1:c3"), "{err}");
    }

    #[test]
    fn rejects_wrong_arity_and_kind() {
        assert!(matches!(
            Dataset::new(
                schema(),
                vec![vec!["Head".into()]],
                vec![0.0],
                vec!["a".into()]
            ),
            Err(MlError::Arity { .. })
        ));
        assert!(matches!(
            Dataset::new(
                schema(),
                vec![vec![1.0.into(), 2.0.into()]],
                vec![0.0],
                vec!["a".into()]
            ),
            Err(MlError::KindMismatch { .. })
        ));
    }

    #[test]
    fn builds_vocabulary_and_prevalence() {
        let d = Dataset::new(
            schema(),
            vec![
                vec!["Head".into(), 3.0.into()],
                vec!["Right Foot".into(), 9.0.into()],
                vec!["Head".into(), 1.0.into()],
                vec!["Left Foot".into(), 20.0.into()],
            ],
            vec![1.0, 0.0, 0.0, 0.0],
            (0..4).map(|i| i.to_string()).collect(),
        )
        .unwrap();
        assert_eq!(d.vocabulary(0).len(), 3);
        assert!(d.vocabulary(1).is_empty());
        assert_eq!(d.prevalence(), Some(0.25));
        let back = Dataset::from_jsonl(&d.to_jsonl().unwrap()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn fingerprint_depends_on_names_and_kinds() {
        let a = schema().fingerprint();
        let mut other = schema();
        other.0[1].kind = FeatureKind::Discrete;
        assert_ne!(a, other.fingerprint());
        assert_eq!(a, schema().fingerprint());
    }
}
