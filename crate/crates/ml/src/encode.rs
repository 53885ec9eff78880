//! Numeric encodings of typed datasets.
//!
//! Logistic regression and the CART/forest learners consume one-hot columns
//! built from the training vocabulary. Gradient boosting consumes ordered
//! target statistics: each training row sees only the targets of rows that
//! precede it in a seeded permutation, which keeps its own label out of its
//! encoding. At inference time the full training statistics are used.
//!
//! Levels never seen in training map to a reserved unknown slot and are
//! counted so callers can surface a warning.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureValue};
use crate::rng;

pub const UNKNOWN_LEVEL: &str = "<unknown>";

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub data: Vec<f64>,
    pub n_rows: usize,
    pub n_cols: usize,
}

impl Matrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            data: vec![0.0; n_rows * n_cols],
            n_rows,
            n_cols,
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnBlock {
    Numeric,
    /// Sorted training levels; the unknown slot follows them.
    OneHot {
        levels: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneHotEncoder {
    pub blocks: Vec<ColumnBlock>,
}

impl OneHotEncoder {
    pub fn fit(d: &Dataset) -> Self {
        let blocks = d
            .schema()
            .features()
            .iter()
            .enumerate()
            .map(|(i, f)| {
                if f.kind.is_numeric() {
                    ColumnBlock::Numeric
                } else {
                    ColumnBlock::OneHot {
                        levels: d.vocabulary(i).iter().cloned().collect(),
                    }
                }
            })
            .collect();
        Self { blocks }
    }

    pub fn n_columns(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match b {
                ColumnBlock::Numeric => 1,
                ColumnBlock::OneHot { levels } => levels.len() + 1,
            })
            .sum()
    }

    /// Source feature index for every encoded column.
    pub fn column_owners(&self) -> Vec<usize> {
        let mut owners = Vec::with_capacity(self.n_columns());
        for (i, b) in self.blocks.iter().enumerate() {
            let width = match b {
                ColumnBlock::Numeric => 1,
                ColumnBlock::OneHot { levels } => levels.len() + 1,
            };
            owners.extend(std::iter::repeat_n(i, width));
        }
        owners
    }

    /// Whether each encoded column carries a raw numeric value.
    pub fn numeric_columns(&self) -> Vec<bool> {
        let mut flags = Vec::with_capacity(self.n_columns());
        for b in &self.blocks {
            match b {
                ColumnBlock::Numeric => flags.push(true),
                ColumnBlock::OneHot { levels } => {
                    flags.extend(std::iter::repeat_n(false, levels.len() + 1))
                }
            }
        }
        flags
    }

    /// Encode `rows`; returns the matrix and the number of unseen levels met.
    pub fn transform(&self, rows: &[Vec<FeatureValue>]) -> (Matrix, usize) {
        let n_cols = self.n_columns();
        let mut m = Matrix::zeros(rows.len(), n_cols);
        let mut unknown = 0;
        let lookups: Vec<Option<HashMap<&str, usize>>> = self
            .blocks
            .iter()
            .map(|b| match b {
                ColumnBlock::Numeric => None,
                ColumnBlock::OneHot { levels } => Some(
                    levels
                        .iter()
                        .enumerate()
                        .map(|(i, l)| (l.as_str(), i))
                        .collect(),
                ),
            })
            .collect();
        for (r, row) in rows.iter().enumerate() {
            let mut col = 0;
            for ((block, lookup), value) in self.blocks.iter().zip(&lookups).zip(row) {
                match (block, lookup) {
                    (ColumnBlock::Numeric, _) => {
                        m.set(r, col, value.as_number().unwrap_or(0.0));
                        col += 1;
                    }
                    (ColumnBlock::OneHot { levels }, Some(lookup)) => {
                        let slot = value
                            .as_category()
                            .and_then(|level| lookup.get(level).copied());
                        match slot {
                            Some(s) => m.set(r, col + s, 1.0),
                            None => {
                                unknown += 1;
                                m.set(r, col + levels.len(), 1.0);
                            }
                        }
                        col += levels.len() + 1;
                    }
                    (ColumnBlock::OneHot { .. }, None) => unreachable!(),
                }
            }
        }
        (m, unknown)
    }
}

/// Running `(sum of targets, count)` for one categorical level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelStat {
    pub sum: f64,
    pub count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetStatEncoder {
    pub prior: f64,
    pub smoothing: f64,
    /// `None` for numeric columns.
    pub stats: Vec<Option<BTreeMap<String, LevelStat>>>,
}

impl TargetStatEncoder {
    pub fn fit(d: &Dataset, smoothing: f64) -> Self {
        let prior = if d.is_empty() {
            0.0
        } else {
            d.target().iter().sum::<f64>() / d.len() as f64
        };
        let stats = d
            .schema()
            .features()
            .iter()
            .enumerate()
            .map(|(j, f)| {
                if f.kind.is_numeric() {
                    return None;
                }
                let mut map: BTreeMap<String, LevelStat> = BTreeMap::new();
                for (row, y) in d.rows().iter().zip(d.target()) {
                    let level = row[j].as_category().unwrap_or_default();
                    let e = map.entry(level.to_string()).or_insert(LevelStat {
                        sum: 0.0,
                        count: 0.0,
                    });
                    e.sum += y;
                    e.count += 1.0;
                }
                Some(map)
            })
            .collect();
        Self {
            prior,
            smoothing,
            stats,
        }
    }

    fn smoothed(&self, sum: f64, count: f64) -> f64 {
        (sum + self.smoothing * self.prior) / (count + self.smoothing)
    }

    /// Ordered target statistics over a seeded permutation of the training rows.
    pub fn encode_training(&self, d: &Dataset, seed: u64) -> Matrix {
        let n_cols = self.stats.len();
        let mut m = Matrix::zeros(d.len(), n_cols);
        let mut order: Vec<usize> = (0..d.len()).collect();
        order.shuffle(&mut rng::stream(seed, "target-statistics"));
        for (j, stat) in self.stats.iter().enumerate() {
            match stat {
                None => {
                    for (i, row) in d.rows().iter().enumerate() {
                        m.set(i, j, row[j].as_number().unwrap_or(0.0));
                    }
                }
                Some(_) => {
                    let mut running: HashMap<&str, (f64, f64)> = HashMap::new();
                    for &i in &order {
                        let level = d.rows()[i][j].as_category().unwrap_or_default();
                        let (sum, count) = running.get(level).copied().unwrap_or((0.0, 0.0));
                        m.set(i, j, self.smoothed(sum, count));
                        running.insert(level, (sum + d.target()[i], count + 1.0));
                    }
                }
            }
        }
        m
    }

    pub fn transform(&self, rows: &[Vec<FeatureValue>]) -> (Matrix, usize) {
        let mut m = Matrix::zeros(rows.len(), self.stats.len());
        let mut unknown = 0;
        for (i, row) in rows.iter().enumerate() {
            for (j, stat) in self.stats.iter().enumerate() {
                let v = match stat {
                    None => row[j].as_number().unwrap_or(0.0),
                    Some(map) => match row[j].as_category().and_then(|l| map.get(l)) {
                        Some(s) => self.smoothed(s.sum, s.count),
                        None => {
                            unknown += 1;
                            self.prior
                        }
                    },
                };
                m.set(i, j, v);
            }
        }
        (m, unknown)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FeatureSpec, Schema};

    fn toy() -> Dataset {
        let schema = Schema::new(vec![
            FeatureSpec::categorical("part"),
            FeatureSpec::continuous("d"),
        ]);
        Dataset::new(
            schema,
            vec![
                vec!["Head".into(), 1.0.into()],
                vec!["Foot".into(), 2.0.into()],
                vec!["Head".into(), 3.0.into()],
                vec!["Foot".into(), 4.0.into()],
            ],
            vec![1.0, 0.0, 1.0, 0.0],
            (0..4).map(|i| i.to_string()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn one_hot_layout_and_unknown_slot() {
        let d = toy();
        let enc = OneHotEncoder::fit(&d);
        assert_eq!(enc.n_columns(), 4); // Foot, Head, <unknown>, d
        assert_eq!(enc.column_owners(), vec![0, 0, 0, 1]);
        let (m, unknown) = enc.transform(&[vec!["Knee".into(), 7.0.into()]]);
        assert_eq!(unknown, 1);
        assert_eq!(m.row(0), &[0.0, 0.0, 1.0, 7.0]);
        let (m, unknown) = enc.transform(&d.rows()[..1]);
        assert_eq!(unknown, 0);
        assert_eq!(m.row(0), &[0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn ordered_statistics_exclude_own_label() {
        let d = toy();
        let enc = TargetStatEncoder::fit(&d, 1.0);
        let m = enc.encode_training(&d, 5);
        // With every row seeing only predecessors, the first occurrence of a
        // level in the permutation equals the prior exactly.
        let firsts: Vec<f64> = (0..4).map(|i| m.get(i, 0)).collect();
        assert!(firsts.contains(&0.5));
        for i in 0..4 {
            assert_eq!(m.get(i, 1), d.rows()[i][1].as_number().unwrap());
        }
        let (full, unknown) = enc.transform(&[
            vec!["Head".into(), 0.0.into()],
            vec!["Hand".into(), 0.0.into()],
        ]);
        assert_eq!(full.get(0, 0), (2.0 + 0.5) / 3.0);
        assert_eq!(full.get(1, 0), 0.5);
        assert_eq!(unknown, 1);
    }
}
