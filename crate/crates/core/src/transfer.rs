//! Market-value change dataset and fee-change prediction.

use std::collections::BTreeMap;

use chainvalue_ml::{
    Algorithm, Dataset, FeatureImportance, FeatureSpec, FeatureValue, ModelArtifact,
    RegressionReport, Schema,
};
use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::market::{PlayerDirectory, Valuations};
use crate::roster::RosterEntry;
use crate::valuation::PlayerScore;

pub const PLAYER_SCORE_FEATURE: &str = "player_score";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl TransferWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if end < start {
            return Err(CoreError::InvertedWindow { start, end });
        }
        Ok(TransferWindow { start, end })
    }
}

/// Whole calendar months from `from` to `to`, rounded down.
pub fn whole_months(from: NaiveDate, to: NaiveDate) -> i64 {
    let months =
        i64::from(to.year() - from.year()) * 12 + i64::from(to.month()) - i64::from(from.month());
    if to.day() < from.day() {
        months - 1
    } else {
        months
    }
}

/// Completed years of age on `on`.
pub fn age_on(birth: NaiveDate, on: NaiveDate) -> Option<u32> {
    on.years_since(birth)
}

pub fn transfer_schema() -> Schema {
    Schema::new(vec![
        FeatureSpec::continuous(PLAYER_SCORE_FEATURE),
        FeatureSpec::categorical("position_group"),
        FeatureSpec::discrete("evaluation_time"),
        FeatureSpec::discrete("time_lag"),
        FeatureSpec::discrete("age"),
        FeatureSpec::discrete("age_squared"),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRow {
    pub player_id: u64,
    pub market_player_id: u64,
    pub name: String,
    pub player_score: f64,
    pub position_group: String,
    pub evaluation_time: u32,
    pub time_lag: i64,
    pub age: u32,
    pub age_squared: u32,
    pub value_before_eur: u64,
    pub value_after_eur: u64,
    pub date_before: NaiveDate,
    pub date_after: NaiveDate,
    /// Millions of euros.
    pub target: f64,
}

impl TransferRow {
    pub fn features(&self) -> Vec<FeatureValue> {
        vec![
            self.player_score.into(),
            self.position_group.as_str().into(),
            f64::from(self.evaluation_time).into(),
            (self.time_lag as f64).into(),
            f64::from(self.age).into(),
            f64::from(self.age_squared).into(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    Unlinked,
    NoValuationBefore,
    NoValuationAfter,
    NoBirthDate,
    NoPositionGroup,
    TimeLagUnderOneMonth,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub player_id: u64,
    pub name: String,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferDataset {
    pub window: TransferWindow,
    pub rows: Vec<TransferRow>,
    pub excluded: Vec<Exclusion>,
}

impl TransferDataset {
    pub fn to_dataset(&self) -> Result<Dataset> {
        Ok(Dataset::new(
            transfer_schema(),
            self.rows.iter().map(TransferRow::features).collect(),
            self.rows.iter().map(|r| r.target).collect(),
            self.rows.iter().map(|r| r.player_id.to_string()).collect(),
        )?)
    }

    pub fn row(&self, player_id: u64) -> Option<&TransferRow> {
        self.rows.iter().find(|r| r.player_id == player_id)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
    }
}

/// One row per scored player with valuations bracketing the window:
/// the latest record on or before its start and the earliest on or after
/// its end.
pub fn build_transfer_dataset(
    scores: &[PlayerScore],
    roster: &BTreeMap<u64, RosterEntry>,
    links: &BTreeMap<u64, u64>,
    valuations: &Valuations,
    directory: &PlayerDirectory,
    window: TransferWindow,
) -> Result<TransferDataset> {
    let window = TransferWindow::new(window.start, window.end)?;
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for s in scores {
        let entry = roster.get(&s.player_id);
        let name = entry
            .map(|e| e.name.clone())
            .unwrap_or_else(|| s.player_id.to_string());
        let mut exclude = |reason| {
            excluded.push(Exclusion {
                player_id: s.player_id,
                name: name.clone(),
                reason,
            })
        };
        let Some(&market_id) = links.get(&s.player_id) else {
            exclude(ExclusionReason::Unlinked);
            continue;
        };
        let meta = directory.players.get(&market_id);
        let Some(group) = entry
            .and_then(|e| e.position_group)
            .or_else(|| meta.and_then(|m| m.position_group))
        else {
            exclude(ExclusionReason::NoPositionGroup);
            continue;
        };
        let Some(before) = valuations.latest_on_or_before(market_id, window.start) else {
            exclude(ExclusionReason::NoValuationBefore);
            continue;
        };
        let Some(after) = valuations.earliest_on_or_after(market_id, window.end) else {
            exclude(ExclusionReason::NoValuationAfter);
            continue;
        };
        let Some(age) = meta
            .and_then(|m| m.birth_date)
            .and_then(|b| age_on(b, window.end))
        else {
            exclude(ExclusionReason::NoBirthDate);
            continue;
        };
        let time_lag = whole_months(before.date, after.date);
        if time_lag < 1 {
            exclude(ExclusionReason::TimeLagUnderOneMonth);
            continue;
        }
        rows.push(TransferRow {
            player_id: s.player_id,
            market_player_id: market_id,
            name: name.clone(),
            player_score: s.normalized,
            position_group: group.name().to_string(),
            evaluation_time: s.games_played,
            time_lag,
            age,
            age_squared: age * age,
            value_before_eur: before.market_value_eur,
            value_after_eur: after.market_value_eur,
            date_before: before.date,
            date_after: after.date,
            target: (after.market_value_eur as f64 - before.market_value_eur as f64) / 1e6,
        });
    }
    Ok(TransferDataset {
        window,
        rows,
        excluded,
    })
}

/// Predicted value change in millions of euros.
pub fn predict_fee_change(model: &ModelArtifact, row: &TransferRow) -> Result<f64> {
    model.check_schema(&transfer_schema())?;
    Ok(model.predict_rows(&[row.features()]).values[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub min: f64,
    pub max: f64,
    pub range: f64,
    pub absolute_sum: f64,
}

pub fn summarize_target(target: &[f64]) -> Option<TargetSummary> {
    let min = target.iter().copied().reduce(f64::min)?;
    let max = target.iter().copied().reduce(f64::max)?;
    Some(TargetSummary {
        min,
        max,
        range: max - min,
        absolute_sum: target.iter().map(|v| v.abs()).sum(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferModelReport {
    pub algorithm: Algorithm,
    pub rmse: f64,
    pub mae: f64,
    pub feature_importances: Vec<FeatureImportance>,
    pub player_score_rank: Option<usize>,
    pub test_target: Option<TargetSummary>,
    /// MAE over the absolute test-target sum.
    pub mae_to_absolute_sum: Option<f64>,
}

impl TransferModelReport {
    pub fn new(algorithm: Algorithm, report: &RegressionReport, test_target: &[f64]) -> Self {
        let summary = summarize_target(test_target);
        TransferModelReport {
            algorithm,
            rmse: report.rmse,
            mae: report.mae,
            feature_importances: report.feature_importances.clone(),
            player_score_rank: report.rank_of(PLAYER_SCORE_FEATURE),
            mae_to_absolute_sum: summary
                .as_ref()
                .filter(|s| s.absolute_sum > 0.0)
                .map(|s| report.mae / s.absolute_sum),
            test_target: summary,
        }
    }
}
