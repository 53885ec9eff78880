//! Market-value corpus: `player_valuations.csv` and `players.csv`.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::roster::{position_group, PositionGroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuationRecord {
    pub player_id: u64,
    pub date: NaiveDate,
    pub market_value_eur: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Valuations {
    /// Per player, ascending by date with unique dates.
    pub series: BTreeMap<u64, Vec<ValuationRecord>>,
    /// Rows dropped for unparseable cells.
    pub warnings: usize,
}

impl Valuations {
    /// Latest record dated on or before `date`.
    pub fn latest_on_or_before(&self, player_id: u64, date: NaiveDate) -> Option<ValuationRecord> {
        let s = self.series.get(&player_id)?;
        s.iter().rev().find(|r| r.date <= date).copied()
    }

    /// Earliest record dated on or after `date`.
    pub fn earliest_on_or_after(&self, player_id: u64, date: NaiveDate) -> Option<ValuationRecord> {
        let s = self.series.get(&player_id)?;
        s.iter().find(|r| r.date >= date).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerMeta {
    pub player_id: u64,
    pub name: String,
    pub birth_date: Option<NaiveDate>,
    pub position_group: Option<PositionGroup>,
    pub raw_position: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlayerDirectory {
    pub players: BTreeMap<u64, PlayerMeta>,
    pub warnings: usize,
}

/// Accepts `YYYY-MM-DD` with an optional time suffix.
fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s.get(..10)?, "%Y-%m-%d").ok()
}

fn parse_value(s: &str) -> Option<u64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Some(v);
    }
    let v: f64 = s.parse().ok()?;
    (v.is_finite() && v >= 0.0).then(|| v.round() as u64)
}

struct Table {
    reader: csv::Reader<File>,
    columns: BTreeMap<String, usize>,
}

fn open(path: &Path) -> Result<Option<Table>> {
    let file = File::open(path).map_err(|e| CoreError::io(path, e))?;
    let empty = file.metadata().map_err(|e| CoreError::io(path, e))?.len() == 0;
    if empty {
        return Ok(None);
    }
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let headers = reader.headers().map_err(|e| CoreError::Csv {
        path: path.into(),
        message: e.to_string(),
    })?;
    let columns = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim().to_string(), i))
        .collect();
    Ok(Some(Table { reader, columns }))
}

impl Table {
    fn column(&self, path: &Path, names: &[&str]) -> Result<usize> {
        names
            .iter()
            .find_map(|n| self.columns.get(*n).copied())
            .ok_or_else(|| CoreError::Csv {
                path: path.into(),
                message: format!("missing column {}", names[0]),
            })
    }

    fn optional(&self, name: &str) -> Option<usize> {
        self.columns.get(name).copied()
    }
}

pub fn load_valuations(csv_path: &Path) -> Result<Valuations> {
    let Some(mut table) = open(csv_path)? else {
        return Ok(Valuations::default());
    };
    let id_col = table.column(csv_path, &["player_id"])?;
    let date_col = table.column(csv_path, &["date"])?;
    let value_col = table.column(csv_path, &["market_value_in_eur", "market_value_eur"])?;

    let mut by_player: BTreeMap<u64, BTreeMap<NaiveDate, u64>> = BTreeMap::new();
    let mut warnings = 0;
    for row in table.reader.records() {
        let Ok(row) = row else {
            warnings += 1;
            continue;
        };
        let parsed = (|| {
            let id: u64 = row.get(id_col)?.trim().parse().ok()?;
            let date = parse_date(row.get(date_col)?)?;
            let value = parse_value(row.get(value_col)?)?;
            Some((id, date, value))
        })();
        match parsed {
            // Later rows overwrite earlier ones for the same date.
            Some((id, date, value)) => {
                by_player.entry(id).or_default().insert(date, value);
            }
            None => warnings += 1,
        }
    }
    let series = by_player
        .into_iter()
        .map(|(player_id, dates)| {
            let records = dates
                .into_iter()
                .map(|(date, market_value_eur)| ValuationRecord {
                    player_id,
                    date,
                    market_value_eur,
                })
                .collect();
            (player_id, records)
        })
        .collect();
    Ok(Valuations { series, warnings })
}

pub fn load_player_meta(csv_path: &Path) -> Result<PlayerDirectory> {
    let Some(mut table) = open(csv_path)? else {
        return Ok(PlayerDirectory::default());
    };
    let id_col = table.column(csv_path, &["player_id"])?;
    let name_col = table.column(csv_path, &["name"])?;
    let birth_col = table.optional("date_of_birth");
    let sub_col = table.optional("sub_position");
    let pos_col = table.optional("position");

    let mut players = BTreeMap::new();
    let mut warnings = 0;
    for row in table.reader.records() {
        let Ok(row) = row else {
            warnings += 1;
            continue;
        };
        let Some(player_id) = row.get(id_col).and_then(|s| s.trim().parse::<u64>().ok()) else {
            warnings += 1;
            continue;
        };
        let cell = |c: Option<usize>| {
            c.and_then(|c| row.get(c))
                .map(str::trim)
                .filter(|s| !s.is_empty())
        };
        let raw_position = cell(sub_col)
            .or(cell(pos_col))
            .unwrap_or_default()
            .to_string();
        let group =
            position_group(&raw_position).or_else(|| cell(pos_col).and_then(position_group));
        players.insert(
            player_id,
            PlayerMeta {
                player_id,
                name: row.get(name_col).unwrap_or_default().trim().to_string(),
                birth_date: cell(birth_col).and_then(parse_date),
                position_group: group,
                raw_position,
            },
        );
    }
    Ok(PlayerDirectory { players, warnings })
}
