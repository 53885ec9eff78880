//! StatsBomb open-data reader: `matches/{competition}/{season}.json`,
//! `events/{match}.json` and `lineups/{match}.json`.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::event::{Event, EventKind, ShotDetail};
use crate::geometry::BallState;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeamRef {
    pub id: u64,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchInfo {
    pub match_id: u64,
    pub competition_id: u32,
    pub season_id: u32,
    pub match_date: NaiveDate,
    pub stage: String,
    pub home_team: TeamRef,
    pub away_team: TeamRef,
    pub home_score: Option<u32>,
    pub away_score: Option<u32>,
}

#[derive(Deserialize)]
struct Named {
    name: String,
}

#[derive(Deserialize)]
struct IdName {
    id: u64,
    name: String,
}

#[derive(Deserialize)]
struct RawMatch {
    match_id: u64,
    match_date: NaiveDate,
    #[serde(default)]
    competition_stage: Option<Named>,
    home_team: RawHome,
    away_team: RawAway,
    #[serde(default)]
    home_score: Option<u32>,
    #[serde(default)]
    away_score: Option<u32>,
}

#[derive(Deserialize)]
struct RawHome {
    home_team_id: u64,
    home_team_name: String,
}

#[derive(Deserialize)]
struct RawAway {
    away_team_id: u64,
    away_team_name: String,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CoreError::io(path, e))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| CoreError::json(path, text, &e))
}

/// Matches of the selected (competition, season) pairs, ascending by id.
pub fn load_matches(data_root: &Path, filter: &[(u32, u32)]) -> Result<Vec<MatchInfo>> {
    let matches_dir = data_root.join("matches");
    fs::metadata(&matches_dir).map_err(|e| CoreError::io(&matches_dir, e))?;
    let mut out = Vec::new();
    for &(competition_id, season_id) in filter {
        let path = matches_dir
            .join(competition_id.to_string())
            .join(format!("{season_id}.json"));
        if !path.is_file() {
            return Err(CoreError::CompetitionNotFound { path });
        }
        let text = read(&path)?;
        let raw: Vec<RawMatch> = parse_json(&path, &text)?;
        out.extend(raw.into_iter().map(|m| MatchInfo {
            match_id: m.match_id,
            competition_id,
            season_id,
            match_date: m.match_date,
            stage: m.competition_stage.map(|s| s.name).unwrap_or_default(),
            home_team: TeamRef {
                id: m.home_team.home_team_id,
                name: m.home_team.home_team_name,
            },
            away_team: TeamRef {
                id: m.away_team.away_team_id,
                name: m.away_team.away_team_name,
            },
            home_score: m.home_score,
            away_score: m.away_score,
        }));
    }
    out.sort_by_key(|m| m.match_id);
    out.dedup_by_key(|m| m.match_id);
    Ok(out)
}

#[derive(Deserialize)]
struct RawEvent {
    period: u8,
    timestamp: String,
    #[serde(rename = "type")]
    kind: Named,
    possession: u32,
    team: IdName,
    #[serde(default)]
    player: Option<IdName>,
    #[serde(default)]
    position: Option<Named>,
    #[serde(default)]
    location: Option<Vec<f64>>,
    #[serde(default)]
    duration: Option<f64>,
    #[serde(default)]
    under_pressure: Option<bool>,
    play_pattern: Named,
    #[serde(default)]
    shot: Option<RawShot>,
    #[serde(default)]
    pass: Option<RawDetail>,
    #[serde(default)]
    duel: Option<RawDetail>,
    #[serde(default)]
    dribble: Option<RawDetail>,
    #[serde(default)]
    interception: Option<RawDetail>,
    #[serde(default)]
    tactics: Option<RawTactics>,
}

#[derive(Deserialize)]
struct RawDetail {
    #[serde(default)]
    outcome: Option<Named>,
}

#[derive(Deserialize)]
struct RawShot {
    #[serde(default)]
    outcome: Option<Named>,
    #[serde(default)]
    technique: Option<Named>,
    #[serde(default)]
    body_part: Option<Named>,
    #[serde(default, rename = "type")]
    kind: Option<Named>,
}

#[derive(Deserialize)]
struct RawTactics {
    #[serde(default)]
    lineup: Vec<RawTacticsEntry>,
}

#[derive(Deserialize)]
struct RawTacticsEntry {
    player: IdName,
    position: Named,
}

/// A player named in a team's "Starting XI" event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Starter {
    pub team_id: u64,
    pub team_name: String,
    pub player_id: u64,
    pub player_name: String,
    pub position: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedRecord {
    pub match_id: u64,
    /// Position of the record in the file.
    pub record: usize,
    pub source_index: Option<u64>,
    pub kind: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchEvents {
    pub match_id: u64,
    pub events: Vec<Event>,
    pub starting_xi: Vec<Starter>,
    pub skipped: Vec<SkippedRecord>,
    /// Shot records in the raw file, whether parsed or skipped.
    pub raw_shot_rows: usize,
}

impl MatchEvents {
    pub fn parsed_shots(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.event_type == EventKind::Shot)
            .count()
    }

    pub fn skipped_shots(&self) -> usize {
        self.skipped
            .iter()
            .filter(|s| s.kind.as_deref() == Some("Shot"))
            .count()
    }
}

/// "HH:MM:SS.mmm" to seconds.
pub fn parse_timestamp(s: &str) -> Option<f64> {
    let mut parts = s.split(':');
    let h: f64 = parts.next()?.parse().ok()?;
    let m: f64 = parts.next()?.parse().ok()?;
    let sec: f64 = parts.next()?.parse().ok()?;
    if parts.next().is_some() || h < 0.0 || m < 0.0 || sec < 0.0 {
        return None;
    }
    Some(h * 3600.0 + m * 60.0 + sec)
}

pub fn events_path(data_root: &Path, match_id: u64) -> PathBuf {
    data_root.join("events").join(format!("{match_id}.json"))
}

pub fn lineups_path(data_root: &Path, match_id: u64) -> PathBuf {
    data_root.join("lineups").join(format!("{match_id}.json"))
}

pub fn load_events(data_root: &Path, match_id: u64) -> Result<MatchEvents> {
    let path = events_path(data_root, match_id);
    let text = read(&path)?;
    parse_events(&path, &text, match_id)
}

/// Parses one events file. Malformed records are skipped and reported; a
/// syntax error anywhere fails the whole file.
pub fn parse_events(path: &Path, text: &str, match_id: u64) -> Result<MatchEvents> {
    let records: Vec<serde_json::Value> = parse_json(path, text)?;
    let mut out = MatchEvents {
        match_id,
        events: Vec::with_capacity(records.len()),
        starting_xi: Vec::new(),
        skipped: Vec::new(),
        raw_shot_rows: 0,
    };
    for (record, value) in records.into_iter().enumerate() {
        let kind_name = value
            .pointer("/type/name")
            .and_then(|v| v.as_str())
            .map(str::to_string);
        let source_index = value.get("index").and_then(|v| v.as_u64());
        if kind_name.as_deref() == Some("Shot") {
            out.raw_shot_rows += 1;
        }
        let skip = |reason: String| SkippedRecord {
            match_id,
            record,
            source_index,
            kind: kind_name.clone(),
            reason,
        };
        let raw: RawEvent = match RawEvent::deserialize(value) {
            Ok(r) => r,
            Err(e) => {
                out.skipped.push(skip(e.to_string()));
                continue;
            }
        };
        match normalize(raw, match_id, out.events.len()) {
            Ok((event, starters)) => {
                out.starting_xi.extend(starters);
                out.events.push(event);
            }
            Err(reason) => out.skipped.push(skip(reason)),
        }
    }
    Ok(out)
}

fn normalize(
    raw: RawEvent,
    match_id: u64,
    event_index: usize,
) -> std::result::Result<(Event, Vec<Starter>), String> {
    let event_type = EventKind::from_name(&raw.kind.name);
    let timestamp = parse_timestamp(&raw.timestamp)
        .ok_or_else(|| format!("bad timestamp {:?}", raw.timestamp))?;
    let location = match raw.location.as_deref() {
        None => None,
        Some([x, y, ..]) => {
            let s = BallState { x: *x, y: *y };
            if !s.in_bounds() {
                return Err(format!("location ({x}, {y}) out of bounds"));
            }
            Some(s)
        }
        Some(_) => return Err("location needs two coordinates".into()),
    };
    let duration = raw.duration.unwrap_or(0.0);
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(format!("bad duration {duration}"));
    }
    if event_type.is_on_ball() && raw.player.is_none() {
        return Err("on-ball event without player".into());
    }

    let detail_outcome = |d: Option<RawDetail>| d.and_then(|d| d.outcome).map(|o| o.name);
    let mut shot_detail = None;
    let outcome = match event_type {
        EventKind::Pass => detail_outcome(raw.pass),
        EventKind::Duel => detail_outcome(raw.duel),
        EventKind::Dribble => detail_outcome(raw.dribble),
        EventKind::Interception => detail_outcome(raw.interception),
        EventKind::Shot => {
            let shot = raw.shot.ok_or("shot without shot detail")?;
            let field = |v: Option<Named>, what: &str| {
                v.map(|n| n.name)
                    .filter(|n| !n.is_empty())
                    .ok_or_else(|| format!("shot missing {what}"))
            };
            let outcome = shot.outcome.map(|o| o.name);
            shot_detail = Some(ShotDetail {
                technique: field(shot.technique, "technique")?,
                body_part: field(shot.body_part, "body_part")?,
                shot_type: field(shot.kind, "type")?,
                is_goal: outcome.as_deref() == Some("Goal"),
            });
            outcome
        }
        _ => None,
    };

    let starters = match (&event_type, raw.tactics) {
        (EventKind::Other(k), Some(t)) if k == "Starting XI" => t
            .lineup
            .into_iter()
            .map(|e| Starter {
                team_id: raw.team.id,
                team_name: raw.team.name.clone(),
                player_id: e.player.id,
                player_name: e.player.name,
                position: e.position.name,
            })
            .collect(),
        _ => Vec::new(),
    };

    let (player_id, player_name) = match raw.player {
        Some(p) => (Some(p.id), Some(p.name)),
        None => (None, None),
    };
    Ok((
        Event {
            match_id,
            event_index,
            period: raw.period,
            team_id: raw.team.id,
            team_name: raw.team.name,
            player_id,
            player_name,
            position: raw.position.map(|p| p.name),
            event_type,
            location,
            timestamp,
            duration,
            under_pressure: raw.under_pressure.unwrap_or(false),
            play_pattern: raw.play_pattern.name,
            possession_id: raw.possession,
            outcome,
            shot_detail,
        },
        starters,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionSpell {
    pub position: String,
    pub start_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineupPlayer {
    pub player_id: u64,
    pub name: String,
    pub nickname: Option<String>,
    pub country: Option<String>,
    /// `None` for older files that carry no position history.
    pub positions: Option<Vec<PositionSpell>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeamLineup {
    pub team_id: u64,
    pub team_name: String,
    pub players: Vec<LineupPlayer>,
}

#[derive(Deserialize)]
struct RawLineup {
    team_id: u64,
    team_name: String,
    lineup: Vec<RawLineupPlayer>,
}

#[derive(Deserialize)]
struct RawLineupPlayer {
    player_id: u64,
    player_name: String,
    #[serde(default)]
    player_nickname: Option<String>,
    #[serde(default)]
    country: Option<Named>,
    #[serde(default)]
    positions: Option<Vec<RawSpell>>,
}

#[derive(Deserialize)]
struct RawSpell {
    position: String,
    #[serde(default)]
    start_reason: Option<String>,
}

pub fn load_lineups(data_root: &Path, match_id: u64) -> Result<Vec<TeamLineup>> {
    let path = lineups_path(data_root, match_id);
    let text = read(&path)?;
    let raw: Vec<RawLineup> = parse_json(&path, &text)?;
    Ok(raw
        .into_iter()
        .map(|t| TeamLineup {
            team_id: t.team_id,
            team_name: t.team_name,
            players: t
                .lineup
                .into_iter()
                .map(|p| LineupPlayer {
                    player_id: p.player_id,
                    name: p.player_name,
                    nickname: p.player_nickname.filter(|n| !n.is_empty()),
                    country: p.country.map(|c| c.name),
                    positions: p.positions.map(|v| {
                        v.into_iter()
                            .map(|s| PositionSpell {
                                position: s.position,
                                start_reason: s.start_reason,
                            })
                            .collect()
                    }),
                })
                .collect(),
        })
        .collect())
}
