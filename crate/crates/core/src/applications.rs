//! Symbolic 4-3-3 team and per-player value reports.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use chainvalue_ml::ModelArtifact;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::linking::normalize_name;
use crate::roster::{PositionGroup, RosterEntry};
use crate::transfer::{predict_fee_change, TransferDataset};
use crate::valuation::PlayerScore;

pub const DEFAULT_MIN_GAMES: u32 = 3;

/// Outfield slots only; keepers are not scored.
pub const FORMATION: [(PositionGroup, usize); 3] = [
    (PositionGroup::Defender, 4),
    (PositionGroup::Midfielder, 3),
    (PositionGroup::Striker, 3),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamMember {
    pub player_id: u64,
    pub name: String,
    pub team: String,
    pub position_group: PositionGroup,
    pub normalized_score: f64,
    pub games: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolicTeam {
    pub formation: String,
    pub min_games: u32,
    pub members: Vec<TeamMember>,
}

fn rank(a: &TeamMember, b: &TeamMember) -> Ordering {
    b.normalized_score
        .total_cmp(&a.normalized_score)
        .then(b.games.cmp(&a.games))
        .then_with(|| a.name.cmp(&b.name))
        .then(a.player_id.cmp(&b.player_id))
}

/// Top players per group by normalized score; ties go to more games, then
/// to the alphabetically first name. With an allowlist, only players of
/// those teams are eligible.
pub fn select_symbolic_team(
    scores: &[PlayerScore],
    roster: &BTreeMap<u64, RosterEntry>,
    min_games: u32,
    allowed_teams: Option<&BTreeSet<String>>,
) -> Result<SymbolicTeam> {
    let eligible: Vec<TeamMember> = scores
        .iter()
        .filter(|s| s.games_played >= min_games)
        .filter_map(|s| {
            let e = roster.get(&s.player_id)?;
            if allowed_teams.is_some_and(|t| !t.contains(&e.team)) {
                return None;
            }
            Some(TeamMember {
                player_id: s.player_id,
                name: e.display_name().to_string(),
                team: e.team.clone(),
                position_group: e.position_group?,
                normalized_score: s.normalized,
                games: s.games_played,
            })
        })
        .collect();

    let mut members = Vec::with_capacity(10);
    for (group, needed) in FORMATION {
        let mut pool: Vec<&TeamMember> = eligible
            .iter()
            .filter(|m| m.position_group == group)
            .collect();
        if pool.len() < needed {
            return Err(CoreError::InsufficientPlayers {
                group: format!("{group}s"),
                needed,
                found: pool.len(),
            });
        }
        pool.sort_by(|a, b| rank(a, b));
        members.extend(pool.into_iter().take(needed).cloned());
    }
    Ok(SymbolicTeam {
        formation: "4-3-3".into(),
        min_games,
        members,
    })
}

impl SymbolicTeam {
    pub fn to_markdown(&self) -> String {
        let mut s = format!(
            "# Symbolic team ({}, at least {} games)\n\n| Group | Player | Team | Games | Score |\n|---|---|---|---:|---:|\n",
            self.formation, self.min_games
        );
        for m in &self.members {
            s.push_str(&format!(
                "| {} | {} | {} | {} | {:.4} |\n",
                m.position_group, m.name, m.team, m.games, m.normalized_score
            ));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    Ok,
    NotInRoster,
    Unscored,
    /// No market-value link, or no valuation pair around the window.
    Unlinked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerReportRow {
    pub query: String,
    pub player_id: Option<u64>,
    pub name: String,
    pub team: String,
    pub position: String,
    pub score: Option<f64>,
    pub predicted_change: Option<f64>,
    pub realized_change: Option<f64>,
    pub status: ReportStatus,
}

/// Finds a roster player by id, or by normalized full name or nickname.
pub fn resolve_player<'a>(
    query: &str,
    roster: &'a BTreeMap<u64, RosterEntry>,
) -> Option<&'a RosterEntry> {
    if let Ok(id) = query.trim().parse::<u64>() {
        return roster.get(&id);
    }
    let q = normalize_name(query);
    roster.values().find(|e| {
        normalize_name(&e.name) == q
            || e.nickname
                .as_deref()
                .is_some_and(|n| normalize_name(n) == q)
    })
}

pub fn player_report(
    queries: &[String],
    roster: &BTreeMap<u64, RosterEntry>,
    scores: &[PlayerScore],
    model: &ModelArtifact,
    transfers: &TransferDataset,
) -> Result<Vec<PlayerReportRow>> {
    let by_id: BTreeMap<u64, &PlayerScore> = scores.iter().map(|s| (s.player_id, s)).collect();
    let mut out = Vec::with_capacity(queries.len());
    for q in queries {
        let Some(e) = resolve_player(q, roster) else {
            out.push(PlayerReportRow {
                query: q.clone(),
                player_id: None,
                name: q.clone(),
                team: String::new(),
                position: String::new(),
                score: None,
                predicted_change: None,
                realized_change: None,
                status: ReportStatus::NotInRoster,
            });
            continue;
        };
        let score = by_id.get(&e.player_id).map(|s| s.normalized);
        let row = transfers.row(e.player_id);
        let predicted = row.map(|r| predict_fee_change(model, r)).transpose()?;
        let status = match (score, row) {
            (None, _) => ReportStatus::Unscored,
            (Some(_), None) => ReportStatus::Unlinked,
            (Some(_), Some(_)) => ReportStatus::Ok,
        };
        out.push(PlayerReportRow {
            query: q.clone(),
            player_id: Some(e.player_id),
            name: e.display_name().to_string(),
            team: e.team.clone(),
            position: e.position.clone().unwrap_or_default(),
            score,
            predicted_change: predicted,
            realized_change: row.map(|r| r.target),
            status,
        });
    }
    Ok(out)
}

/// CSV with an explicit marker in place of missing numbers.
pub fn player_report_csv(rows: &[PlayerReportRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "name",
        "team",
        "position",
        "score",
        "predicted_change_meur",
        "realized_change_meur",
        "status",
    ])
    .expect("in-memory csv");
    let num = |v: Option<f64>, status: ReportStatus| match (v, status) {
        (Some(v), _) => format!("{v:.2}"),
        (None, ReportStatus::Ok) => String::new(),
        (None, s) => serde_json::to_value(s)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default(),
    };
    for r in rows {
        let status = serde_json::to_value(r.status)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        w.write_record([
            r.name.clone(),
            r.team.clone(),
            r.position.clone(),
            num(r.score, r.status),
            num(r.predicted_change, r.status),
            num(r.realized_change, r.status),
            status,
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}
