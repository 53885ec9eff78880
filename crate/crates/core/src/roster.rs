//! Tournament roster: positions, position groups and appearances.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ingest::{MatchEvents, TeamLineup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionGroup {
    Defender,
    Midfielder,
    Striker,
    Goalkeeper,
}

impl PositionGroup {
    pub fn name(self) -> &'static str {
        match self {
            PositionGroup::Defender => "defender",
            PositionGroup::Midfielder => "midfielder",
            PositionGroup::Striker => "striker",
            PositionGroup::Goalkeeper => "goalkeeper",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            PositionGroup::Defender,
            PositionGroup::Midfielder,
            PositionGroup::Striker,
            PositionGroup::Goalkeeper,
        ]
        .into_iter()
        .find(|g| g.name() == s)
    }
}

impl fmt::Display for PositionGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fixed mapping from a raw position label, checked in this order:
/// goalkeeper, "Back", "Midfield", then forward/wing/striker words.
/// The bare group names used by market-value data are accepted too.
pub fn position_group(raw: &str) -> Option<PositionGroup> {
    let r = raw.trim();
    if r.contains("Goalkeeper") {
        Some(PositionGroup::Goalkeeper)
    } else if r.contains("Back") || r == "Defender" {
        Some(PositionGroup::Defender)
    } else if r.contains("Midfield") {
        Some(PositionGroup::Midfielder)
    } else if ["Forward", "Wing", "Striker"].iter().any(|w| r.contains(w)) || r == "Attack" {
        Some(PositionGroup::Striker)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub player_id: u64,
    pub name: String,
    pub nickname: Option<String>,
    pub team: String,
    /// Modal starting position over the tournament.
    pub position: Option<String>,
    pub position_group: Option<PositionGroup>,
    /// Matches with at least one appearance.
    pub games: u32,
    pub match_ids: Vec<u64>,
}

impl RosterEntry {
    /// Nickname when the data has one, otherwise the full name.
    pub fn display_name(&self) -> &str {
        self.nickname.as_deref().unwrap_or(&self.name)
    }
}

/// One match worth of roster inputs.
pub struct MatchSheet<'a> {
    pub events: &'a MatchEvents,
    pub lineups: Option<&'a [TeamLineup]>,
}

#[derive(Default)]
struct Tally {
    name: Option<String>,
    nickname: Option<String>,
    team: Option<String>,
    starts: BTreeMap<String, u32>,
    other: BTreeMap<String, u32>,
    matches: BTreeSet<u64>,
}

/// Most frequent label; ties go to the alphabetically first.
fn mode(counts: &BTreeMap<String, u32>) -> Option<String> {
    let mut best: Option<(&String, u32)> = None;
    for (label, &n) in counts {
        if best.is_none_or(|(_, b)| n > b) {
            best = Some((label, n));
        }
    }
    best.map(|(l, _)| l.clone())
}

pub fn build_roster(sheets: &[MatchSheet<'_>]) -> BTreeMap<u64, RosterEntry> {
    let mut tallies: BTreeMap<u64, Tally> = BTreeMap::new();
    for sheet in sheets {
        let match_id = sheet.events.match_id;
        let with_history = sheet.lineups.filter(|l| {
            l.iter()
                .flat_map(|t| &t.players)
                .any(|p| p.positions.is_some())
        });

        if let Some(lineups) = sheet.lineups {
            for team in lineups {
                for p in &team.players {
                    let t = tallies.entry(p.player_id).or_default();
                    t.name.get_or_insert_with(|| p.name.clone());
                    if t.nickname.is_none() {
                        t.nickname = p.nickname.clone();
                    }
                    t.team.get_or_insert_with(|| team.team_name.clone());
                }
            }
        }

        match with_history {
            Some(lineups) => {
                for p in lineups.iter().flat_map(|t| &t.players) {
                    let spells = p.positions.as_deref().unwrap_or_default();
                    if spells.is_empty() {
                        continue;
                    }
                    let t = tallies.entry(p.player_id).or_default();
                    t.matches.insert(match_id);
                    let started = spells[0].start_reason.as_deref() == Some("Starting XI");
                    let bucket = if started { &mut t.starts } else { &mut t.other };
                    *bucket.entry(spells[0].position.clone()).or_default() += 1;
                }
            }
            None => {
                for s in &sheet.events.starting_xi {
                    let t = tallies.entry(s.player_id).or_default();
                    t.name.get_or_insert_with(|| s.player_name.clone());
                    t.team.get_or_insert_with(|| s.team_name.clone());
                    t.matches.insert(match_id);
                    *t.starts.entry(s.position.clone()).or_default() += 1;
                }
                // Substitutes: first recorded position in the match.
                let mut seen = BTreeSet::new();
                for e in &sheet.events.events {
                    let (Some(pid), Some(pos)) = (e.player_id, &e.position) else {
                        continue;
                    };
                    let t = tallies.entry(pid).or_default();
                    if !t.matches.contains(&match_id) && seen.insert(pid) {
                        *t.other.entry(pos.clone()).or_default() += 1;
                    }
                }
            }
        }

        // Anyone who touched the ball appeared.
        for e in &sheet.events.events {
            let Some(pid) = e.player_id else { continue };
            let t = tallies.entry(pid).or_default();
            t.matches.insert(match_id);
            if t.name.is_none() {
                t.name = e.player_name.clone();
            }
            t.team.get_or_insert_with(|| e.team_name.clone());
        }
    }

    tallies
        .into_iter()
        .filter(|(_, t)| !t.matches.is_empty())
        .map(|(player_id, t)| {
            let position = mode(&t.starts).or_else(|| mode(&t.other));
            let entry = RosterEntry {
                player_id,
                name: t.name.unwrap_or_else(|| player_id.to_string()),
                nickname: t.nickname,
                team: t.team.unwrap_or_default(),
                position_group: position.as_deref().and_then(position_group),
                position,
                games: t.matches.len() as u32,
                match_ids: t.matches.into_iter().collect(),
            };
            (player_id, entry)
        })
        .collect()
}

/// Games played per player.
pub fn appearances(roster: &BTreeMap<u64, RosterEntry>) -> BTreeMap<u64, u32> {
    roster.iter().map(|(&id, e)| (id, e.games)).collect()
}

pub fn roles(roster: &BTreeMap<u64, RosterEntry>) -> BTreeMap<u64, PositionGroup> {
    roster
        .iter()
        .filter_map(|(&id, e)| e.position_group.map(|g| (id, g)))
        .collect()
}
