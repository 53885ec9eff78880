//! Normalized in-match events.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::BallState;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum EventKind {
    Pass,
    Carry,
    Dribble,
    Shot,
    Interception,
    Clearance,
    Duel,
    BallReceipt,
    Other(String),
}

impl EventKind {
    pub fn from_name(name: &str) -> Self {
        match name {
            "Pass" => EventKind::Pass,
            "Carry" => EventKind::Carry,
            "Dribble" => EventKind::Dribble,
            "Shot" => EventKind::Shot,
            "Interception" => EventKind::Interception,
            "Clearance" => EventKind::Clearance,
            "Duel" => EventKind::Duel,
            "Ball Receipt*" | "Ball Receipt" => EventKind::BallReceipt,
            other => EventKind::Other(other.to_string()),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            EventKind::Pass => "Pass",
            EventKind::Carry => "Carry",
            EventKind::Dribble => "Dribble",
            EventKind::Shot => "Shot",
            EventKind::Interception => "Interception",
            EventKind::Clearance => "Clearance",
            EventKind::Duel => "Duel",
            EventKind::BallReceipt => "Ball Receipt",
            EventKind::Other(s) => s,
        }
    }

    /// Kinds that move the ball and count as chain actions.
    pub fn is_on_ball(&self) -> bool {
        matches!(
            self,
            EventKind::Pass | EventKind::Carry | EventKind::Dribble | EventKind::Shot
        )
    }
}

impl From<String> for EventKind {
    fn from(s: String) -> Self {
        EventKind::from_name(&s)
    }
}

impl From<EventKind> for String {
    fn from(k: EventKind) -> Self {
        k.name().to_string()
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotDetail {
    pub technique: String,
    pub body_part: String,
    pub shot_type: String,
    pub is_goal: bool,
}

/// Duel outcomes that leave the ball with the dueling player's team.
pub const WON_DUEL_OUTCOMES: [&str; 4] = ["Won", "Success", "Success In Play", "Success Out"];

/// Penalty shoot-out period.
pub const SHOOTOUT_PERIOD: u8 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub match_id: u64,
    pub event_index: usize,
    pub period: u8,
    pub team_id: u64,
    pub team_name: String,
    pub player_id: Option<u64>,
    pub player_name: Option<String>,
    /// Position as recorded on the event itself.
    pub position: Option<String>,
    pub event_type: EventKind,
    pub location: Option<BallState>,
    /// Seconds from the start of the period.
    pub timestamp: f64,
    pub duration: f64,
    pub under_pressure: bool,
    pub play_pattern: String,
    pub possession_id: u32,
    pub outcome: Option<String>,
    pub shot_detail: Option<ShotDetail>,
}

impl Event {
    pub fn is_won_duel(&self) -> bool {
        self.event_type == EventKind::Duel
            && self
                .outcome
                .as_deref()
                .is_some_and(|o| WON_DUEL_OUTCOMES.contains(&o))
    }

    /// Whether this event, performed by the other side, ends a team's chain.
    pub fn breaks_opponent_chain(&self) -> bool {
        match self.event_type {
            EventKind::Interception | EventKind::Clearance => true,
            EventKind::Duel => self.is_won_duel(),
            ref k => k.is_on_ball(),
        }
    }
}
