//! Pitch geometry on the 120x80 event-data frame, attacking toward x = 120.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

pub const PITCH_LENGTH: f64 = 120.0;
pub const PITCH_WIDTH: f64 = 80.0;

/// Offset used when a state sits exactly on the goal line.
pub const GOAL_LINE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallState {
    pub x: f64,
    pub y: f64,
}

impl BallState {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let s = BallState { x, y };
        s.check()?;
        Ok(s)
    }

    pub fn in_bounds(&self) -> bool {
        (0.0..=PITCH_LENGTH).contains(&self.x) && (0.0..=PITCH_WIDTH).contains(&self.y)
    }

    fn check(&self) -> Result<()> {
        if self.in_bounds() {
            Ok(())
        } else {
            Err(CoreError::OutOfBounds {
                x: self.x,
                y: self.y,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchSpec {
    /// Distance between the posts.
    pub goal_width: f64,
    /// Zone boundaries along x.
    pub zone_bounds: [f64; 2],
}

impl Default for PitchSpec {
    fn default() -> Self {
        PitchSpec {
            goal_width: 8.0,
            zone_bounds: [40.0, 80.0],
        }
    }
}

impl PitchSpec {
    fn goal_center(&self) -> f64 {
        PITCH_WIDTH / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    Defending,
    Midfield,
    Attacking,
}

impl Zone {
    pub const ALL: [Zone; 3] = [Zone::Defending, Zone::Midfield, Zone::Attacking];
}

/// Half-open bands: a state on a boundary belongs to the zone ahead of it.
pub fn zone_of(state: BallState, spec: &PitchSpec) -> Result<Zone> {
    state.check()?;
    Ok(if state.x < spec.zone_bounds[0] {
        Zone::Defending
    } else if state.x < spec.zone_bounds[1] {
        Zone::Midfield
    } else {
        Zone::Attacking
    })
}

/// Angle subtended by the two posts, in radians.
pub fn shooting_angle(state: BallState, spec: &PitchSpec) -> Result<f64> {
    state.check()?;
    let x = state.x.min(PITCH_LENGTH - GOAL_LINE_EPSILON);
    let depth = PITCH_LENGTH - x;
    let half = spec.goal_width / 2.0;
    let center = spec.goal_center();
    let y = state.y;
    let theta = if y > center {
        ((y - center + half) / depth).atan() - ((y - center - half) / depth).atan()
    } else if y < center {
        ((center + half - y) / depth).atan() - ((center - half - y) / depth).atan()
    } else {
        2.0 * (half / depth).atan()
    };
    Ok(theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceFormula {
    /// Distance to the goal centre (120, 40).
    #[default]
    GoalCenter,
    /// `sqrt(x² + (40 − y)²)`, kept for sensitivity runs.
    Literal,
}

pub fn goal_distance(state: BallState, spec: &PitchSpec) -> Result<f64> {
    distance_with(state, spec, DistanceFormula::GoalCenter)
}

pub fn distance_with(state: BallState, spec: &PitchSpec, formula: DistanceFormula) -> Result<f64> {
    state.check()?;
    let dy = spec.goal_center() - state.y;
    let dx = match formula {
        DistanceFormula::GoalCenter => PITCH_LENGTH - state.x,
        DistanceFormula::Literal => state.x,
    };
    Ok(dx.hypot(dy))
}
