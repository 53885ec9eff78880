//! Possession-chain player valuation for football event data.
//!
//! Reads StatsBomb-layout event files and a market-value corpus, cuts
//! matches into shot-ending possession chains, credits each action with the
//! change in scoring probability it caused, and relates the resulting player
//! scores to market-value changes.

pub mod applications;
pub mod chains;
pub mod error;
pub mod event;
pub mod geometry;
pub mod ingest;
pub mod jsonl;
pub mod linking;
pub mod market;
pub mod roster;
pub mod scorer;
pub mod transfer;
pub mod valuation;
pub mod xg;

pub use chains::{
    extract_chains, label_chain, reference_chains, Action, ChainExtraction, PossessionChain,
};
pub use error::{CoreError, Result};
pub use event::{Event, EventKind, ShotDetail};
pub use geometry::{
    goal_distance, shooting_angle, zone_of, BallState, DistanceFormula, PitchSpec, Zone,
};
pub use roster::{PositionGroup, RosterEntry};
pub use valuation::{ActionCredit, PlayerScore, RoleWeightTable};
