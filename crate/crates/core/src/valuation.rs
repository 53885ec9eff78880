//! Per-action credits from scoring-probability changes, and per-player totals.

use std::collections::{BTreeMap, BTreeSet};

use chainvalue_ml::ModelArtifact;
use serde::{Deserialize, Serialize};

use crate::chains::PossessionChain;
use crate::error::{CoreError, Result};
use crate::geometry::{zone_of, PitchSpec, Zone};
use crate::roster::PositionGroup;
use crate::scorer::{score_state, ScorerOptions};
use crate::xg::{xg_score, XgOptions};

/// Multipliers on positive credits, indexed by zone
/// (defending, midfield, attacking).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoleWeightTable {
    pub defender: [f64; 3],
    pub midfielder: [f64; 3],
    pub striker: [f64; 3],
}

impl Default for RoleWeightTable {
    fn default() -> Self {
        RoleWeightTable {
            defender: [1.0, 1.5, 2.0],
            midfielder: [1.0, 1.0, 1.5],
            striker: [1.0, 1.0, 1.0],
        }
    }
}

impl RoleWeightTable {
    /// Goalkeepers use the defender row.
    pub fn multiplier(&self, role: PositionGroup, zone: Zone) -> f64 {
        let row = match role {
            PositionGroup::Defender | PositionGroup::Goalkeeper => &self.defender,
            PositionGroup::Midfielder => &self.midfielder,
            PositionGroup::Striker => &self.striker,
        };
        row[zone as usize]
    }
}

pub fn action_delta(p_next: f64, p_curr: f64) -> f64 {
    p_next - p_curr
}

/// Reward `1 − xG` for a goal, penalty `xG` for a miss.
pub fn final_action_credit(xg: f64, scored: bool) -> f64 {
    if scored {
        1.0 - xg
    } else {
        -xg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ValuationOptions {
    pub weights: RoleWeightTable,
    pub pitch: PitchSpec,
    /// Zero the shooter's own delta into the shot when they also made the
    /// preceding action.
    pub suppress_shooter_delta: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionCredit {
    pub match_id: u64,
    pub chain_id: usize,
    pub k: usize,
    pub player_id: u64,
    pub is_final: bool,
    pub raw_delta: f64,
    pub zone: Zone,
    pub multiplier: f64,
    pub weighted_credit: f64,
    pub suppressed: bool,
}

/// Probability trajectory of a chain: the scorer model for actions 1..K−1,
/// then the shot's xG for the final state.
pub fn chain_probabilities(
    chain: &PossessionChain,
    scorer: &ModelArtifact,
    scorer_opts: &ScorerOptions,
    xg: &ModelArtifact,
    xg_opts: &XgOptions,
) -> Result<Vec<f64>> {
    let mut p = Vec::with_capacity(chain.len());
    for pos in 0..chain.len() - 1 {
        p.push(score_state(scorer, chain, pos, scorer_opts)?);
    }
    p.push(xg_score(xg, chain.shot(), xg_opts)?);
    Ok(p)
}

/// Credits for one chain given its probability trajectory (`probs[K−1]` is
/// the shot's xG).
pub fn credit_chain(
    chain: &PossessionChain,
    probs: &[f64],
    roles: &BTreeMap<u64, PositionGroup>,
    opts: &ValuationOptions,
) -> Result<Vec<ActionCredit>> {
    assert_eq!(probs.len(), chain.len(), "one probability per action");
    let missing: BTreeSet<u64> = chain
        .actions
        .iter()
        .map(|a| a.player_id)
        .filter(|id| !roles.contains_key(id))
        .collect();
    if !missing.is_empty() {
        return Err(CoreError::MissingRole(missing.into_iter().collect()));
    }

    let last = chain.len() - 1;
    let shooter = chain.actions[last].player_id;
    let mut credits = Vec::with_capacity(chain.len());
    for (pos, a) in chain.actions.iter().enumerate() {
        let is_final = pos == last;
        let raw = if is_final {
            final_action_credit(probs[last], chain.ends_in_goal)
        } else {
            action_delta(probs[pos + 1], probs[pos])
        };
        let suppressed = opts.suppress_shooter_delta && pos + 1 == last && a.player_id == shooter;
        let zone = zone_of(a.start_state, &opts.pitch)?;
        let multiplier = if raw > 0.0 {
            opts.weights.multiplier(roles[&a.player_id], zone)
        } else {
            1.0
        };
        credits.push(ActionCredit {
            match_id: chain.match_id,
            chain_id: chain.chain_id,
            k: a.k,
            player_id: a.player_id,
            is_final,
            raw_delta: raw,
            zone,
            multiplier,
            weighted_credit: if suppressed { 0.0 } else { raw * multiplier },
            suppressed,
        });
    }
    Ok(credits)
}

pub fn score_chain(
    chain: &PossessionChain,
    scorer: &ModelArtifact,
    scorer_opts: &ScorerOptions,
    xg: &ModelArtifact,
    xg_opts: &XgOptions,
    roles: &BTreeMap<u64, PositionGroup>,
    opts: &ValuationOptions,
) -> Result<Vec<ActionCredit>> {
    let probs = chain_probabilities(chain, scorer, scorer_opts, xg, xg_opts)?;
    credit_chain(chain, &probs, roles, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainContribution {
    pub match_id: u64,
    pub chain_id: usize,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerScore {
    pub player_id: u64,
    pub games_played: u32,
    pub chains_participated: usize,
    pub per_chain: Vec<ChainContribution>,
    pub total: f64,
    pub normalized: f64,
}

/// Sums credits per chain and per player in (player, match, chain, k)
/// order, so the result does not depend on the input order.
pub fn aggregate_scores(
    credits: &[ActionCredit],
    appearances: &BTreeMap<u64, u32>,
) -> Result<Vec<PlayerScore>> {
    let mut sorted: Vec<&ActionCredit> = credits.iter().collect();
    sorted.sort_by_key(|c| (c.player_id, c.match_id, c.chain_id, c.k, c.is_final));

    let missing: BTreeSet<u64> = sorted
        .iter()
        .map(|c| c.player_id)
        .filter(|id| appearances.get(id).is_none_or(|&n| n == 0))
        .collect();
    if !missing.is_empty() {
        return Err(CoreError::MissingAppearances(missing.into_iter().collect()));
    }

    let mut out: Vec<PlayerScore> = Vec::new();
    for c in sorted {
        if out.last().is_none_or(|p| p.player_id != c.player_id) {
            out.push(PlayerScore {
                player_id: c.player_id,
                games_played: appearances[&c.player_id],
                chains_participated: 0,
                per_chain: Vec::new(),
                total: 0.0,
                normalized: 0.0,
            });
        }
        let player = out.last_mut().expect("pushed above");
        match player.per_chain.last_mut() {
            Some(ch) if ch.match_id == c.match_id && ch.chain_id == c.chain_id => {
                ch.total += c.weighted_credit;
            }
            _ => player.per_chain.push(ChainContribution {
                match_id: c.match_id,
                chain_id: c.chain_id,
                total: c.weighted_credit,
            }),
        }
    }
    for p in &mut out {
        p.chains_participated = p.per_chain.len();
        p.total = p.per_chain.iter().map(|c| c.total).sum();
        p.normalized = p.total / f64::from(p.games_played);
    }
    Ok(out)
}
