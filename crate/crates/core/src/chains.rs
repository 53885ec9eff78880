//! Possession chains: runs of same-team on-ball actions ending in a shot.
//!
//! A team's run is cut by a change of period or possession, by a breaking
//! event from the other side (interception, clearance, won duel, or any
//! on-ball action), by the team's own earlier shot, and by an on-ball action
//! without a location. Ball receipts and other same-team events are skipped.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::event::{Event, EventKind, ShotDetail, SHOOTOUT_PERIOD};
use crate::geometry::BallState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    /// 1-based position in the chain.
    pub k: usize,
    pub event_index: usize,
    pub player_id: u64,
    pub player_name: String,
    pub action_type: EventKind,
    pub start_state: BallState,
    pub end_state: BallState,
    pub period: u8,
    pub timestamp: f64,
    pub duration: f64,
    pub under_pressure: bool,
    pub play_pattern: String,
    pub shot_detail: Option<ShotDetail>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PossessionChain {
    /// Ordinal of the chain within its match.
    pub chain_id: usize,
    pub match_id: u64,
    pub team_id: u64,
    pub team_name: String,
    pub possession_id: u32,
    pub actions: Vec<Action>,
    pub ends_in_goal: bool,
}

impl PossessionChain {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn shot(&self) -> &Action {
        self.actions.last().expect("chains end in a shot")
    }

    pub fn key(&self) -> String {
        format!("{}:{}", self.match_id, self.chain_id)
    }
}

/// 1 if the chain's shot scored. Every action of the chain shares the label.
pub fn label_chain(chain: &PossessionChain) -> u8 {
    u8::from(chain.ends_in_goal)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    MissingLocation,
    MissingDetail,
    Shootout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedShot {
    pub match_id: u64,
    pub event_index: usize,
    pub reason: DropReason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainExtraction {
    pub chains: Vec<PossessionChain>,
    pub dropped: Vec<DroppedShot>,
    pub shot_events: usize,
}

fn drop_reason(shot: &Event) -> Option<DropReason> {
    if shot.period == SHOOTOUT_PERIOD {
        Some(DropReason::Shootout)
    } else if shot.location.is_none() {
        Some(DropReason::MissingLocation)
    } else if shot.shot_detail.is_none() {
        Some(DropReason::MissingDetail)
    } else {
        None
    }
}

fn assemble(
    match_id: u64,
    chain_id: usize,
    events: &[Event],
    indices: &[usize],
) -> PossessionChain {
    let shot = &events[*indices.last().expect("non-empty run")];
    let states: Vec<BallState> = indices
        .iter()
        .map(|&i| events[i].location.expect("actions have locations"))
        .collect();
    let actions = indices
        .iter()
        .enumerate()
        .map(|(pos, &i)| {
            let e = &events[i];
            Action {
                k: pos + 1,
                event_index: e.event_index,
                player_id: e.player_id.expect("on-ball events have players"),
                player_name: e.player_name.clone().unwrap_or_default(),
                action_type: e.event_type.clone(),
                start_state: states[pos],
                end_state: states[(pos + 1).min(states.len() - 1)],
                period: e.period,
                timestamp: e.timestamp,
                duration: e.duration,
                under_pressure: e.under_pressure,
                play_pattern: e.play_pattern.clone(),
                shot_detail: e.shot_detail.clone(),
            }
        })
        .collect();
    PossessionChain {
        chain_id,
        match_id,
        team_id: shot.team_id,
        team_name: shot.team_name.clone(),
        possession_id: shot.possession_id,
        actions,
        ends_in_goal: shot.shot_detail.as_ref().is_some_and(|d| d.is_goal),
    }
}

/// Single forward pass keeping one open run per team.
pub fn extract_chains(match_id: u64, events: &[Event]) -> ChainExtraction {
    let mut out = ChainExtraction::default();
    let mut runs: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    let mut segment: Option<(u8, u32)> = None;

    for (i, e) in events.iter().enumerate() {
        let key = (e.period, e.possession_id);
        if segment != Some(key) {
            runs.clear();
            segment = Some(key);
        }
        if e.breaks_opponent_chain() {
            runs.retain(|&team, _| team == e.team_id);
        }
        match e.event_type {
            EventKind::Shot => {
                out.shot_events += 1;
                let mut run = runs.remove(&e.team_id).unwrap_or_default();
                match drop_reason(e) {
                    Some(reason) => out.dropped.push(DroppedShot {
                        match_id,
                        event_index: e.event_index,
                        reason,
                    }),
                    None => {
                        run.push(i);
                        let id = out.chains.len();
                        out.chains.push(assemble(match_id, id, events, &run));
                    }
                }
            }
            ref k if k.is_on_ball() => {
                let run = runs.entry(e.team_id).or_default();
                if e.location.is_some() {
                    run.push(i);
                } else {
                    run.clear();
                }
            }
            _ => {}
        }
    }
    out
}

/// Reference segmenter: from every shot, walk backwards applying the rules
/// literally. Quadratic; used to check `extract_chains`.
pub fn reference_chains(match_id: u64, events: &[Event]) -> ChainExtraction {
    let mut out = ChainExtraction::default();
    for (i, shot) in events.iter().enumerate() {
        if shot.event_type != EventKind::Shot {
            continue;
        }
        out.shot_events += 1;
        if let Some(reason) = drop_reason(shot) {
            out.dropped.push(DroppedShot {
                match_id,
                event_index: shot.event_index,
                reason,
            });
            continue;
        }
        let mut run = vec![i];
        for j in (0..i).rev() {
            let e = &events[j];
            if e.period != shot.period || e.possession_id != shot.possession_id {
                break;
            }
            if e.team_id != shot.team_id {
                if e.breaks_opponent_chain() {
                    break;
                }
                continue;
            }
            if e.event_type == EventKind::Shot {
                break;
            }
            if e.event_type.is_on_ball() {
                if e.location.is_none() {
                    break;
                }
                run.push(j);
            }
        }
        run.reverse();
        let id = out.chains.len();
        out.chains.push(assemble(match_id, id, events, &run));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(i: usize, team: u64, kind: &str) -> Event {
        Event {
            match_id: 1,
            event_index: i,
            period: 1,
            team_id: team,
            team_name: format!("T{team}"),
            player_id: Some(team * 100 + i as u64),
            player_name: Some(format!("p{i}")),
            position: None,
            event_type: EventKind::from_name(kind),
            location: Some(BallState {
                x: 10.0 * i as f64,
                y: 40.0,
            }),
            timestamp: i as f64,
            duration: 1.0,
            under_pressure: false,
            play_pattern: "Regular Play".into(),
            possession_id: 1,
            outcome: None,
            shot_detail: (kind == "Shot").then(|| ShotDetail {
                technique: "Normal".into(),
                body_part: "Right Foot".into(),
                shot_type: "Open Play".into(),
                is_goal: false,
            }),
        }
    }

    fn both(events: &[Event]) -> ChainExtraction {
        let a = extract_chains(1, events);
        assert_eq!(a, reference_chains(1, events));
        a
    }

    #[test]
    fn no_shots_no_chains() {
        let r = both(&[ev(0, 1, "Pass"), ev(1, 1, "Carry")]);
        assert!(r.chains.is_empty());
    }

    #[test]
    fn straight_run_of_four() {
        let r = both(&[
            ev(0, 1, "Pass"),
            ev(1, 1, "Pass"),
            ev(2, 1, "Carry"),
            ev(3, 1, "Shot"),
        ]);
        assert_eq!(r.chains.len(), 1);
        assert_eq!(r.chains[0].len(), 4);
        let ks: Vec<usize> = r.chains[0].actions.iter().map(|a| a.k).collect();
        assert_eq!(ks, [1, 2, 3, 4]);
        assert_eq!(
            r.chains[0].actions[0].end_state,
            r.chains[0].actions[1].start_state
        );
    }

    #[test]
    fn interception_restarts_the_run() {
        let r = both(&[
            ev(0, 1, "Pass"),
            ev(1, 2, "Interception"),
            ev(2, 1, "Pass"),
            ev(3, 1, "Shot"),
        ]);
        assert_eq!(r.chains[0].len(), 2);
        assert_eq!(r.chains[0].actions[0].event_index, 2);
    }

    #[test]
    fn pressure_and_receipts_do_not_break() {
        let r = both(&[
            ev(0, 1, "Pass"),
            ev(1, 1, "Ball Receipt*"),
            ev(2, 2, "Pressure"),
            ev(3, 1, "Carry"),
            ev(4, 1, "Shot"),
        ]);
        assert_eq!(r.chains[0].len(), 3);
    }

    #[test]
    fn lost_duel_keeps_chain_but_won_duel_breaks() {
        let mut lost = ev(1, 2, "Duel");
        lost.outcome = Some("Lost In Play".into());
        let r = both(&[ev(0, 1, "Pass"), lost, ev(2, 1, "Shot")]);
        assert_eq!(r.chains[0].len(), 2);
        let mut won = ev(1, 2, "Duel");
        won.outcome = Some("Won".into());
        let r = both(&[ev(0, 1, "Pass"), won, ev(2, 1, "Shot")]);
        assert_eq!(r.chains[0].len(), 1);
    }

    #[test]
    fn second_shot_starts_after_the_first() {
        let r = both(&[
            ev(0, 1, "Pass"),
            ev(1, 1, "Shot"),
            ev(2, 1, "Carry"),
            ev(3, 1, "Shot"),
        ]);
        assert_eq!(r.chains.len(), 2);
        assert_eq!(r.chains[1].len(), 2);
        assert_eq!(r.chains[1].chain_id, 1);
    }

    #[test]
    fn possession_and_period_boundaries_cut() {
        let mut later = ev(1, 1, "Shot");
        later.possession_id = 2;
        let r = both(&[ev(0, 1, "Pass"), later]);
        assert_eq!(r.chains[0].len(), 1);
        let mut second_half = ev(1, 1, "Shot");
        second_half.period = 2;
        let r = both(&[ev(0, 1, "Pass"), second_half]);
        assert_eq!(r.chains[0].len(), 1);
    }

    #[test]
    fn shot_without_location_is_dropped_and_counted() {
        let mut s = ev(1, 1, "Shot");
        s.location = None;
        let r = both(&[ev(0, 1, "Pass"), s, ev(2, 1, "Shot")]);
        assert_eq!(r.shot_events, 2);
        assert_eq!(r.dropped.len(), 1);
        assert_eq!(r.chains.len(), r.shot_events - r.dropped.len());
        assert_eq!(r.chains[0].len(), 1);
    }

    #[test]
    fn goal_labels_propagate() {
        let mut s = ev(2, 1, "Shot");
        s.shot_detail.as_mut().unwrap().is_goal = true;
        let r = both(&[ev(0, 1, "Pass"), ev(1, 1, "Pass"), s]);
        assert_eq!(label_chain(&r.chains[0]), 1);
        let r = both(&[ev(0, 1, "Pass"), ev(1, 1, "Shot")]);
        assert_eq!(label_chain(&r.chains[0]), 0);
    }
}
