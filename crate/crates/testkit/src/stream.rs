//! Random normalized event streams for segmenter equivalence checks.

use chainvalue_core::event::{Event, EventKind, ShotDetail};
use chainvalue_core::geometry::BallState;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KINDS: [(&str, u32); 14] = [
    ("Pass", 25),
    ("Carry", 20),
    ("Ball Receipt*", 15),
    ("Shot", 8),
    ("Pressure", 8),
    ("Duel", 6),
    ("Interception", 4),
    ("Dribble", 4),
    ("Clearance", 3),
    ("Ball Recovery", 3),
    ("Foul Committed", 2),
    ("Miscontrol", 1),
    ("Block", 1),
    ("Own Goal Against", 1),
];

const DUEL_OUTCOMES: [Option<&str>; 6] = [
    Some("Won"),
    Some("Success In Play"),
    Some("Success Out"),
    Some("Lost In Play"),
    Some("Lost Out"),
    None,
];

/// `n` events from one synthetic match: two teams, irregular possession ids
/// (occasionally revisiting an earlier one), period changes including a
/// shoot-out, and on-ball events that sometimes lack a location.
pub fn random_events(seed: u64, n: usize) -> Vec<Event> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: u32 = KINDS.iter().map(|k| k.1).sum();
    let mut period = 1u8;
    let mut possession = 1u32;
    let mut team = 1u64;
    let mut clock = 0.0;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if rng.gen_bool(0.02) && period < 5 {
            period += 1;
            clock = 0.0;
        }
        if rng.gen_bool(0.08) {
            possession = if rng.gen_bool(0.1) && possession > 2 {
                rng.gen_range(1..possession)
            } else {
                possession + 1
            };
        }
        if rng.gen_bool(0.3) {
            team = 3 - team;
        }
        let mut pick = rng.gen_range(0..total);
        let name = KINDS
            .iter()
            .find(|(_, w)| {
                if pick < *w {
                    true
                } else {
                    pick -= w;
                    false
                }
            })
            .map(|k| k.0)
            .expect("weights cover range");
        let kind = EventKind::from_name(name);
        let location = (!rng.gen_bool(0.04)).then(|| BallState {
            x: rng.gen_range(0.0..=120.0),
            y: rng.gen_range(0.0..=80.0),
        });
        let outcome = match kind {
            EventKind::Duel => DUEL_OUTCOMES
                .choose(&mut rng)
                .copied()
                .flatten()
                .map(str::to_string),
            _ => None,
        };
        let shot_detail = (kind == EventKind::Shot).then(|| ShotDetail {
            technique: ["Normal", "Volley", "Half Volley"]
                .choose(&mut rng)
                .unwrap()
                .to_string(),
            body_part: ["Right Foot", "Left Foot", "Head"]
                .choose(&mut rng)
                .unwrap()
                .to_string(),
            shot_type: ["Open Play", "Free Kick", "Penalty"]
                .choose(&mut rng)
                .unwrap()
                .to_string(),
            is_goal: rng.gen_bool(0.15),
        });
        let has_player = kind.is_on_ball() || rng.gen_bool(0.9);
        let player = rng.gen_range(0..11);
        clock += rng.gen_range(0.0..4.0);
        out.push(Event {
            match_id: seed,
            event_index: i,
            period,
            team_id: team,
            team_name: format!("Team {team}"),
            player_id: has_player.then_some(team * 100 + player),
            player_name: has_player.then(|| format!("Player {team}-{player}")),
            position: None,
            event_type: kind,
            location,
            timestamp: clock,
            duration: rng.gen_range(0.0..3.0),
            under_pressure: rng.gen_bool(0.2),
            play_pattern: ["Regular Play", "From Corner", "From Throw In"]
                .choose(&mut rng)
                .unwrap()
                .to_string(),
            possession_id: possession,
            outcome,
            shot_detail,
        });
    }
    out
}
