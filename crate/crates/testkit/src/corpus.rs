//! Synthetic tournament in the StatsBomb open-data layout, plus matching
//! market-value CSVs.
//!
//! Sixteen national teams play four round-robin groups, then quarter-finals,
//! semi-finals and a final. Player quality drives pass progression,
//! turnovers and finishing, and also the market-value change written to the
//! valuation CSV, so downstream scores and value changes are related.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::{json, Map, Value};

pub const COMPETITION_ID: u32 = 55;
pub const SEASON_ID: u32 = 43;
const FIRST_MATCH_ID: u64 = 3_900_001;
const MARKET_ID_OFFSET: u64 = 500_000;

const COUNTRIES: [&str; 16] = [
    "Italy",
    "Denmark",
    "Czech Republic",
    "Spain",
    "England",
    "Belgium",
    "Switzerland",
    "Ukraine",
    "Portugal",
    "France",
    "Germany",
    "Netherlands",
    "Austria",
    "Sweden",
    "Croatia",
    "Wales",
];

const FIRST_NAMES: [&str; 40] = [
    "Andrea",
    "Mikkel",
    "Joakim",
    "Ondřej",
    "Patrik",
    "Jorge",
    "Lorenzo",
    "Federico",
    "Kasper",
    "Simon",
    "Tomáš",
    "Vladimír",
    "Álvaro",
    "Pedro",
    "Raheem",
    "Harry",
    "Kevin",
    "Thorgan",
    "Granit",
    "Xherdan",
    "Oleksandr",
    "Andriy",
    "Rúben",
    "João",
    "Antoine",
    "Kingsley",
    "Leon",
    "Joshua",
    "Frenkie",
    "Memphis",
    "David",
    "Marcel",
    "Emil",
    "Victor",
    "Luka",
    "Ivan",
    "Gareth",
    "Aaron",
    "Søren",
    "Bjørn",
];

const SURNAMES: [&str; 48] = [
    "Rossi",
    "Bianchi",
    "Mæhle",
    "Damsgaard",
    "Čelůstka",
    "Schick",
    "Barella",
    "Chiesa",
    "Højbjerg",
    "Kjær",
    "Souček",
    "Coufal",
    "Morata",
    "Olmo",
    "Sterling",
    "Kane",
    "Meunier",
    "Witsel",
    "Xhaka",
    "Akanji",
    "Zinchenko",
    "Yarmolenko",
    "Dias",
    "Félix",
    "Griezmann",
    "Coman",
    "Goretzka",
    "Kimmich",
    "Dumfries",
    "Wijnaldum",
    "Alaba",
    "Sabitzer",
    "Forsberg",
    "Lindelöf",
    "Modrić",
    "Perišić",
    "Bale",
    "Ramsey",
    "Müller",
    "Gündoğan",
    "Nørgaard",
    "Poulsen",
    "Král",
    "Holeš",
    "Łukasz",
    "Østigård",
    "Stürm",
    "Brandão",
];

const NICKNAMES: [&str; 12] = [
    "Jorginho", "Pedri", "Koke", "Rodri", "Gavi", "Danilo", "Fabinho", "Thiago", "Isco", "Bruno",
    "Juninho", "Nani",
];

/// Starting shape and three substitutes, each with the position they take.
const SQUAD: [&str; 14] = [
    "Goalkeeper",
    "Right Back",
    "Right Center Back",
    "Left Center Back",
    "Left Back",
    "Right Center Midfield",
    "Center Defensive Midfield",
    "Left Center Midfield",
    "Right Wing",
    "Center Forward",
    "Left Wing",
    "Left Center Back",
    "Center Attacking Midfield",
    "Center Forward",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Line {
    Keeper,
    Back,
    Middle,
    Front,
}

fn line_of(position: &str) -> Line {
    if position == "Goalkeeper" {
        Line::Keeper
    } else if position.contains("Back") {
        Line::Back
    } else if position.contains("Midfield") {
        Line::Middle
    } else {
        Line::Front
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticPlayer {
    pub player_id: u64,
    pub name: String,
    pub nickname: Option<String>,
    pub team: usize,
    pub position: &'static str,
    pub quality: f64,
    pub birth_date: NaiveDate,
    /// Name in the market-value corpus; `None` if absent there.
    pub market_name: Option<String>,
    pub market_id: u64,
}

#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub seed: u64,
    pub start_date: NaiveDate,
    /// Scales match length; 1.0 is a full 90 minutes.
    pub minutes_scale: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            seed: 2021,
            start_date: NaiveDate::from_ymd_opt(2021, 6, 11).expect("valid date"),
            minutes_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusSummary {
    pub data_root: PathBuf,
    pub market_dir: PathBuf,
    pub match_ids: Vec<u64>,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
    pub quarter_finalists: Vec<String>,
    pub players: Vec<SyntheticPlayer>,
}

struct Match {
    id: u64,
    date: NaiveDate,
    stage: &'static str,
    home: usize,
    away: usize,
    knockout: bool,
}

fn normal(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
    Normal::new(mean, sd).expect("positive sd").sample(rng)
}

fn build_players(rng: &mut ChaCha8Rng, start: NaiveDate) -> Vec<SyntheticPlayer> {
    let mut used = BTreeSet::new();
    let mut nicknames: Vec<&str> = NICKNAMES.to_vec();
    nicknames.shuffle(rng);
    let mut players = Vec::new();
    for team in 0..COUNTRIES.len() {
        for (slot, &position) in SQUAD.iter().enumerate() {
            let name = loop {
                let n = format!(
                    "{} {}",
                    FIRST_NAMES.choose(rng).expect("non-empty"),
                    SURNAMES.choose(rng).expect("non-empty")
                );
                if used.insert(n.clone()) {
                    break n;
                }
            };
            let nickname = if slot > 0 && rng.gen_bool(0.05) {
                nicknames.pop().map(str::to_string)
            } else {
                None
            };
            let player_id = 10_000 + (team * 100 + slot) as u64;
            let age_days = rng.gen_range(19 * 365..35 * 365);
            players.push(SyntheticPlayer {
                player_id,
                market_name: Some(nickname.clone().unwrap_or_else(|| name.clone())),
                name,
                nickname,
                team,
                position,
                quality: normal(rng, 0.0, 1.0),
                birth_date: start - Days::new(age_days),
                market_id: player_id + MARKET_ID_OFFSET,
            });
        }
    }
    // A few players the market corpus does not know.
    for p in players.iter_mut().filter(|p| p.player_id % 97 == 3) {
        p.market_name = None;
    }
    players
}

struct Writer<'a> {
    rng: ChaCha8Rng,
    players: &'a [SyntheticPlayer],
    teams: [usize; 2],
    on_pitch: [Vec<usize>; 2],
    bench: [Vec<usize>; 2],
    appeared: BTreeSet<usize>,
    subs_in: BTreeSet<usize>,
    events: Vec<Value>,
    period: u8,
    clock: f64,
    possession: u32,
    goals: [u32; 2],
    shootout_winner: Option<usize>,
    scale: f64,
}

fn team_json(team: usize) -> Value {
    json!({"id": 700 + team, "name": COUNTRIES[team]})
}

fn timestamp(clock: f64) -> String {
    let ms = (clock * 1000.0).round() as u64;
    format!(
        "{:02}:{:02}:{:02}.{:03}",
        ms / 3_600_000,
        ms / 60_000 % 60,
        ms / 1000 % 60,
        ms % 1000
    )
}

fn clamp_pitch(x: f64, y: f64) -> (f64, f64) {
    (
        (x.clamp(0.5, 119.5) * 10.0).round() / 10.0,
        (y.clamp(0.5, 79.5) * 10.0).round() / 10.0,
    )
}

fn flip((x, y): (f64, f64)) -> (f64, f64) {
    clamp_pitch(120.0 - x, 80.0 - y)
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl<'a> Writer<'a> {
    fn player(&self, idx: usize) -> &'a SyntheticPlayer {
        &self.players[idx]
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        kind: &str,
        side: usize,
        actor: Option<usize>,
        location: Option<(f64, f64)>,
        duration: Option<f64>,
        pattern: &str,
        pressured: bool,
        extra: Option<(&str, Value)>,
    ) {
        let index = self.events.len() + 1;
        let mut e = Map::new();
        e.insert("id".into(), json!(format!("e{index}")));
        e.insert("index".into(), json!(index));
        e.insert("period".into(), json!(self.period));
        e.insert("timestamp".into(), json!(timestamp(self.clock)));
        e.insert("minute".into(), json!((self.clock / 60.0) as u32));
        e.insert("second".into(), json!((self.clock as u32) % 60));
        e.insert("type".into(), json!({"name": kind}));
        e.insert("possession".into(), json!(self.possession));
        e.insert("play_pattern".into(), json!({"name": pattern}));
        e.insert("team".into(), team_json(self.teams[side]));
        if let Some(a) = actor {
            let p = self.player(a);
            e.insert("player".into(), json!({"id": p.player_id, "name": p.name}));
            e.insert("position".into(), json!({"name": p.position}));
        }
        if let Some((x, y)) = location {
            e.insert("location".into(), json!([x, y]));
        }
        if let Some(d) = duration {
            e.insert("duration".into(), json!((d * 1000.0).round() / 1000.0));
        }
        if pressured {
            e.insert("under_pressure".into(), json!(true));
        }
        if let Some((k, v)) = extra {
            e.insert(k.into(), v);
        }
        self.events.push(Value::Object(e));
        self.clock += duration.unwrap_or(0.0);
    }

    /// Outfield player likely to be on the ball at `x`.
    fn pick_actor(&mut self, side: usize, x: f64, exclude: Option<usize>) -> usize {
        let weights: Vec<f64> = self.on_pitch[side]
            .iter()
            .map(|&i| {
                if Some(i) == exclude {
                    return 0.0;
                }
                match (line_of(self.player(i).position), x) {
                    (Line::Keeper, x) if x < 15.0 => 0.5,
                    (Line::Keeper, _) => 0.0,
                    (Line::Back, x) if x < 40.0 => 3.0,
                    (Line::Back, x) if x < 80.0 => 1.2,
                    (Line::Back, _) => 0.6,
                    (Line::Middle, x) if x < 40.0 => 2.0,
                    (Line::Middle, _) => 3.0,
                    (Line::Front, x) if x < 40.0 => 0.3,
                    (Line::Front, x) if x < 80.0 => 1.5,
                    (Line::Front, _) => 3.5,
                }
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let mut r = self.rng.gen_range(0.0..total);
        for (w, &i) in weights.iter().zip(&self.on_pitch[side]) {
            if r < *w {
                return i;
            }
            r -= w;
        }
        *self.on_pitch[side].last().expect("non-empty side")
    }

    fn starting_xi(&mut self) {
        for side in 0..2 {
            let lineup: Vec<Value> = self.on_pitch[side]
                .iter()
                .enumerate()
                .map(|(n, &i)| {
                    let p = self.player(i);
                    json!({"player": {"id": p.player_id, "name": p.name},
                           "position": {"name": p.position}, "jersey_number": n + 1})
                })
                .collect();
            self.push(
                "Starting XI",
                side,
                None,
                None,
                Some(0.0),
                "Regular Play",
                false,
                Some(("tactics", json!({"formation": 433, "lineup": lineup}))),
            );
        }
    }

    fn substitutions(&mut self) {
        for side in 0..2 {
            let n = self.rng.gen_range(0..=self.bench[side].len());
            for _ in 0..n {
                let Some(sub) = self.bench[side].pop() else {
                    break;
                };
                let line = line_of(self.player(sub).position);
                let Some(slot) = self.on_pitch[side]
                    .iter()
                    .position(|&i| line_of(self.player(i).position) == line)
                else {
                    continue;
                };
                let off = self.on_pitch[side][slot];
                let p = self.player(sub);
                self.push(
                    "Substitution",
                    side,
                    Some(off),
                    None,
                    Some(0.0),
                    "Regular Play",
                    false,
                    Some((
                        "substitution",
                        json!({"replacement": {"id": p.player_id, "name": p.name}}),
                    )),
                );
                self.on_pitch[side][slot] = sub;
                self.appeared.insert(sub);
                self.subs_in.insert(sub);
            }
        }
    }

    /// One possession; returns the side and pattern of the next one and
    /// where it starts, in that side's frame.
    fn possession(
        &mut self,
        side: usize,
        pattern: &str,
        start: (f64, f64),
    ) -> (usize, &'static str, (f64, f64)) {
        self.possession += 1;
        let opp = 1 - side;
        let (mut x, mut y) = start;
        let mut actor = if pattern == "From Goal Kick" {
            self.on_pitch[side][0]
        } else {
            self.pick_actor(side, x, None)
        };

        if pattern == "Other" {
            return self.shot(side, actor, (108.0, 40.0), pattern, false, "Penalty", 0);
        }

        for step in 0.. {
            let q = self.player(actor).quality;
            let pressured = self.rng.gen_bool(0.25);
            if pressured {
                let presser = self.pick_actor(opp, 120.0 - x, None);
                let duration = self.rng.gen_range(0.3..1.5);
                self.push(
                    "Pressure",
                    opp,
                    Some(presser),
                    Some(flip((x, y))),
                    Some(duration),
                    pattern,
                    false,
                    None,
                );
            }

            // Shot decision.
            let corner_header = pattern == "From Corner" && step == 1;
            let depth = ((x - 86.0) / 34.0).max(0.0);
            let shot_p = if corner_header {
                0.3
            } else {
                (0.012 + 0.22 * depth.powf(1.5)) * (1.0 + 0.15 * q)
            };
            if x > 80.0 && self.rng.gen_bool(shot_p.clamp(0.0, 0.9)) {
                let kind = if pattern == "From Free Kick" && step == 0 {
                    "Free Kick"
                } else {
                    "Open Play"
                };
                return self.shot(side, actor, (x, y), pattern, pressured, kind, step);
            }
            if x > 100.0 && self.rng.gen_bool(0.01) {
                self.push(
                    "Foul Won",
                    side,
                    Some(actor),
                    Some((x, y)),
                    None,
                    pattern,
                    false,
                    None,
                );
                return (side, "Other", (108.0, 40.0));
            }

            // Loss of the ball.
            let turnover_p = (0.09 + 0.05 * f64::from(u8::from(pressured)) - 0.025 * q
                + 0.03 * (x / 120.0))
                .clamp(0.02, 0.4);
            if step > 0 && self.rng.gen_bool(turnover_p) {
                return self.turnover(side, (x, y), pattern);
            }
            if self.rng.gen_bool(0.03) {
                self.push(
                    "Duel",
                    side,
                    Some(actor),
                    Some((x, y)),
                    None,
                    pattern,
                    pressured,
                    Some(("duel", json!({"type": {"name": "Aerial Lost"}}))),
                );
            }

            let roll: f64 = self.rng.gen();
            if roll < 0.6 {
                let dx = normal(&mut self.rng, 6.0 + 2.5 * q, 11.0).max(-20.0);
                let dy = normal(&mut self.rng, 0.0, 14.0);
                let end = clamp_pitch(x + dx, y + dy - (y - 40.0) * 0.15);
                let complete_p =
                    (0.84 + 0.04 * q - 0.004 * dx.max(0.0) - 0.05 * f64::from(u8::from(pressured)))
                        .clamp(0.3, 0.98);
                let complete = self.rng.gen_bool(complete_p);
                let mut pass = json!({"end_location": [end.0, end.1], "length": dx.hypot(dy)});
                if !complete {
                    pass["outcome"] = json!({"name": "Incomplete"});
                }
                let duration = self.rng.gen_range(0.5..2.5);
                self.push(
                    "Pass",
                    side,
                    Some(actor),
                    Some((x, y)),
                    Some(duration),
                    pattern,
                    pressured,
                    Some(("pass", pass)),
                );
                if !complete {
                    let taker = self.pick_actor(opp, 120.0 - end.0, None);
                    let at = flip(end);
                    self.push(
                        "Interception",
                        opp,
                        Some(taker),
                        Some(at),
                        Some(0.0),
                        pattern,
                        false,
                        Some(("interception", json!({"outcome": {"name": "Won"}}))),
                    );
                    return (opp, "Regular Play", at);
                }
                let receiver = self.pick_actor(side, end.0, Some(actor));
                self.push(
                    "Ball Receipt*",
                    side,
                    Some(receiver),
                    Some(end),
                    None,
                    pattern,
                    false,
                    None,
                );
                actor = receiver;
                (x, y) = end;
            } else if roll < 0.92 {
                let dx = self.rng.gen_range(0.0..9.0) * (1.0 + 0.25 * q).max(0.3);
                let end = clamp_pitch(x + dx, y + normal(&mut self.rng, 0.0, 4.0));
                let duration = self.rng.gen_range(0.5..4.0);
                self.push(
                    "Carry",
                    side,
                    Some(actor),
                    Some((x, y)),
                    Some(duration),
                    pattern,
                    pressured,
                    Some(("carry", json!({"end_location": [end.0, end.1]}))),
                );
                (x, y) = end;
            } else {
                let beats = self.rng.gen_bool((0.55 + 0.12 * q).clamp(0.1, 0.95));
                let outcome = if beats { "Complete" } else { "Incomplete" };
                self.push(
                    "Dribble",
                    side,
                    Some(actor),
                    Some((x, y)),
                    Some(0.0),
                    pattern,
                    pressured,
                    Some(("dribble", json!({"outcome": {"name": outcome}}))),
                );
                let defender = self.pick_actor(opp, 120.0 - x, None);
                if beats {
                    self.push(
                        "Dribbled Past",
                        opp,
                        Some(defender),
                        Some(flip((x, y))),
                        Some(0.0),
                        pattern,
                        false,
                        None,
                    );
                } else {
                    let at = flip((x, y));
                    self.push(
                        "Duel",
                        opp,
                        Some(defender),
                        Some(at),
                        Some(0.0),
                        pattern,
                        false,
                        Some((
                            "duel",
                            json!({"type": {"name": "Tackle"}, "outcome": {"name": "Won"}}),
                        )),
                    );
                    return (opp, "Regular Play", at);
                }
            }
        }
        unreachable!()
    }

    fn turnover(
        &mut self,
        side: usize,
        at: (f64, f64),
        pattern: &str,
    ) -> (usize, &'static str, (f64, f64)) {
        let opp = 1 - side;
        let here = flip(at);
        let taker = self.pick_actor(opp, here.0, None);
        match self.rng.gen_range(0..4) {
            0 => {
                self.push(
                    "Interception",
                    opp,
                    Some(taker),
                    Some(here),
                    Some(0.0),
                    pattern,
                    false,
                    Some((
                        "interception",
                        json!({"outcome": {"name": "Success In Play"}}),
                    )),
                );
                (opp, "Regular Play", here)
            }
            1 => {
                self.push(
                    "Duel",
                    opp,
                    Some(taker),
                    Some(here),
                    Some(0.0),
                    pattern,
                    false,
                    Some((
                        "duel",
                        json!({"type": {"name": "Tackle"}, "outcome": {"name": "Success In Play"}}),
                    )),
                );
                (opp, "From Counter", here)
            }
            2 => {
                self.push(
                    "Clearance",
                    opp,
                    Some(taker),
                    Some(here),
                    Some(0.0),
                    pattern,
                    false,
                    None,
                );
                let throw_y = if at.1 < 40.0 { 0.1 } else { 79.9 };
                (side, "From Throw In", clamp_pitch(at.0.min(100.0), throw_y))
            }
            _ => {
                // Loose ball: no breaking event, but the possession changes.
                self.push(
                    "Miscontrol",
                    side,
                    None,
                    Some(at),
                    Some(0.0),
                    pattern,
                    false,
                    None,
                );
                self.push(
                    "Ball Recovery",
                    opp,
                    Some(taker),
                    Some(here),
                    Some(0.0),
                    pattern,
                    false,
                    None,
                );
                (opp, "Regular Play", here)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn shot(
        &mut self,
        side: usize,
        shooter: usize,
        at: (f64, f64),
        pattern: &str,
        pressured: bool,
        shot_type: &str,
        step: usize,
    ) -> (usize, &'static str, (f64, f64)) {
        let q = self.player(shooter).quality;
        let head = pattern == "From Corner" && step == 1 || self.rng.gen_bool(0.1);
        let body = if head {
            "Head"
        } else if self.rng.gen_bool(0.65) {
            "Right Foot"
        } else {
            "Left Foot"
        };
        let technique = if head {
            "Normal"
        } else {
            *[
                "Normal",
                "Normal",
                "Normal",
                "Normal",
                "Half Volley",
                "Volley",
                "Lob",
            ]
            .choose(&mut self.rng)
            .expect("non-empty")
        };
        let dx = 120.0 - at.0;
        let dist = dx.hypot(40.0 - at.1);
        let angle = ((40.0 - at.1 + 4.0).atan2(dx) - (40.0 - at.1 - 4.0).atan2(dx)).abs();
        let p_goal = if shot_type == "Penalty" {
            0.76
        } else {
            sigmoid(
                -1.7 + 2.4 * angle - 0.1 * dist + 0.45 * q
                    - if head { 0.5 } else { 0.0 }
                    - if pressured { 0.3 } else { 0.0 },
            )
        };
        let goal = self.rng.gen_bool(p_goal.clamp(0.0, 1.0));
        let outcome = if goal {
            "Goal"
        } else {
            *["Saved", "Off T", "Blocked", "Wayward", "Post"]
                .choose(&mut self.rng)
                .expect("non-empty")
        };
        let duration = self.rng.gen_range(0.2..1.2);
        self.push(
            "Shot",
            side,
            Some(shooter),
            Some(at),
            Some(duration),
            pattern,
            pressured,
            Some((
                "shot",
                json!({"outcome": {"name": outcome}, "technique": {"name": technique},
                       "body_part": {"name": body}, "type": {"name": shot_type},
                       "end_location": [120.0, 40.0]}),
            )),
        );
        let opp = 1 - side;
        if goal {
            self.goals[side] += 1;
            return (opp, "From Kick Off", (60.0, 40.0));
        }
        let keeper = self.on_pitch[opp][0];
        self.push(
            "Goal Keeper",
            opp,
            Some(keeper),
            Some(flip(at)),
            Some(0.0),
            pattern,
            false,
            None,
        );
        if self.rng.gen_bool(0.3) {
            let y = if self.rng.gen_bool(0.5) { 0.5 } else { 79.5 };
            (side, "From Corner", (119.5, y))
        } else {
            (opp, "From Goal Kick", (6.0, 40.0))
        }
    }

    fn period(&mut self, number: u8, minutes: f64, kick_off: usize) {
        self.period = number;
        self.clock = 0.0;
        for side in 0..2 {
            self.push(
                "Half Start",
                side,
                None,
                None,
                Some(0.0),
                "Regular Play",
                false,
                None,
            );
        }
        let length = minutes * 60.0 * self.scale;
        let mut next = (kick_off, "From Kick Off", (60.0, 40.0));
        let mut subs_done = number != 2;
        while self.clock < length {
            if !subs_done && self.clock > length * 0.4 {
                self.substitutions();
                subs_done = true;
            }
            next = self.possession(next.0, next.1, next.2);
            self.clock += self.rng.gen_range(8.0..30.0);
        }
        for side in 0..2 {
            self.push(
                "Half End",
                side,
                None,
                None,
                Some(0.0),
                "Regular Play",
                false,
                None,
            );
        }
    }

    fn shootout(&mut self) {
        self.period = 5;
        self.clock = 0.0;
        let mut scored = [0u32; 2];
        for round in 0..20 {
            for (side, tally) in scored.iter_mut().enumerate() {
                self.possession += 1;
                let taker = self.on_pitch[side][10 - (round % 10)];
                let goal = self.rng.gen_bool(0.75);
                *tally += u32::from(goal);
                self.push(
                    "Shot",
                    side,
                    Some(taker),
                    Some((108.0, 40.0)),
                    Some(1.0),
                    "Other",
                    false,
                    Some((
                        "shot",
                        json!({"outcome": {"name": if goal { "Goal" } else { "Saved" }},
                        "technique": {"name": "Normal"}, "body_part": {"name": "Right Foot"},
                        "type": {"name": "Penalty"}}),
                    )),
                );
            }
            if round >= 4 && scored[0] != scored[1] {
                break;
            }
        }
        self.shootout_winner = Some(usize::from(scored[1] > scored[0]));
    }

    fn winner(&self) -> usize {
        match self.goals[0].cmp(&self.goals[1]) {
            std::cmp::Ordering::Greater => 0,
            std::cmp::Ordering::Less => 1,
            std::cmp::Ordering::Equal => self.shootout_winner.unwrap_or(0),
        }
    }
}

fn simulate(
    m: &Match,
    players: &[SyntheticPlayer],
    rng: &mut ChaCha8Rng,
    scale: f64,
) -> (
    Vec<Value>,
    [u32; 2],
    usize,
    BTreeSet<usize>,
    BTreeSet<usize>,
) {
    let squad = |team: usize| -> Vec<usize> {
        players
            .iter()
            .enumerate()
            .filter(|(_, p)| p.team == team)
            .map(|(i, _)| i)
            .collect()
    };
    let (home, away) = (squad(m.home), squad(m.away));
    let mut bench = [home[11..].to_vec(), away[11..].to_vec()];
    bench[0].shuffle(rng);
    bench[1].shuffle(rng);
    let on_pitch = [home[..11].to_vec(), away[..11].to_vec()];
    let appeared: BTreeSet<usize> = on_pitch.iter().flatten().copied().collect();
    let mut w = Writer {
        rng: ChaCha8Rng::seed_from_u64(rng.gen()),
        players,
        teams: [m.home, m.away],
        on_pitch,
        bench,
        appeared,
        subs_in: BTreeSet::new(),
        events: Vec::new(),
        period: 1,
        clock: 0.0,
        possession: 0,
        goals: [0, 0],
        shootout_winner: None,
        scale,
    };
    w.starting_xi();
    w.period(1, 45.0, 0);
    w.period(2, 45.0, 1);
    if m.knockout && w.goals[0] == w.goals[1] {
        w.period(3, 15.0, 0);
        w.period(4, 15.0, 1);
        if w.goals[0] == w.goals[1] {
            w.shootout();
        }
    }
    let winner = w.winner();
    (w.events, w.goals, winner, w.appeared, w.subs_in)
}

fn lineups_json(
    m: &Match,
    players: &[SyntheticPlayer],
    appeared: &BTreeSet<usize>,
    subs_in: &BTreeSet<usize>,
) -> Value {
    let teams: Vec<Value> = [m.home, m.away]
        .iter()
        .map(|&team| {
            let lineup: Vec<Value> = players
                .iter()
                .enumerate()
                .filter(|(_, p)| p.team == team)
                .map(|(i, p)| {
                    let positions = if subs_in.contains(&i) {
                        json!([{"position": p.position, "start_reason": "Substitution - On (Tactical)"}])
                    } else if appeared.contains(&i) {
                        json!([{"position": p.position, "start_reason": "Starting XI"}])
                    } else {
                        json!([])
                    };
                    json!({"player_id": p.player_id, "player_name": p.name,
                           "player_nickname": p.nickname, "jersey_number": i % 100,
                           "country": {"id": 700 + team, "name": COUNTRIES[team]},
                           "cards": [], "positions": positions})
                })
                .collect();
            json!({"team_id": 700 + team, "team_name": COUNTRIES[team], "lineup": lineup})
        })
        .collect();
    Value::Array(teams)
}

fn ascii_fold(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            'á' | 'à' | 'ä' | 'ã' => 'a',
            'é' | 'è' | 'ě' => 'e',
            'í' => 'i',
            'ó' | 'ö' | 'ø' => 'o',
            'ú' | 'ü' | 'ů' => 'u',
            'č' | 'ć' => 'c',
            'š' => 's',
            'ř' => 'r',
            'ğ' => 'g',
            'Č' => 'C',
            'Á' => 'A',
            'Ł' => 'L',
            'Ø' => 'O',
            'Ž' => 'Z',
            other => other,
        })
        .collect::<String>()
        .replace('æ', "ae")
}

fn market_position(position: &str) -> (&'static str, &'static str) {
    match line_of(position) {
        Line::Keeper => ("Goalkeeper", "Goalkeeper"),
        Line::Back if position.contains("Center") => ("Defender", "Centre-Back"),
        Line::Back => ("Defender", "Full-Back"),
        Line::Middle => ("Midfield", "Central Midfield"),
        Line::Front if position.contains("Wing") => ("Attack", "Winger"),
        Line::Front => ("Attack", "Centre-Forward"),
    }
}

fn write_json(path: &Path, value: &Value) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(
        path,
        serde_json::to_vec_pretty(value).map_err(io::Error::other)?,
    )
}

fn group_table(group: &[usize], results: &[(usize, usize, [u32; 2])]) -> Vec<usize> {
    let mut table: Vec<(usize, i64, i64, i64)> = group.iter().map(|&t| (t, 0, 0, 0)).collect();
    for &(h, a, g) in results {
        for (team, gf, ga) in [(h, g[0], g[1]), (a, g[1], g[0])] {
            if let Some(row) = table.iter_mut().find(|r| r.0 == team) {
                row.1 += match gf.cmp(&ga) {
                    std::cmp::Ordering::Greater => 3,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Less => 0,
                };
                row.2 += i64::from(gf) - i64::from(ga);
                row.3 += i64::from(gf);
            }
        }
    }
    table.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then(b.2.cmp(&a.2))
            .then(b.3.cmp(&a.3))
            .then(a.0.cmp(&b.0))
    });
    table.into_iter().map(|r| r.0).collect()
}

/// Writes the tournament under `dir/open-data` and the market CSVs under
/// `dir/market`.
pub fn write_corpus(dir: &Path, spec: &CorpusSpec) -> io::Result<CorpusSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let players = build_players(&mut rng, spec.start_date);
    let data_root = dir.join("open-data");
    let market_dir = dir.join("market");
    fs::create_dir_all(&market_dir)?;

    let mut match_rows = Vec::new();
    let mut match_ids = Vec::new();
    let mut next_id = FIRST_MATCH_ID;
    let mut day = 0u64;
    let play =
        |m: Match, rng: &mut ChaCha8Rng, rows: &mut Vec<Value>| -> io::Result<([u32; 2], usize)> {
            let (events, goals, winner, appeared, subs_in) =
                simulate(&m, &players, rng, spec.minutes_scale);
            write_json(
                &data_root.join("events").join(format!("{}.json", m.id)),
                &Value::Array(events),
            )?;
            write_json(
                &data_root.join("lineups").join(format!("{}.json", m.id)),
                &lineups_json(&m, &players, &appeared, &subs_in),
            )?;
            rows.push(json!({
            "match_id": m.id,
            "match_date": m.date.to_string(),
            "kick_off": "21:00:00.000",
            "competition": {"competition_id": COMPETITION_ID, "competition_name": "Synthetic Cup"},
            "season": {"season_id": SEASON_ID, "season_name": "2020"},
            "home_team": {"home_team_id": 700 + m.home, "home_team_name": COUNTRIES[m.home]},
            "away_team": {"away_team_id": 700 + m.away, "away_team_name": COUNTRIES[m.away]},
            "home_score": goals[0],
            "away_score": goals[1],
            "competition_stage": {"id": 1, "name": m.stage},
        }));
            Ok((goals, winner))
        };

    let groups: Vec<Vec<usize>> = (0..4).map(|g| (g * 4..g * 4 + 4).collect()).collect();
    let rounds = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];
    let mut results = Vec::new();
    for round in rounds {
        for group in &groups {
            for (h, a) in round {
                let m = Match {
                    id: next_id,
                    date: spec.start_date + Days::new(day / 4),
                    stage: "Group Stage",
                    home: group[h],
                    away: group[a],
                    knockout: false,
                };
                next_id += 1;
                day += 1;
                match_ids.push(m.id);
                let (home, away) = (m.home, m.away);
                let (goals, _) = play(m, &mut rng, &mut match_rows)?;
                results.push((home, away, goals));
            }
        }
    }
    let tables: Vec<Vec<usize>> = groups.iter().map(|g| group_table(g, &results)).collect();
    let mut alive = vec![
        (tables[0][0], tables[1][1]),
        (tables[1][0], tables[0][1]),
        (tables[2][0], tables[3][1]),
        (tables[3][0], tables[2][1]),
    ];
    let quarter_finalists: Vec<String> = alive
        .iter()
        .flat_map(|&(a, b)| [COUNTRIES[a].to_string(), COUNTRIES[b].to_string()])
        .collect();
    let mut date = spec.start_date + Days::new(day / 4 + 3);
    for stage in ["Quarter-finals", "Semi-finals", "Final"] {
        let mut winners = Vec::new();
        for &(home, away) in &alive {
            let m = Match {
                id: next_id,
                date,
                stage,
                home,
                away,
                knockout: true,
            };
            next_id += 1;
            match_ids.push(m.id);
            let (_, winner) = play(m, &mut rng, &mut match_rows)?;
            winners.push(if winner == 0 { home } else { away });
        }
        alive = winners
            .chunks(2)
            .filter(|c| c.len() == 2)
            .map(|c| (c[0], c[1]))
            .collect();
        date = date + Days::new(4);
    }
    let last_date = date - Days::new(4);
    write_json(
        &data_root
            .join("matches")
            .join(COMPETITION_ID.to_string())
            .join(format!("{SEASON_ID}.json")),
        &Value::Array(match_rows),
    )?;
    write_market(&market_dir, &players, spec.start_date, last_date, &mut rng)?;

    Ok(CorpusSummary {
        data_root,
        market_dir,
        match_ids,
        first_date: spec.start_date,
        last_date,
        quarter_finalists,
        players,
    })
}

fn write_market(
    dir: &Path,
    players: &[SyntheticPlayer],
    start: NaiveDate,
    end: NaiveDate,
    rng: &mut ChaCha8Rng,
) -> io::Result<()> {
    let mut meta = csv::Writer::from_path(dir.join("players.csv"))?;
    meta.write_record([
        "player_id",
        "name",
        "date_of_birth",
        "position",
        "sub_position",
    ])?;
    let mut values = csv::Writer::from_path(dir.join("player_valuations.csv"))?;
    values.write_record(["player_id", "date", "market_value_in_eur"])?;

    let money = |v: f64| ((v / 25_000.0).round() * 25_000.0).max(25_000.0) as u64;
    for (n, p) in players.iter().enumerate() {
        let Some(name) = &p.market_name else { continue };
        let name = if n % 3 == 0 {
            ascii_fold(name)
        } else {
            name.clone()
        };
        let (position, sub) = market_position(p.position);
        let birth = if n % 61 == 7 {
            String::new()
        } else {
            format!("{} 00:00:00", p.birth_date)
        };
        meta.write_record([
            p.market_id.to_string(),
            name,
            birth,
            position.into(),
            sub.into(),
        ])?;

        let base = (normal(rng, 15.8, 0.7) + 0.35 * p.quality).exp();
        let before = [
            start - Days::new(rng.gen_range(150..300)),
            start - Days::new(rng.gen_range(5..60)),
        ];
        for d in before {
            values.write_record([
                p.market_id.to_string(),
                d.to_string(),
                money(base * normal(rng, 1.0, 0.03)).to_string(),
            ])?;
        }
        if n % 53 == 11 {
            continue;
        }
        let change = 0.22 * p.quality + normal(rng, 0.0, 0.12);
        let after = end + Days::new(rng.gen_range(20..200));
        let row = [
            p.market_id.to_string(),
            after.to_string(),
            money(base * change.exp()).to_string(),
        ];
        values.write_record(&row)?;
        if n % 47 == 5 {
            values.write_record(&row)?;
        }
    }
    // Same name as a tournament player, so linking that name is ambiguous.
    if let Some(p) = players
        .iter()
        .find(|p| p.nickname.is_none() && p.market_name.is_some())
    {
        meta.write_record([
            (p.market_id + 900_000).to_string(),
            p.name.clone(),
            "1990-01-01 00:00:00".into(),
            "Attack".into(),
            "Centre-Forward".into(),
        ])?;
    }
    values.write_record([
        players[0].market_id.to_string(),
        start.to_string(),
        "n/a".into(),
    ])?;
    meta.flush()?;
    values.flush()
}
