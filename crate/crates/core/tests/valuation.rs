use std::collections::BTreeMap;

use chainvalue_core::chains::{Action, PossessionChain};
use chainvalue_core::event::EventKind;
use chainvalue_core::valuation::{aggregate_scores, credit_chain, ValuationOptions};
use chainvalue_core::{BallState, PositionGroup};
use proptest::prelude::*;

fn chain(xs: &[f64], players: &[u64], goal: bool) -> PossessionChain {
    let actions = xs
        .iter()
        .zip(players)
        .enumerate()
        .map(|(i, (&x, &p))| Action {
            k: i + 1,
            event_index: i,
            player_id: p,
            player_name: format!("p{p}"),
            action_type: if i + 1 == xs.len() {
                EventKind::Shot
            } else {
                EventKind::Pass
            },
            start_state: BallState { x, y: 40.0 },
            end_state: BallState { x, y: 40.0 },
            period: 1,
            timestamp: i as f64,
            duration: 1.0,
            under_pressure: false,
            play_pattern: "Regular Play".into(),
            shot_detail: None,
        })
        .collect();
    PossessionChain {
        chain_id: 0,
        match_id: 1,
        team_id: 1,
        team_name: "Home".into(),
        possession_id: 1,
        actions,
        ends_in_goal: goal,
    }
}

fn roles(pairs: &[(u64, PositionGroup)]) -> BTreeMap<u64, PositionGroup> {
    pairs.iter().copied().collect()
}

#[test]
fn constant_probabilities_credit_only_the_shooter() {
    let c = chain(&[30.0, 60.0, 90.0, 110.0], &[1, 2, 3, 4], false);
    let r = roles(&[
        (1, PositionGroup::Defender),
        (2, PositionGroup::Midfielder),
        (3, PositionGroup::Striker),
        (4, PositionGroup::Striker),
    ]);
    let credits =
        credit_chain(&c, &[0.2, 0.2, 0.2, 0.2], &r, &ValuationOptions::default()).unwrap();
    assert!(credits[..3].iter().all(|a| a.weighted_credit == 0.0));
    assert_eq!(credits[3].weighted_credit, -0.2);
}

#[test]
fn role_and_zone_multipliers() {
    let c = chain(&[90.0, 50.0, 110.0], &[1, 2, 3], false);
    let r = roles(&[
        (1, PositionGroup::Defender),
        (2, PositionGroup::Striker),
        (3, PositionGroup::Striker),
    ]);
    let credits = credit_chain(&c, &[0.1, 0.2, 0.3], &r, &ValuationOptions::default()).unwrap();
    assert!((credits[0].weighted_credit - 0.2).abs() < 1e-15);
    assert!((credits[1].weighted_credit - 0.1).abs() < 1e-15);
}

#[test]
fn missing_role_is_an_error() {
    let c = chain(&[50.0, 110.0], &[1, 2], true);
    let err = credit_chain(
        &c,
        &[0.1, 0.3],
        &roles(&[(1, PositionGroup::Defender)]),
        &ValuationOptions::default(),
    )
    .unwrap_err();
    assert!(err.to_string().contains('2'));
}

#[test]
fn suppressing_the_shooter_delta() {
    let c = chain(&[50.0, 100.0, 110.0], &[1, 2, 2], true);
    let r = roles(&[(1, PositionGroup::Midfielder), (2, PositionGroup::Striker)]);
    let opts = ValuationOptions {
        suppress_shooter_delta: true,
        ..Default::default()
    };
    let credits = credit_chain(&c, &[0.1, 0.2, 0.4], &r, &opts).unwrap();
    assert!(credits[1].suppressed && credits[1].weighted_credit == 0.0);
    assert!(!credits[0].suppressed && !credits[2].suppressed);
}

#[test]
fn aggregation_requires_appearances() {
    let c = chain(&[50.0, 110.0], &[1, 2], true);
    let r = roles(&[(1, PositionGroup::Midfielder), (2, PositionGroup::Striker)]);
    let credits = credit_chain(&c, &[0.1, 0.3], &r, &ValuationOptions::default()).unwrap();
    assert!(aggregate_scores(&credits, &BTreeMap::from([(1, 1)])).is_err());
}

fn group() -> impl Strategy<Value = PositionGroup> {
    prop_oneof![
        Just(PositionGroup::Defender),
        Just(PositionGroup::Midfielder),
        Just(PositionGroup::Striker)
    ]
}

proptest! {
    #[test]
    fn deltas_telescope(probs in prop::collection::vec(0.0..=1.0f64, 1..25), goal in any::<bool>()) {
        let n = probs.len();
        let xs: Vec<f64> = (0..n).map(|i| 119.0 * i as f64 / n as f64).collect();
        let players: Vec<u64> = (0..n as u64).collect();
        let r: BTreeMap<u64, PositionGroup> = players.iter().map(|&p| (p, PositionGroup::Midfielder)).collect();
        let credits = credit_chain(&chain(&xs, &players, goal), &probs, &r, &ValuationOptions::default()).unwrap();
        let sum: f64 = credits.iter().filter(|c| !c.is_final).map(|c| c.raw_delta).sum();
        prop_assert!((sum - (probs[n - 1] - probs[0])).abs() <= 1e-12);
        for c in &credits {
            prop_assert!(c.multiplier >= 1.0);
            if c.raw_delta <= 0.0 {
                prop_assert_eq!(c.weighted_credit, c.raw_delta);
            }
        }
    }

    #[test]
    fn defenders_earn_at_least_midfielders_at_least_strikers(steps in prop::collection::vec(0.0..0.05f64, 1..10)) {
        let mut probs = vec![0.1];
        for s in &steps {
            probs.push(probs.last().unwrap() + s);
        }
        let n = probs.len();
        let xs = vec![100.0; n];
        let total = |g: PositionGroup| {
            let players: Vec<u64> = (0..n as u64).collect();
            let r: BTreeMap<u64, PositionGroup> = players.iter().map(|&p| (p, g)).collect();
            credit_chain(&chain(&xs, &players, false), &probs, &r, &ValuationOptions::default())
                .unwrap()
                .iter()
                .filter(|c| !c.is_final)
                .map(|c| c.weighted_credit)
                .sum::<f64>()
        };
        let (d, m, s) = (total(PositionGroup::Defender), total(PositionGroup::Midfielder), total(PositionGroup::Striker));
        prop_assert!(d >= m && m >= s);
    }

    #[test]
    fn rescaling_keeps_the_ranking(
        entries in prop::collection::vec((group(), -1.0..1.0f64, 1u32..6), 2..30),
        scale in 0.001..1000.0f64,
    ) {
        let ranking = |factor: f64| {
            let mut credits = Vec::new();
            let mut games = BTreeMap::new();
            for (i, (g, value, n)) in entries.iter().enumerate() {
                let id = i as u64;
                games.insert(id, *n);
                let c = chain(&[50.0, 110.0], &[id, 1000], false);
                let r = roles(&[(id, *g), (1000, PositionGroup::Striker)]);
                let mut cr = credit_chain(&c, &[0.5, 0.5], &r, &ValuationOptions::default()).unwrap();
                cr[0].weighted_credit = value * factor;
                credits.push(cr[0].clone());
            }
            let mut scores = aggregate_scores(&credits, &games).unwrap();
            scores.sort_by(|a, b| b.normalized.total_cmp(&a.normalized).then(a.player_id.cmp(&b.player_id)));
            scores.into_iter().map(|s| s.player_id).collect::<Vec<_>>()
        };
        prop_assert_eq!(ranking(1.0), ranking(scale));
    }
}
