use approx::assert_abs_diff_eq;
use chainvalue_core::chains::{Action, PossessionChain};
use chainvalue_core::event::{EventKind, ShotDetail};
use chainvalue_core::scorer::{
    build_scorer_dataset, score_state, ScorerOptions, CHAIN_REMAINDER_FEATURE,
};
use chainvalue_core::xg::{build_xg_dataset, xg_score, XgOptions};
use chainvalue_core::BallState;
use chainvalue_ml::{
    stratified_split, train_classifier, Algorithm, ClassWeights, Grid, ModelArtifact, TrainOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn action(k: usize, kind: &str, x: f64, y: f64, duration: f64) -> Action {
    Action {
        k,
        event_index: k * 3,
        player_id: 100 + k as u64,
        player_name: format!("Player {k}"),
        action_type: EventKind::from_name(kind),
        start_state: BallState { x, y },
        end_state: BallState { x, y },
        period: 1,
        timestamp: 10.0 * k as f64,
        duration,
        under_pressure: false,
        play_pattern: "Regular Play".into(),
        shot_detail: (kind == "Shot").then(|| ShotDetail {
            technique: "Normal".into(),
            body_part: "Right Foot".into(),
            shot_type: "Open Play".into(),
            is_goal: false,
        }),
    }
}

fn chain(id: usize, steps: &[(&str, f64, f64, f64)], goal: bool) -> PossessionChain {
    let mut actions: Vec<Action> = steps
        .iter()
        .enumerate()
        .map(|(i, &(kind, x, y, d))| action(i + 1, kind, x, y, d))
        .collect();
    if let Some(d) = actions.last_mut().and_then(|a| a.shot_detail.as_mut()) {
        d.is_goal = goal;
    }
    PossessionChain {
        chain_id: id,
        match_id: 1,
        team_id: 1,
        team_name: "Home".into(),
        possession_id: id as u32,
        actions,
        ends_in_goal: goal,
    }
}

#[test]
fn xg_rows_and_prevalence() {
    let chains: Vec<PossessionChain> = (0..100)
        .map(|i| {
            chain(
                i,
                &[("Pass", 60.0, 40.0, 1.0), ("Shot", 108.0, 40.0, 0.0)],
                i < 22,
            )
        })
        .collect();
    let xg = build_xg_dataset(&chains, &XgOptions::default()).unwrap();
    assert_eq!(xg.dataset.len(), 100);
    assert_eq!(xg.prevalence(), Some(0.22));
    let row = &xg.dataset.rows()[0];
    let schema = xg.dataset.schema();
    let angle = row[schema.index_of("shooting_angle").unwrap()]
        .as_number()
        .unwrap();
    let distance = row[schema.index_of("goal_distance").unwrap()]
        .as_number()
        .unwrap();
    assert_eq!(distance, 12.0);
    assert_abs_diff_eq!(angle, 0.6435, epsilon = 1e-4);

    assert!(build_xg_dataset(&[], &XgOptions::default())
        .unwrap()
        .dataset
        .is_empty());
}

#[test]
fn scorer_rows_follow_the_chain() {
    let goal = chain(
        0,
        &[
            ("Pass", 40.0, 40.0, 1.0),
            ("Carry", 50.0, 40.0, 2.0),
            ("Pass", 70.0, 40.0, 0.5),
            ("Shot", 100.0, 40.0, 0.0),
        ],
        true,
    );
    let direct = chain(1, &[("Shot", 95.0, 30.0, 0.0)], false);
    let d = build_scorer_dataset(&[goal, direct], &ScorerOptions::default()).unwrap();
    assert_eq!(d.dataset.len(), 3);
    assert!(d.dataset.target().iter().all(|&y| y == 1.0));
    let schema = d.dataset.schema();
    let col = |name: &str| -> Vec<f64> {
        let i = schema.index_of(name).unwrap();
        d.dataset
            .rows()
            .iter()
            .map(|r| r[i].as_number().unwrap())
            .collect()
    };
    assert_eq!(col(CHAIN_REMAINDER_FEATURE), [3.0, 2.0, 1.0]);
    assert_eq!(col("chain_duration_before"), [0.0, 1.0, 3.0]);

    let ablated = build_scorer_dataset(
        &[chain(
            2,
            &[("Pass", 1.0, 1.0, 1.0), ("Shot", 99.0, 40.0, 0.0)],
            false,
        )],
        &ScorerOptions {
            ablate_chain_remainder: true,
        },
    )
    .unwrap();
    assert!(ablated
        .dataset
        .schema()
        .index_of(CHAIN_REMAINDER_FEATURE)
        .is_none());
}

fn train(alg: Algorithm, d: &chainvalue_ml::Dataset, seed: u64) -> ModelArtifact {
    let (train, _) = stratified_split(d, 0.3, seed).unwrap();
    let weights = ClassWeights::from_prevalence(&train);
    train_classifier(
        alg,
        &train,
        weights,
        &Grid::new().with("max_depth", &[3.0]),
        seed,
        TrainOptions::classification(),
    )
    .unwrap()
}

#[test]
fn closer_shots_score_more_often() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let chains: Vec<PossessionChain> = (0..600)
        .map(|i| {
            let x: f64 = rng.gen_range(70.0..118.0);
            let y: f64 = rng.gen_range(25.0..55.0);
            let distance = (120.0 - x).hypot(40.0 - y);
            let goal = rng.gen_bool((1.0 - distance / 50.0).clamp(0.02, 0.95));
            chain(i, &[("Shot", x, y, 0.0)], goal)
        })
        .collect();
    let opts = XgOptions::default();
    let data = build_xg_dataset(&chains, &opts).unwrap().dataset;
    let model = train(Algorithm::GradientBoostedTrees, &data, 9);
    let near = xg_score(&model, &action(1, "Shot", 115.0, 40.0, 0.0), &opts).unwrap();
    let far = xg_score(&model, &action(1, "Shot", 80.0, 40.0, 0.0), &opts).unwrap();
    assert!((0.0..=1.0).contains(&near) && (0.0..=1.0).contains(&far));
    assert!(near >= far, "near {near} far {far}");

    let reloaded = ModelArtifact::from_json(&model.to_json().unwrap()).unwrap();
    assert_eq!(
        xg_score(&reloaded, &action(1, "Shot", 100.0, 30.0, 0.0), &opts).unwrap(),
        xg_score(&model, &action(1, "Shot", 100.0, 30.0, 0.0), &opts).unwrap()
    );
}

#[test]
fn attacking_third_states_score_higher() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let chains: Vec<PossessionChain> = (0..400)
        .map(|i| {
            let deep = i % 2 == 0;
            let x = if deep {
                rng.gen_range(81.0..118.0)
            } else {
                rng.gen_range(1.0..60.0)
            };
            chain(
                i,
                &[
                    ("Pass", x, 40.0, 1.0),
                    ("Pass", x, 30.0, 1.0),
                    ("Shot", 105.0, 40.0, 0.0),
                ],
                deep,
            )
        })
        .collect();
    let opts = ScorerOptions::default();
    let data = build_scorer_dataset(&chains, &opts).unwrap().dataset;
    let model = train(Algorithm::RandomForest, &data, 4);
    let probe = |x: f64| {
        let c = chain(
            0,
            &[
                ("Pass", x, 40.0, 1.0),
                ("Pass", x, 30.0, 1.0),
                ("Shot", 105.0, 40.0, 0.0),
            ],
            false,
        );
        score_state(&model, &c, 0, &opts).unwrap()
    };
    let (high, low) = (probe(90.0), probe(10.0));
    assert!(high > low, "x=90 {high} vs x=10 {low}");
    assert_eq!(probe(90.0), high);
    assert!((0.0..=1.0).contains(&high));

    let mismatched = ScorerOptions {
        ablate_chain_remainder: true,
    };
    let c = chain(
        0,
        &[("Pass", 50.0, 40.0, 1.0), ("Shot", 105.0, 40.0, 0.0)],
        false,
    );
    assert!(score_state(&model, &c, 0, &mismatched).is_err());
}
