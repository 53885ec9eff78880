use chainvalue_ml::artifact::{Encoder, ModelParams, TrainingSummary, ARTIFACT_VERSION};
use chainvalue_ml::encode::OneHotEncoder;
use chainvalue_ml::logistic::LogisticModel;
use chainvalue_ml::{
    evaluate_classifier, evaluate_regressor, fit_classifier, fit_regressor, stratified_split,
    train_classifier, train_regressor, validation_fold, Algorithm, ClassWeights, Dataset,
    FeatureSpec, FeatureValue, Grid, Hyperparameters, MlError, ModelArtifact, Schema,
    SelectionMetric, Task, TrainOptions,
};

fn separable(n: usize) -> Dataset {
    // Class 1 iff x0 + 0.1 * x1 > 6.5; no rows fall within the margin.
    let schema = Schema::new(vec![
        FeatureSpec::continuous("x0"),
        FeatureSpec::continuous("x1"),
        FeatureSpec::categorical("side"),
    ]);
    let mut rows = Vec::new();
    let mut target = Vec::new();
    for i in 0..n {
        let a = (i * 7 % 13) as f64;
        let b = (i * 5 % 11) as f64;
        let s = a + 0.1 * b;
        if (5.5..=7.5).contains(&s) {
            continue;
        }
        rows.push(vec![
            a.into(),
            b.into(),
            if i % 2 == 0 { "left" } else { "right" }.into(),
        ]);
        target.push(if s > 6.5 { 1.0 } else { 0.0 });
    }
    let ids = (0..rows.len()).map(|i| format!("r{i}")).collect();
    Dataset::new(schema, rows, target, ids).unwrap()
}

fn small_grid(algorithm: Algorithm) -> Grid {
    match algorithm {
        Algorithm::LogisticRegression => Grid::new().with("c", &[1.0, 10.0]),
        Algorithm::RandomForest => Grid::new()
            .with("n_trees", &[20.0])
            .with("max_depth", &[3.0, 6.0]),
        Algorithm::GradientBoostedTrees => Grid::new()
            .with("n_trees", &[30.0])
            .with("max_depth", &[3.0])
            .with("learning_rate", &[0.1]),
        Algorithm::DecisionTree => Grid::new().with("max_depth", &[3.0, 6.0]),
    }
}

#[test]
fn separable_toy_reaches_perfect_auc_for_the_three_classifiers() {
    let d = separable(240);
    let (train, test) = stratified_split(&d, 0.3, 11).unwrap();
    for algorithm in [
        Algorithm::LogisticRegression,
        Algorithm::RandomForest,
        Algorithm::GradientBoostedTrees,
    ] {
        let m = train_classifier(
            algorithm,
            &train,
            ClassWeights::uniform(),
            &small_grid(algorithm),
            5,
            TrainOptions::classification(),
        )
        .unwrap();
        let r = evaluate_classifier(&m, &test).unwrap();
        assert_eq!(r.auc, Some(1.0), "{algorithm}");
    }
}

#[test]
fn constant_target_is_a_single_class_error() {
    let d = separable(60);
    let zeros = Dataset::new(
        d.schema().clone(),
        d.rows().to_vec(),
        vec![0.0; d.len()],
        d.row_ids().to_vec(),
    )
    .unwrap();
    let err = train_classifier(
        Algorithm::GradientBoostedTrees,
        &zeros,
        ClassWeights::uniform(),
        &small_grid(Algorithm::GradientBoostedTrees),
        1,
        TrainOptions::classification(),
    )
    .unwrap_err();
    assert!(matches!(err, MlError::SingleClass));
}

#[test]
fn empty_grid_and_bad_weights_are_rejected() {
    let d = separable(60);
    assert!(matches!(
        train_classifier(
            Algorithm::RandomForest,
            &d,
            ClassWeights::uniform(),
            &Grid::new(),
            1,
            TrainOptions::classification()
        ),
        Err(MlError::EmptyGrid)
    ));
    let w = ClassWeights {
        negative: 0.0,
        positive: 1.0,
    };
    assert!(matches!(
        train_classifier(
            Algorithm::RandomForest,
            &d,
            w,
            &small_grid(Algorithm::RandomForest),
            1,
            TrainOptions::classification()
        ),
        Err(MlError::InvalidClassWeight { .. })
    ));
    assert!(matches!(
        train_regressor(
            Algorithm::LogisticRegression,
            &d,
            &small_grid(Algorithm::LogisticRegression),
            1,
            TrainOptions::regression()
        ),
        Err(MlError::UnsupportedAlgorithm { .. })
    ));
}

#[test]
fn identical_inputs_give_identical_serialized_artifacts() {
    let d = separable(200);
    for algorithm in Algorithm::ALL {
        let run = || {
            train_classifier(
                algorithm,
                &d,
                ClassWeights::from_prevalence(&d),
                &small_grid(algorithm),
                77,
                TrainOptions::classification(),
            )
            .unwrap()
            .to_json()
            .unwrap()
        };
        assert_eq!(run(), run(), "{algorithm}");
    }
}

#[test]
fn serialization_round_trip_is_bit_exact() {
    let d = separable(200);
    for algorithm in Algorithm::ALL {
        let m = fit_classifier(
            algorithm,
            &d,
            ClassWeights {
                negative: 0.37,
                positive: 1.0,
            },
            &Hyperparameters::new(),
            3,
        )
        .unwrap();
        let text = m.to_json().unwrap();
        let back = ModelArtifact::from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json().unwrap(), text);
        let a = m.predict_proba(&d).unwrap().values;
        let b = back.predict_proba(&d).unwrap().values;
        assert!(
            a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()),
            "{algorithm}"
        );
    }
}

#[test]
fn artifact_version_is_checked() {
    let d = separable(60);
    let m = fit_classifier(
        Algorithm::DecisionTree,
        &d,
        ClassWeights::uniform(),
        &Hyperparameters::new(),
        3,
    )
    .unwrap();
    let text = m.to_json().unwrap().replace(
        &format!("\"format_version\": {ARTIFACT_VERSION}"),
        "\"format_version\": 99",
    );
    assert!(matches!(
        ModelArtifact::from_json(&text),
        Err(MlError::ArtifactVersion { found: 99, .. })
    ));
}

fn prior_fixture() -> Dataset {
    // 100 rows, 22 positive: the prior is exactly 0.22.
    let schema = Schema::new(vec![
        FeatureSpec::continuous("x"),
        FeatureSpec::categorical("c"),
    ]);
    let rows = (0..100)
        .map(|i| vec![(i as f64).into(), if i % 3 == 0 { "a" } else { "b" }.into()])
        .collect();
    let target: Vec<f64> = (0..100)
        .map(|i| if i % 9 < 2 && i < 99 { 1.0 } else { 0.0 })
        .collect();
    let ids = (0..100).map(|i| format!("r{i}")).collect();
    Dataset::new(schema, rows, target, ids).unwrap()
}

#[test]
fn stump_predicts_the_training_prior() {
    let d = prior_fixture();
    let positives = d.target().iter().filter(|&&y| y == 1.0).count();
    assert_eq!(positives, 22);
    let prior = positives as f64 / d.len() as f64;
    let hp: Hyperparameters = [("max_depth".to_string(), 0.0)].into();
    for algorithm in [Algorithm::DecisionTree, Algorithm::RandomForest] {
        let mut hp = hp.clone();
        if algorithm == Algorithm::RandomForest {
            hp.insert("n_trees".into(), 1.0);
        }
        let m = fit_classifier(algorithm, &d, ClassWeights::uniform(), &hp, 1).unwrap();
        let p = m.predict_proba(&d).unwrap().values;
        if algorithm == Algorithm::DecisionTree {
            assert!(p.iter().all(|&v| v == prior), "{algorithm}: {:?}", &p[..3]);
        } else {
            // A single bootstrap stump predicts its resample's prior.
            assert!(p.windows(2).all(|w| w[0] == w[1]));
        }
    }
    let hp: Hyperparameters = [("max_depth".to_string(), 0.0), ("n_trees".to_string(), 5.0)].into();
    let m = fit_classifier(
        Algorithm::GradientBoostedTrees,
        &d,
        ClassWeights::uniform(),
        &hp,
        1,
    )
    .unwrap();
    for v in m.predict_proba(&d).unwrap().values {
        assert!((v - prior).abs() < 1e-12, "{v}");
    }
}

#[test]
fn all_zero_logistic_predicts_one_half() {
    let d = separable(40);
    let enc = OneHotEncoder::fit(&d);
    let width = enc.n_columns();
    let m = ModelArtifact {
        format_version: ARTIFACT_VERSION,
        algorithm: Algorithm::LogisticRegression,
        task: Task::Classify,
        schema: d.schema().clone(),
        schema_fingerprint: d.schema().fingerprint(),
        hyperparameters: Hyperparameters::new(),
        class_weights: None,
        train_seed: 0,
        encoder: Encoder::OneHot(enc),
        params: ModelParams::Logistic(LogisticModel {
            intercept: 0.0,
            coefficients: vec![0.0; width],
            means: vec![0.0; width],
            scales: vec![1.0; width],
        }),
        feature_importances: Vec::new(),
        training: TrainingSummary {
            rows: 0,
            prevalence: None,
            selection_metric: None,
            grid: Vec::new(),
        },
    };
    assert!(m
        .predict_proba(&d)
        .unwrap()
        .values
        .iter()
        .all(|&p| p == 0.5));
}

#[test]
fn unseen_level_falls_back_and_is_counted() {
    let d = separable(120);
    let probe = Dataset::new(
        d.schema().clone(),
        vec![vec![
            3.0.into(),
            4.0.into(),
            FeatureValue::Category("center".into()),
        ]],
        vec![0.0],
        vec!["probe".into()],
    )
    .unwrap();
    for algorithm in Algorithm::ALL {
        let m = fit_classifier(
            algorithm,
            &d,
            ClassWeights::uniform(),
            &Hyperparameters::new(),
            2,
        )
        .unwrap();
        let p = m.predict_proba(&probe).unwrap();
        assert_eq!(p.unknown_levels, 1, "{algorithm}");
        assert!(p.values[0].is_finite() && (0.0..=1.0).contains(&p.values[0]));
    }
}

#[test]
fn schema_mismatch_is_rejected() {
    let d = separable(60);
    let m = fit_classifier(
        Algorithm::DecisionTree,
        &d,
        ClassWeights::uniform(),
        &Hyperparameters::new(),
        3,
    )
    .unwrap();
    let other = d.without_features(&["side"]);
    assert!(matches!(
        m.predict(&other),
        Err(MlError::SchemaMismatch { .. })
    ));
}

#[test]
fn grid_search_matches_explicit_exhaustive_loop() {
    let d = separable(260);
    let seed = 21;
    let weights = ClassWeights::from_prevalence(&d);
    let hp = |pairs: &[(&str, f64)]| -> Hyperparameters {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    };
    let cases = [
        (
            Algorithm::RandomForest,
            Grid::new()
                .with("max_depth", &[1.0, 4.0])
                .with("n_trees", &[3.0, 15.0]),
            vec![
                hp(&[("max_depth", 1.0), ("n_trees", 3.0)]),
                hp(&[("max_depth", 1.0), ("n_trees", 15.0)]),
                hp(&[("max_depth", 4.0), ("n_trees", 3.0)]),
                hp(&[("max_depth", 4.0), ("n_trees", 15.0)]),
            ],
        ),
        (
            Algorithm::GradientBoostedTrees,
            Grid::new()
                .with("learning_rate", &[0.02, 0.3])
                .with("n_trees", &[2.0, 20.0]),
            vec![
                hp(&[("learning_rate", 0.02), ("n_trees", 2.0)]),
                hp(&[("learning_rate", 0.02), ("n_trees", 20.0)]),
                hp(&[("learning_rate", 0.3), ("n_trees", 2.0)]),
                hp(&[("learning_rate", 0.3), ("n_trees", 20.0)]),
            ],
        ),
        (
            Algorithm::LogisticRegression,
            Grid::new().with("c", &[0.001, 0.01, 100.0, 1000.0]),
            vec![
                hp(&[("c", 0.001)]),
                hp(&[("c", 0.01)]),
                hp(&[("c", 100.0)]),
                hp(&[("c", 1000.0)]),
            ],
        ),
    ];
    for (algorithm, grid, cells) in cases {
        for selection in [SelectionMetric::F1Weighted, SelectionMetric::RecallWeighted] {
            let m = train_classifier(
                algorithm,
                &d,
                weights,
                &grid,
                seed,
                TrainOptions { selection },
            )
            .unwrap();

            // Oracle: fit every cell on the inner fold, score, keep the first maximum.
            let (inner, val) = validation_fold(&d, Task::Classify, seed).unwrap();
            let mut scores = Vec::new();
            let mut best: Option<(usize, f64)> = None;
            for (i, cell) in cells.iter().enumerate() {
                let fitted = fit_classifier(algorithm, &inner, weights, cell, seed).unwrap();
                let p = fitted.predict_proba(&val).unwrap().values;
                let s = selection.score(val.target(), &p);
                scores.push(s);
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((i, s));
                }
            }
            let recorded: Vec<f64> = m.training.grid.iter().map(|c| c.score).collect();
            assert_eq!(recorded, scores, "{algorithm}");
            let (best_i, _) = best.unwrap();
            for (k, v) in &cells[best_i] {
                assert_eq!(m.hyperparameters[k], *v, "{algorithm} {k}");
            }
            // The winner is refit on the full training split.
            let refit = fit_classifier(algorithm, &d, weights, &cells[best_i], seed).unwrap();
            assert_eq!(refit.params, m.params, "{algorithm}");
        }
    }
}

#[test]
fn class_zero_weight_shifts_mean_probability_monotonically() {
    // Overlapping classes so the weighting actually matters.
    let schema = Schema::new(vec![FeatureSpec::continuous("x")]);
    let rows: Vec<Vec<FeatureValue>> = (0..200).map(|i| vec![((i % 20) as f64).into()]).collect();
    let target: Vec<f64> = (0..200)
        .map(|i| {
            if (i * 37) % 100 < 25 + (i % 20) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let ids = (0..200).map(|i| i.to_string()).collect();
    let d = Dataset::new(schema, rows, target, ids).unwrap();

    let mean_p = |w: f64| {
        let m = fit_classifier(
            Algorithm::LogisticRegression,
            &d,
            ClassWeights {
                negative: w,
                positive: 1.0,
            },
            &Hyperparameters::new(),
            0,
        )
        .unwrap();
        let p = m.predict_proba(&d).unwrap().values;
        p.iter().sum::<f64>() / p.len() as f64
    };
    let (a, b, c) = (mean_p(0.01), mean_p(0.5), mean_p(1.0));
    assert!(a > b && b > c, "{a} {b} {c}");
    assert!(
        a > 0.9,
        "class-0 weight near zero should push predictions to 1, got {a}"
    );
}

#[test]
fn depth_zero_regressor_predicts_train_mean() {
    let schema = Schema::new(vec![
        FeatureSpec::discrete("age"),
        FeatureSpec::categorical("pos"),
    ]);
    let rows = (0..10)
        .map(|i| {
            vec![
                (20.0 + i as f64).into(),
                if i < 5 { "D" } else { "S" }.into(),
            ]
        })
        .collect();
    let target: Vec<f64> = (0..10).map(|i| i as f64 * 1.5 - 3.0).collect();
    let mean = target.iter().sum::<f64>() / 10.0;
    let ids = (0..10).map(|i| i.to_string()).collect();
    let d = Dataset::new(schema, rows, target, ids).unwrap();
    let hp: Hyperparameters = [("max_depth".to_string(), 0.0)].into();
    let m = fit_regressor(Algorithm::DecisionTree, &d, &hp, 0).unwrap();
    for v in m.predict(&d).unwrap().values {
        assert!((v - mean).abs() < 1e-12);
    }
    let r = evaluate_regressor(&m, &d).unwrap();
    assert!(r.rmse >= r.mae);
}

#[test]
fn tree_regressors_report_normalized_importances() {
    let schema = Schema::new(vec![
        FeatureSpec::continuous("signal"),
        FeatureSpec::discrete("noise"),
        FeatureSpec::categorical("group"),
    ]);
    let rows = (0..120)
        .map(|i| {
            vec![
                ((i % 17) as f64).into(),
                ((i * 7 % 5) as f64).into(),
                if i % 2 == 0 { "a" } else { "b" }.into(),
            ]
        })
        .collect();
    let target = (0..120).map(|i| 3.0 * (i % 17) as f64).collect();
    let ids = (0..120).map(|i| i.to_string()).collect();
    let d = Dataset::new(schema, rows, target, ids).unwrap();
    for algorithm in [
        Algorithm::RandomForest,
        Algorithm::GradientBoostedTrees,
        Algorithm::DecisionTree,
    ] {
        let grid = Grid::new().with("max_depth", &[4.0]);
        let m = train_regressor(algorithm, &d, &grid, 4, TrainOptions::regression()).unwrap();
        let r = evaluate_regressor(&m, &d).unwrap();
        let total: f64 = r.feature_importances.iter().map(|f| f.weight).sum();
        assert!((total - 1.0).abs() < 1e-9, "{algorithm}: {total}");
        assert!(r.feature_importances.iter().all(|f| f.weight >= 0.0));
        assert_eq!(r.rank_of("signal"), Some(1), "{algorithm}");
        assert!(r.rmse >= r.mae);
    }
}
