//! Trained model artifacts: training entry points, grid search, prediction,
//! evaluation and versioned JSON serialization.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boosting::{BoostParams, BoostedModel};
use crate::dataset::{Dataset, FeatureValue, Schema};
use crate::encode::{OneHotEncoder, TargetStatEncoder};
use crate::error::{MlError, Result};
use crate::forest::{self, ForestModel, ForestParams};
use crate::grid::{Grid, Hyperparameters};
use crate::logistic::LogisticModel;
use crate::metrics::{self, ClassificationReport, FeatureImportance, RegressionReport};
use crate::rng;
use crate::split;
use crate::tree::Tree;

pub const ARTIFACT_VERSION: u32 = 1;

/// Share of the training split held out to score grid cells.
pub const VALIDATION_FRACTION: f64 = 0.2;

/// Smoothing weight of the prior in target statistics.
const TARGET_STAT_SMOOTHING: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    LogisticRegression,
    RandomForest,
    GradientBoostedTrees,
    DecisionTree,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::LogisticRegression,
        Algorithm::RandomForest,
        Algorithm::GradientBoostedTrees,
        Algorithm::DecisionTree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::LogisticRegression => "logistic_regression",
            Algorithm::RandomForest => "random_forest",
            Algorithm::GradientBoostedTrees => "gradient_boosted_trees",
            Algorithm::DecisionTree => "decision_tree",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }

    /// Default values for every tunable parameter.
    pub fn defaults(self) -> Hyperparameters {
        let pairs: &[(&str, f64)] = match self {
            Algorithm::LogisticRegression => &[("c", 1.0)],
            Algorithm::RandomForest => &[
                ("n_trees", 100.0),
                ("max_depth", 6.0),
                ("min_samples_leaf", 1.0),
                ("max_features", 0.0),
            ],
            Algorithm::GradientBoostedTrees => &[
                ("n_trees", 100.0),
                ("max_depth", 6.0),
                ("learning_rate", 0.1),
                ("l2", 3.0),
                ("min_samples_leaf", 1.0),
            ],
            Algorithm::DecisionTree => &[("max_depth", 6.0), ("min_samples_leaf", 1.0)],
        };
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classify,
    Regress,
}

impl Task {
    fn name(self) -> &'static str {
        match self {
            Task::Classify => "classification",
            Task::Regress => "regression",
        }
    }
}

/// Per-class sample weights. Class 1 conventionally keeps weight 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub negative: f64,
    pub positive: f64,
}

impl ClassWeights {
    pub fn uniform() -> Self {
        Self {
            negative: 1.0,
            positive: 1.0,
        }
    }

    /// Class-0 weight equal to the positive prevalence of `train`.
    pub fn from_prevalence(train: &Dataset) -> Self {
        Self {
            negative: train.prevalence().unwrap_or(1.0),
            positive: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |w: f64| w.is_finite() && w > 0.0;
        if ok(self.negative) && ok(self.positive) {
            Ok(())
        } else {
            Err(MlError::InvalidClassWeight {
                negative: self.negative,
                positive: self.positive,
            })
        }
    }

    fn sample_weights(&self, target: &[f64]) -> Vec<f64> {
        target
            .iter()
            .map(|&y| {
                if y == 1.0 {
                    self.positive
                } else {
                    self.negative
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMetric {
    F1Weighted,
    RecallWeighted,
    Mae,
    Rmse,
}

impl SelectionMetric {
    fn task(self) -> Task {
        match self {
            SelectionMetric::F1Weighted | SelectionMetric::RecallWeighted => Task::Classify,
            SelectionMetric::Mae | SelectionMetric::Rmse => Task::Regress,
        }
    }

    /// Score where larger is better.
    pub fn score(self, y: &[f64], pred: &[f64]) -> f64 {
        match self {
            SelectionMetric::F1Weighted => metrics::classification_report(y, pred).f1_weighted,
            SelectionMetric::RecallWeighted => {
                metrics::classification_report(y, pred).recall_weighted
            }
            SelectionMetric::Mae => -metrics::mae(y, pred),
            SelectionMetric::Rmse => -metrics::rmse(y, pred),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Encoder {
    OneHot(OneHotEncoder),
    TargetStats(TargetStatEncoder),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Logistic(LogisticModel),
    Forest(ForestModel),
    Boosted(BoostedModel),
    Tree { tree: Tree },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCellScore {
    pub hyperparameters: Hyperparameters,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub rows: usize,
    pub prevalence: Option<f64>,
    pub selection_metric: Option<SelectionMetric>,
    pub grid: Vec<GridCellScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub algorithm: Algorithm,
    pub task: Task,
    pub schema: Schema,
    pub schema_fingerprint: String,
    pub hyperparameters: Hyperparameters,
    pub class_weights: Option<ClassWeights>,
    pub train_seed: u64,
    pub encoder: Encoder,
    pub params: ModelParams,
    /// Aggregated per schema feature, descending; empty for linear models.
    pub feature_importances: Vec<FeatureImportance>,
    pub training: TrainingSummary,
}

/// Model output plus the number of categorical levels that were unseen in
/// training and fell back to the reserved unknown slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub values: Vec<f64>,
    pub unknown_levels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub selection: SelectionMetric,
}

impl TrainOptions {
    pub fn classification() -> Self {
        Self {
            selection: SelectionMetric::F1Weighted,
        }
    }

    pub fn regression() -> Self {
        Self {
            selection: SelectionMetric::Mae,
        }
    }
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

fn param(hp: &Hyperparameters, defaults: &Hyperparameters, name: &str) -> f64 {
    hp.get(name).copied().unwrap_or(defaults[name])
}

fn count_param(hp: &Hyperparameters, defaults: &Hyperparameters, name: &str) -> Result<usize> {
    let v = param(hp, defaults, name);
    if v.is_finite() && v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(MlError::InvalidHyperparameter {
            name: name.to_string(),
            value: v,
            reason: "must be a non-negative integer",
        })
    }
}

fn positive_param(hp: &Hyperparameters, defaults: &Hyperparameters, name: &str) -> Result<f64> {
    let v = param(hp, defaults, name);
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(MlError::InvalidHyperparameter {
            name: name.to_string(),
            value: v,
            reason: "must be positive",
        })
    }
}

fn check_known(algorithm: Algorithm, hp: &Hyperparameters) -> Result<Hyperparameters> {
    let defaults = algorithm.defaults();
    for (k, v) in hp {
        if !defaults.contains_key(k) {
            return Err(MlError::InvalidHyperparameter {
                name: k.clone(),
                value: *v,
                reason: "not a parameter of this algorithm",
            });
        }
    }
    let mut resolved = defaults;
    resolved.extend(hp.iter().map(|(k, v)| (k.clone(), *v)));
    Ok(resolved)
}

fn check_task(algorithm: Algorithm, task: Task) -> Result<()> {
    if algorithm == Algorithm::LogisticRegression && task == Task::Regress {
        return Err(MlError::UnsupportedAlgorithm {
            algorithm: algorithm.name(),
            task: task.name(),
        });
    }
    Ok(())
}

fn aggregate_importance(
    schema: &Schema,
    owners: &[usize],
    by_column: &[f64],
) -> Vec<FeatureImportance> {
    let mut per_feature = vec![0.0; schema.len()];
    for (&owner, &v) in owners.iter().zip(by_column) {
        per_feature[owner] += v;
    }
    let mut out: Vec<FeatureImportance> = schema
        .features()
        .iter()
        .zip(per_feature)
        .map(|(f, weight)| FeatureImportance {
            feature: f.name.clone(),
            weight,
        })
        .collect();
    out.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    out
}

/// Fit a single model with fixed hyperparameters on all of `train`.
fn fit(
    algorithm: Algorithm,
    task: Task,
    train: &Dataset,
    weights: Option<ClassWeights>,
    hp: &Hyperparameters,
    seed: u64,
) -> Result<ModelArtifact> {
    check_task(algorithm, task)?;
    if train.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    let resolved = check_known(algorithm, hp)?;
    let d = &resolved;
    let y = train.target();
    let w = match weights {
        Some(cw) => cw.sample_weights(y),
        None => vec![1.0; y.len()],
    };

    let schema = train.schema();
    let (encoder, params, importance) = match algorithm {
        Algorithm::LogisticRegression => {
            let enc = OneHotEncoder::fit(train);
            let (x, _) = enc.transform(train.rows());
            let model = LogisticModel::fit(
                &x,
                &enc.numeric_columns(),
                y,
                &w,
                positive_param(d, d, "c")?,
            );
            (
                Encoder::OneHot(enc),
                ModelParams::Logistic(model),
                Vec::new(),
            )
        }
        Algorithm::RandomForest => {
            let enc = OneHotEncoder::fit(train);
            let (x, _) = enc.transform(train.rows());
            let max_features = count_param(d, d, "max_features")?;
            let fp = ForestParams {
                n_trees: count_param(d, d, "n_trees")?.max(1),
                max_depth: count_param(d, d, "max_depth")?,
                min_samples_leaf: count_param(d, d, "min_samples_leaf")?.max(1),
                max_features: (max_features > 0).then_some(max_features),
            };
            let (model, imp) =
                ForestModel::fit(&x, y, &w, task, &fp, rng::derive_seed(seed, "forest"));
            let importance = aggregate_importance(schema, &enc.column_owners(), &imp);
            (Encoder::OneHot(enc), ModelParams::Forest(model), importance)
        }
        Algorithm::DecisionTree => {
            let enc = OneHotEncoder::fit(train);
            let (x, _) = enc.transform(train.rows());
            let (tree, imp) = forest::fit_tree(
                &x,
                y,
                &w,
                task,
                count_param(d, d, "max_depth")?,
                count_param(d, d, "min_samples_leaf")?.max(1),
            );
            let importance = aggregate_importance(schema, &enc.column_owners(), &imp);
            (Encoder::OneHot(enc), ModelParams::Tree { tree }, importance)
        }
        Algorithm::GradientBoostedTrees => {
            let enc = TargetStatEncoder::fit(train, TARGET_STAT_SMOOTHING);
            let x = enc.encode_training(train, rng::derive_seed(seed, "boosting"));
            let bp = BoostParams {
                n_trees: count_param(d, d, "n_trees")?,
                max_depth: count_param(d, d, "max_depth")?,
                learning_rate: positive_param(d, d, "learning_rate")?,
                l2: param(d, d, "l2").max(0.0),
                min_samples_leaf: count_param(d, d, "min_samples_leaf")?.max(1),
            };
            let (model, imp) = BoostedModel::fit(&x, y, &w, task, &bp);
            let owners: Vec<usize> = (0..schema.len()).collect();
            let importance = aggregate_importance(schema, &owners, &imp);
            (
                Encoder::TargetStats(enc),
                ModelParams::Boosted(model),
                importance,
            )
        }
    };

    Ok(ModelArtifact {
        format_version: ARTIFACT_VERSION,
        algorithm,
        task,
        schema: schema.clone(),
        schema_fingerprint: schema.fingerprint(),
        hyperparameters: resolved,
        class_weights: weights,
        train_seed: seed,
        encoder,
        params,
        feature_importances: importance,
        training: TrainingSummary {
            rows: train.len(),
            prevalence: (task == Task::Classify)
                .then(|| train.prevalence())
                .flatten(),
            selection_metric: None,
            grid: Vec::new(),
        },
    })
}

fn check_classification_input(train: &Dataset, weights: &ClassWeights) -> Result<()> {
    if train.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    train.check_binary()?;
    let positives = train.target().iter().filter(|&&y| y == 1.0).count();
    if positives == 0 || positives == train.len() {
        return Err(MlError::SingleClass);
    }
    weights.validate()
}

/// Fit one classifier with fixed hyperparameters (no search).
pub fn fit_classifier(
    algorithm: Algorithm,
    train: &Dataset,
    weights: ClassWeights,
    hyperparameters: &Hyperparameters,
    seed: u64,
) -> Result<ModelArtifact> {
    check_classification_input(train, &weights)?;
    fit(
        algorithm,
        Task::Classify,
        train,
        Some(weights),
        hyperparameters,
        seed,
    )
}

/// Fit one regressor with fixed hyperparameters (no search).
pub fn fit_regressor(
    algorithm: Algorithm,
    train: &Dataset,
    hyperparameters: &Hyperparameters,
    seed: u64,
) -> Result<ModelArtifact> {
    fit(algorithm, Task::Regress, train, None, hyperparameters, seed)
}

/// The inner split used to score grid cells: stratified for classification,
/// shuffled for regression.
pub fn validation_fold(train: &Dataset, task: Task, seed: u64) -> Result<(Dataset, Dataset)> {
    let s = rng::derive_seed(seed, "grid-validation");
    match task {
        Task::Classify => split::stratified_split(train, VALIDATION_FRACTION, s),
        Task::Regress => split::shuffle_split(train, VALIDATION_FRACTION, s),
    }
}

#[allow(clippy::too_many_arguments)]
fn search(
    algorithm: Algorithm,
    task: Task,
    train: &Dataset,
    weights: Option<ClassWeights>,
    grid: &Grid,
    seed: u64,
    opts: TrainOptions,
) -> Result<ModelArtifact> {
    check_task(algorithm, task)?;
    if opts.selection.task() != task {
        return Err(MlError::WrongTask {
            expected: task.name(),
            requested: opts.selection.task().name(),
        });
    }
    let cells = grid.cells()?;
    for c in &cells {
        check_known(algorithm, c)?;
    }
    let (inner, validation) = validation_fold(train, task, seed)?;

    let scored: Vec<Result<GridCellScore>> = cells
        .par_iter()
        .map(|hp| {
            let m = fit(algorithm, task, &inner, weights, hp, seed)?;
            let pred = m.predict_rows(validation.rows()).values;
            Ok(GridCellScore {
                hyperparameters: hp.clone(),
                score: opts.selection.score(validation.target(), &pred),
            })
        })
        .collect();
    let scored: Vec<GridCellScore> = scored.into_iter().collect::<Result<_>>()?;

    // First cell wins ties.
    let mut best = 0;
    for (i, s) in scored.iter().enumerate() {
        if s.score > scored[best].score {
            best = i;
        }
    }
    let mut artifact = fit(
        algorithm,
        task,
        train,
        weights,
        &scored[best].hyperparameters,
        seed,
    )?;
    artifact.training.selection_metric = Some(opts.selection);
    artifact.training.grid = scored;
    Ok(artifact)
}

/// Exhaustive grid search on an internal validation fold, then a refit of
/// the winning cell on the full training set.
pub fn train_classifier(
    algorithm: Algorithm,
    train: &Dataset,
    weights: ClassWeights,
    grid: &Grid,
    seed: u64,
    opts: TrainOptions,
) -> Result<ModelArtifact> {
    check_classification_input(train, &weights)?;
    search(
        algorithm,
        Task::Classify,
        train,
        Some(weights),
        grid,
        seed,
        opts,
    )
}

pub fn train_regressor(
    algorithm: Algorithm,
    train: &Dataset,
    grid: &Grid,
    seed: u64,
    opts: TrainOptions,
) -> Result<ModelArtifact> {
    if train.len() < 2 {
        return Err(MlError::EmptyDataset);
    }
    search(algorithm, Task::Regress, train, None, grid, seed, opts)
}

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

impl ModelArtifact {
    pub fn check_schema(&self, schema: &Schema) -> Result<()> {
        let found = schema.fingerprint();
        if found != self.schema_fingerprint {
            return Err(MlError::SchemaMismatch {
                expected: self.schema_fingerprint.clone(),
                found,
            });
        }
        Ok(())
    }

    /// Raw rows in this model's schema order; no fingerprint check.
    pub fn predict_rows(&self, rows: &[Vec<FeatureValue>]) -> Prediction {
        let (x, unknown_levels) = match &self.encoder {
            Encoder::OneHot(e) => e.transform(rows),
            Encoder::TargetStats(e) => e.transform(rows),
        };
        let values = (0..x.n_rows)
            .map(|i| {
                let row = x.row(i);
                let v = match &self.params {
                    ModelParams::Logistic(m) => m.predict_row(row),
                    ModelParams::Forest(m) => m.predict_row(row),
                    ModelParams::Tree { tree } => tree.predict_row(row),
                    ModelParams::Boosted(m) => match self.task {
                        Task::Classify => crate::logistic::sigmoid(m.raw_score(row)),
                        Task::Regress => m.raw_score(row),
                    },
                };
                match self.task {
                    Task::Classify => v.clamp(0.0, 1.0),
                    Task::Regress => v,
                }
            })
            .collect();
        Prediction {
            values,
            unknown_levels,
        }
    }

    pub fn predict(&self, d: &Dataset) -> Result<Prediction> {
        self.check_schema(d.schema())?;
        Ok(self.predict_rows(d.rows()))
    }

    pub fn predict_proba(&self, d: &Dataset) -> Result<Prediction> {
        if self.task != Task::Classify {
            return Err(MlError::WrongTask {
                expected: self.task.name(),
                requested: Task::Classify.name(),
            });
        }
        self.predict(d)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: ModelArtifact = serde_json::from_str(text)?;
        if m.format_version != ARTIFACT_VERSION {
            return Err(MlError::ArtifactVersion {
                found: m.format_version,
                expected: ARTIFACT_VERSION,
            });
        }
        Ok(m)
    }
}

pub fn evaluate_classifier(m: &ModelArtifact, test: &Dataset) -> Result<ClassificationReport> {
    if test.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    test.check_binary()?;
    let p = m.predict_proba(test)?;
    Ok(metrics::classification_report(test.target(), &p.values))
}

pub fn evaluate_regressor(m: &ModelArtifact, test: &Dataset) -> Result<RegressionReport> {
    if test.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    if m.task != Task::Regress {
        return Err(MlError::WrongTask {
            expected: m.task.name(),
            requested: Task::Regress.name(),
        });
    }
    let pred = m.predict(test)?;
    Ok(RegressionReport {
        rmse: metrics::rmse(test.target(), &pred.values),
        mae: metrics::mae(test.target(), &pred.values),
        feature_importances: m.feature_importances.clone(),
    })
}
