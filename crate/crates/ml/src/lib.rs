//! Self-contained training and evaluation engine: logistic regression,
//! CART trees, random forests and gradient-boosted trees over typed tabular
//! datasets, with stratified splitting, grid search, class weighting and
//! support-weighted metrics.

pub mod artifact;
pub mod boosting;
pub mod dataset;
pub mod encode;
pub mod error;
pub mod forest;
pub mod grid;
pub mod logistic;
pub mod metrics;
pub mod rng;
pub mod split;
pub mod tree;

pub use artifact::{
    evaluate_classifier, evaluate_regressor, fit_classifier, fit_regressor, train_classifier,
    train_regressor, validation_fold, Algorithm, ClassWeights, ModelArtifact, Prediction,
    SelectionMetric, Task, TrainOptions,
};
pub use dataset::{Dataset, FeatureKind, FeatureSpec, FeatureValue, Schema};
pub use error::{MlError, Result};
pub use grid::{Grid, Hyperparameters};
pub use metrics::{ClassificationReport, FeatureImportance, PrPoint, RegressionReport};
pub use split::{shuffle_split, stratified_split};
