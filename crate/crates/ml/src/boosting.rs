//! Gradient-boosted regression trees with second-order leaf values.
//!
//! Binary classification boosts the log-odds under weighted log loss;
//! regression boosts squared error. Leaf values are stored already scaled by
//! the learning rate, so a prediction is `init + Σ tree(x)`.

use serde::{Deserialize, Serialize};

use crate::artifact::Task;
use crate::encode::Matrix;
use crate::logistic::sigmoid;
use crate::tree::{self, BinnedMatrix, GrowParams, Newton, Node, Tree};

#[derive(Debug, Clone, Copy)]
pub struct BoostParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub min_samples_leaf: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub init: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

const MIN_HESSIAN: f64 = 1e-16;

impl BoostedModel {
    pub fn fit(
        x: &Matrix,
        y: &[f64],
        w: &[f64],
        task: Task,
        params: &BoostParams,
    ) -> (Self, Vec<f64>) {
        let n = x.n_rows;
        let binned = BinnedMatrix::new(x);
        let rows: Vec<usize> = (0..n).collect();
        let w_total: f64 = w.iter().sum();
        let mean = if w_total > 0.0 {
            y.iter().zip(w).map(|(y, w)| y * w).sum::<f64>() / w_total
        } else {
            0.0
        };
        let init = match task {
            Task::Classify => {
                let p = mean.clamp(1e-12, 1.0 - 1e-12);
                (p / (1.0 - p)).ln()
            }
            Task::Regress => mean,
        };
        let grow = GrowParams {
            max_depth: params.max_depth,
            min_samples_leaf: params.min_samples_leaf,
            max_features: None,
        };

        let mut raw = vec![init; n];
        let mut gradient = vec![0.0; n];
        let mut hessian = vec![0.0; n];
        let mut importance = vec![0.0; x.n_cols];
        let mut trees = Vec::with_capacity(params.n_trees);
        for _ in 0..params.n_trees {
            for i in 0..n {
                match task {
                    Task::Classify => {
                        let p = sigmoid(raw[i]);
                        gradient[i] = w[i] * (p - y[i]);
                        hessian[i] = (w[i] * p * (1.0 - p)).max(MIN_HESSIAN);
                    }
                    Task::Regress => {
                        gradient[i] = w[i] * (raw[i] - y[i]);
                        hessian[i] = w[i];
                    }
                }
            }
            let criterion = Newton {
                gradient: &gradient,
                hessian: &hessian,
                l2: params.l2,
            };
            let mut t = tree::grow(&binned, &rows, &criterion, &grow, None, &mut importance);
            for node in t.nodes.iter_mut() {
                if let Node::Leaf { value } = node {
                    *value *= params.learning_rate;
                }
            }
            for (i, r) in raw.iter_mut().enumerate() {
                *r += t.predict_row(x.row(i));
            }
            trees.push(t);
        }
        tree::normalize(&mut importance);
        (
            Self {
                init,
                learning_rate: params.learning_rate,
                trees,
            },
            importance,
        )
    }

    pub fn raw_score(&self, row: &[f64]) -> f64 {
        self.init + self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
    }
}
