//! Random forests and single CART trees.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifact::Task;
use crate::encode::Matrix;
use crate::rng;
use crate::tree::{self, BinnedMatrix, Gini, GrowParams, Tree, Variance};

#[derive(Debug, Clone, Copy)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features tried per node; `None` means `ceil(sqrt(n_features))`.
    pub max_features: Option<usize>,
}

/// Averaging ensemble. Classification trees hold the weighted positive share
/// per leaf, so the forest output is the mean leaf class frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
}

impl ForestModel {
    pub fn fit(
        x: &Matrix,
        y: &[f64],
        w: &[f64],
        task: Task,
        params: &ForestParams,
        seed: u64,
    ) -> (Self, Vec<f64>) {
        let binned = BinnedMatrix::new(x);
        let n = x.n_rows;
        let max_features = params
            .max_features
            .unwrap_or_else(|| (x.n_cols as f64).sqrt().ceil() as usize)
            .clamp(1, x.n_cols.max(1));
        let grow = GrowParams {
            max_depth: params.max_depth,
            min_samples_leaf: params.min_samples_leaf,
            max_features: Some(max_features),
        };

        let fitted: Vec<(Tree, Vec<f64>)> = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                use rand::Rng;
                let mut r = rng::indexed_stream(seed, "forest-tree", t as u64);
                let rows: Vec<usize> = (0..n).map(|_| r.gen_range(0..n)).collect();
                let mut imp = vec![0.0; x.n_cols];
                let tree = match task {
                    Task::Classify => tree::grow(
                        &binned,
                        &rows,
                        &Gini {
                            target: y,
                            weight: w,
                        },
                        &grow,
                        Some(&mut r),
                        &mut imp,
                    ),
                    Task::Regress => tree::grow(
                        &binned,
                        &rows,
                        &Variance {
                            target: y,
                            weight: w,
                        },
                        &grow,
                        Some(&mut r),
                        &mut imp,
                    ),
                };
                tree::normalize(&mut imp);
                (tree, imp)
            })
            .collect();

        let mut importance = vec![0.0; x.n_cols];
        let mut trees = Vec::with_capacity(fitted.len());
        for (tree, imp) in fitted {
            for (a, b) in importance.iter_mut().zip(&imp) {
                *a += b;
            }
            trees.push(tree);
        }
        tree::normalize(&mut importance);
        (Self { trees }, importance)
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        if self.trees.is_empty() {
            return 0.0;
        }
        self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / self.trees.len() as f64
    }
}

/// Single CART tree on all rows and all features.
pub fn fit_tree(
    x: &Matrix,
    y: &[f64],
    w: &[f64],
    task: Task,
    max_depth: usize,
    min_samples_leaf: usize,
) -> (Tree, Vec<f64>) {
    let binned = BinnedMatrix::new(x);
    let rows: Vec<usize> = (0..x.n_rows).collect();
    let grow = GrowParams {
        max_depth,
        min_samples_leaf,
        max_features: None,
    };
    let mut imp = vec![0.0; x.n_cols];
    let tree = match task {
        Task::Classify => tree::grow(
            &binned,
            &rows,
            &Gini {
                target: y,
                weight: w,
            },
            &grow,
            None,
            &mut imp,
        ),
        Task::Regress => tree::grow(
            &binned,
            &rows,
            &Variance {
                target: y,
                weight: w,
            },
            &grow,
            None,
            &mut imp,
        ),
    };
    tree::normalize(&mut imp);
    (tree, imp)
}
