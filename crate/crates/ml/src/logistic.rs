//! L2-regularized logistic regression fitted by damped Newton iterations.
//!
//! Objective: `Σ w_i · logloss_i + ||β||² / (2C)`, intercept unpenalized.
//! Numeric columns are standardized with training mean and deviation; one-hot
//! columns are used as is.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::encode::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

const MAX_ITER: usize = 100;
const TOL: f64 = 1e-10;

impl LogisticModel {
    pub fn fit(x: &Matrix, numeric: &[bool], y: &[f64], w: &[f64], c: f64) -> Self {
        let n = x.n_rows;
        let p = x.n_cols;
        let mut means = vec![0.0; p];
        let mut scales = vec![1.0; p];
        for j in 0..p {
            if !numeric[j] || n == 0 {
                continue;
            }
            let mean = (0..n).map(|i| x.get(i, j)).sum::<f64>() / n as f64;
            let var = (0..n).map(|i| (x.get(i, j) - mean).powi(2)).sum::<f64>() / n as f64;
            means[j] = mean;
            scales[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }

        // Design matrix with a leading intercept column.
        let design = DMatrix::from_fn(n, p + 1, |i, j| {
            if j == 0 {
                1.0
            } else {
                (x.get(i, j - 1) - means[j - 1]) / scales[j - 1]
            }
        });
        let y = DVector::from_column_slice(y);
        let w = DVector::from_column_slice(w);
        let ridge = 1.0 / c;

        let objective = |beta: &DVector<f64>| -> f64 {
            let z = &design * beta;
            let mut loss = 0.0;
            for i in 0..n {
                // log(1 + e^z) - y z, evaluated stably.
                let zi = z[i];
                let softplus = if zi > 0.0 {
                    zi + (-zi).exp().ln_1p()
                } else {
                    zi.exp().ln_1p()
                };
                loss += w[i] * (softplus - y[i] * zi);
            }
            let penalty: f64 = beta.iter().skip(1).map(|b| b * b).sum::<f64>() * ridge / 2.0;
            loss + penalty
        };

        let mut beta = DVector::zeros(p + 1);
        let mut current = objective(&beta);
        for _ in 0..MAX_ITER {
            let z = &design * &beta;
            let prob = z.map(sigmoid);
            let mut grad = design.transpose() * w.component_mul(&(&prob - &y));
            let mut weighted = design.clone();
            for i in 0..n {
                let curvature = w[i] * prob[i] * (1.0 - prob[i]);
                weighted.row_mut(i).scale_mut(curvature);
            }
            let mut hess = design.transpose() * weighted;
            for j in 1..=p {
                grad[j] += ridge * beta[j];
                hess[(j, j)] += ridge;
            }
            hess[(0, 0)] += 1e-10;
            let Some(chol) = hess.cholesky() else {
                break;
            };
            let step = chol.solve(&grad);

            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let candidate = &beta - &step * t;
                let value = objective(&candidate);
                if value <= current {
                    beta = candidate;
                    let improvement = current - value;
                    current = value;
                    accepted = true;
                    if step.amax() * t < TOL || improvement < TOL * (1.0 + current.abs()) {
                        return Self::from_beta(&beta, means, scales);
                    }
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Self::from_beta(&beta, means, scales)
    }

    fn from_beta(beta: &DVector<f64>, means: Vec<f64>, scales: Vec<f64>) -> Self {
        Self {
            intercept: beta[0],
            coefficients: beta.iter().skip(1).copied().collect(),
            means,
            scales,
        }
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        self.intercept
            + row
                .iter()
                .zip(&self.coefficients)
                .zip(self.means.iter().zip(&self.scales))
                .map(|((x, b), (m, s))| b * (x - m) / s)
                .sum::<f64>()
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }
}
