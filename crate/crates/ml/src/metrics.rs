//! Evaluation metrics for binary classifiers and regressors.

use serde::{Deserialize, Serialize};

/// Threshold used for point metrics.
pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
}

impl Confusion {
    pub fn at_threshold(y: &[f64], p: &[f64], threshold: f64) -> Self {
        let mut c = Confusion::default();
        for (&yi, &pi) in y.iter().zip(p) {
            match (yi == 1.0, pi >= threshold) {
                (true, true) => c.true_positive += 1,
                (false, true) => c.false_positive += 1,
                (false, false) => c.true_negative += 1,
                (true, false) => c.false_negative += 1,
            }
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub f1_weighted: f64,
    pub precision_weighted: f64,
    pub recall_weighted: f64,
    /// `None` when the evaluation set holds a single class.
    pub auc: Option<f64>,
    pub support: [usize; 2],
    pub confusion: Confusion,
    pub pr_curve: Vec<PrPoint>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Support-weighted precision, recall and F1 at the 0.5 threshold, plus the
/// rank AUC and the full precision-recall curve.
pub fn classification_report(y: &[f64], p: &[f64]) -> ClassificationReport {
    let c = Confusion::at_threshold(y, p, DECISION_THRESHOLD);
    let support_pos = c.true_positive + c.false_negative;
    let support_neg = c.true_negative + c.false_positive;
    let n = support_pos + support_neg;

    // Per class: positive class counts TP/FP/FN as usual; for the negative
    // class the roles swap.
    let prec_pos = ratio(c.true_positive, c.true_positive + c.false_positive);
    let rec_pos = ratio(c.true_positive, support_pos);
    let prec_neg = ratio(c.true_negative, c.true_negative + c.false_negative);
    let rec_neg = ratio(c.true_negative, support_neg);

    let weigh = |neg: f64, pos: f64| {
        if n == 0 {
            0.0
        } else {
            (neg * support_neg as f64 + pos * support_pos as f64) / n as f64
        }
    };
    ClassificationReport {
        f1_weighted: weigh(f1(prec_neg, rec_neg), f1(prec_pos, rec_pos)),
        precision_weighted: weigh(prec_neg, prec_pos),
        recall_weighted: weigh(rec_neg, rec_pos),
        auc: roc_auc(y, p),
        support: [support_neg, support_pos],
        confusion: c,
        pr_curve: pr_curve(y, p),
    }
}

/// Mann-Whitney rank statistic with average ranks for ties.
pub fn roc_auc(y: &[f64], p: &[f64]) -> Option<f64> {
    let n_pos = y.iter().filter(|&&v| v == 1.0).count();
    let n_neg = y.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && p[order[j + 1]] == p[order[i]] {
            j += 1;
        }
        // Ranks are 1-based; the tie block i..=j shares their mean.
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            if y[k] == 1.0 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// One point per distinct score, thresholds ascending; a row is predicted
/// positive when its score is at least the threshold.
pub fn pr_curve(y: &[f64], p: &[f64]) -> Vec<PrPoint> {
    let n_pos = y.iter().filter(|&&v| v == 1.0).count();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]));
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let score = p[order[i]];
        while i < order.len() && p[order[i]] == score {
            if y[order[i]] == 1.0 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(PrPoint {
            threshold: score,
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, n_pos),
        });
    }
    points.reverse();
    points
}

pub fn rmse(y: &[f64], pred: &[f64]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    let sse: f64 = y.iter().zip(pred).map(|(a, b)| (a - b).powi(2)).sum();
    (sse / y.len() as f64).sqrt()
}

pub fn mae(y: &[f64], pred: &[f64]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    y.iter().zip(pred).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub rmse: f64,
    pub mae: f64,
    /// Descending by weight; ties keep schema order.
    pub feature_importances: Vec<FeatureImportance>,
}

impl RegressionReport {
    /// 1-based rank of `feature` in the importance list.
    pub fn rank_of(&self, feature: &str) -> Option<usize> {
        self.feature_importances
            .iter()
            .position(|f| f.feature == feature)
            .map(|i| i + 1)
    }
}
