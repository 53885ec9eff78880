//! Histogram-based decision-tree growth shared by every tree learner.
//!
//! Columns are discretized once into at most [`MAX_BINS`] bins. When a column
//! has few distinct values each value gets its own bin and the cut points are
//! the midpoints between neighbours, which makes the search identical to exact
//! CART. Split quality comes from a [`Criterion`]: weighted Gini for
//! classification forests, weighted variance for regression trees, and the
//! second-order gain for boosting.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encode::Matrix;

pub const MAX_BINS: usize = 256;

/// `[weight, first moment, second moment, row count]` accumulated per node.
pub type Stats = [f64; 4];

fn add(a: &mut Stats, b: &Stats) {
    for k in 0..4 {
        a[k] += b[k];
    }
}

fn sub(a: &Stats, b: &Stats) -> Stats {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

pub trait Criterion: Sync {
    fn row_stats(&self, row: usize) -> Stats;
    /// Higher is better; a split gains `score(L) + score(R) - score(parent)`.
    fn node_score(&self, s: &Stats) -> f64;
    fn leaf_value(&self, s: &Stats) -> f64;
}

/// Weighted Gini impurity on a 0/1 target. Leaves hold the weighted share
/// of positives.
pub struct Gini<'a> {
    pub target: &'a [f64],
    pub weight: &'a [f64],
}

impl Criterion for Gini<'_> {
    fn row_stats(&self, row: usize) -> Stats {
        let w = self.weight[row];
        [w, w * self.target[row], 0.0, 1.0]
    }

    fn node_score(&self, s: &Stats) -> f64 {
        if s[0] <= 0.0 {
            return 0.0;
        }
        -2.0 * s[1] * (s[0] - s[1]) / s[0]
    }

    fn leaf_value(&self, s: &Stats) -> f64 {
        if s[0] <= 0.0 {
            0.0
        } else {
            (s[1] / s[0]).clamp(0.0, 1.0)
        }
    }
}

/// Weighted squared error. The score drops the constant `Σ w y²` term.
pub struct Variance<'a> {
    pub target: &'a [f64],
    pub weight: &'a [f64],
}

impl Criterion for Variance<'_> {
    fn row_stats(&self, row: usize) -> Stats {
        let w = self.weight[row];
        let y = self.target[row];
        [w, w * y, w * y * y, 1.0]
    }

    fn node_score(&self, s: &Stats) -> f64 {
        if s[0] <= 0.0 {
            return 0.0;
        }
        s[1] * s[1] / s[0]
    }

    fn leaf_value(&self, s: &Stats) -> f64 {
        if s[0] <= 0.0 {
            0.0
        } else {
            s[1] / s[0]
        }
    }
}

/// Second-order boosting objective with L2 leaf regularization.
pub struct Newton<'a> {
    pub gradient: &'a [f64],
    pub hessian: &'a [f64],
    pub l2: f64,
}

impl Criterion for Newton<'_> {
    fn row_stats(&self, row: usize) -> Stats {
        [self.hessian[row], self.gradient[row], 0.0, 1.0]
    }

    fn node_score(&self, s: &Stats) -> f64 {
        s[1] * s[1] / (s[0] + self.l2)
    }

    fn leaf_value(&self, s: &Stats) -> f64 {
        -s[1] / (s[0] + self.l2)
    }
}

/// Pre-binned copy of a feature matrix.
#[derive(Debug, Clone)]
pub struct BinnedMatrix {
    n_rows: usize,
    bins: Vec<Vec<u16>>,
    cuts: Vec<Vec<f64>>,
}

impl BinnedMatrix {
    pub fn new(m: &Matrix) -> Self {
        let mut bins = Vec::with_capacity(m.n_cols);
        let mut cuts = Vec::with_capacity(m.n_cols);
        for j in 0..m.n_cols {
            let column: Vec<f64> = (0..m.n_rows).map(|i| m.get(i, j)).collect();
            let c = cut_points(&column);
            bins.push(
                column
                    .iter()
                    .map(|&x| c.partition_point(|&cut| cut < x) as u16)
                    .collect(),
            );
            cuts.push(c);
        }
        Self {
            n_rows: m.n_rows,
            bins,
            cuts,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.bins.len()
    }
}

fn cut_points(column: &[f64]) -> Vec<f64> {
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for v in sorted {
        match distinct.last_mut() {
            Some((last, count)) if *last == v => *count += 1,
            _ => distinct.push((v, 1)),
        }
    }
    let midpoint = |k: usize| distinct[k].0 + (distinct[k + 1].0 - distinct[k].0) / 2.0;
    if distinct.len() <= MAX_BINS {
        return (0..distinct.len().saturating_sub(1))
            .map(midpoint)
            .collect();
    }
    // Equal-frequency cuts over the distinct values.
    let step = column.len() as f64 / MAX_BINS as f64;
    let mut next = step;
    let mut seen = 0usize;
    let mut cuts = Vec::with_capacity(MAX_BINS - 1);
    for (k, &(_, count)) in distinct.iter().enumerate().take(distinct.len() - 1) {
        seen += count;
        if seen as f64 >= next && cuts.len() < MAX_BINS - 1 {
            cuts.push(midpoint(k));
            while next <= seen as f64 {
                next += step;
            }
        }
    }
    cuts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GrowParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Random feature subset drawn at every node (forests); `None` = all.
    pub max_features: Option<usize>,
}

const MIN_GAIN: f64 = 1e-12;

/// Grow one tree on `rows` (indices may repeat, e.g. bootstrap draws).
/// Split gains are added to `importance` by column.
pub fn grow<C: Criterion>(
    x: &BinnedMatrix,
    rows: &[usize],
    criterion: &C,
    params: &GrowParams,
    mut rng: Option<&mut ChaCha8Rng>,
    importance: &mut [f64],
) -> Tree {
    let mut nodes = Vec::new();
    let mut work = rows.to_vec();
    build(
        x, &mut work, criterion, params, &mut rng, importance, 0, &mut nodes,
    );
    Tree { nodes }
}

struct BestSplit {
    feature: usize,
    bin: usize,
    gain: f64,
}

#[allow(clippy::too_many_arguments)]
fn build<C: Criterion>(
    x: &BinnedMatrix,
    rows: &mut [usize],
    criterion: &C,
    params: &GrowParams,
    rng: &mut Option<&mut ChaCha8Rng>,
    importance: &mut [f64],
    depth: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let mut total: Stats = [0.0; 4];
    for &r in rows.iter() {
        add(&mut total, &criterion.row_stats(r));
    }
    let me = nodes.len();
    nodes.push(Node::Leaf {
        value: criterion.leaf_value(&total),
    });

    let min_leaf = params.min_samples_leaf.max(1);
    if depth >= params.max_depth || rows.len() < 2 * min_leaf {
        return me;
    }

    let candidates = candidate_features(x.n_cols(), params.max_features, rng);
    let parent_score = criterion.node_score(&total);
    let mut best: Option<BestSplit> = None;
    for &f in &candidates {
        let n_bins = x.cuts[f].len() + 1;
        if n_bins < 2 {
            continue;
        }
        let mut hist = vec![[0.0; 4]; n_bins];
        let col = &x.bins[f];
        for &r in rows.iter() {
            add(&mut hist[col[r] as usize], &criterion.row_stats(r));
        }
        let mut left: Stats = [0.0; 4];
        for (b, h) in hist.iter().enumerate().take(n_bins - 1) {
            add(&mut left, h);
            let right = sub(&total, &left);
            if left[3] < min_leaf as f64 || right[3] < min_leaf as f64 {
                continue;
            }
            if left[0] <= 0.0 || right[0] <= 0.0 {
                continue;
            }
            let gain = criterion.node_score(&left) + criterion.node_score(&right) - parent_score;
            if gain > MIN_GAIN && best.as_ref().is_none_or(|bs| gain > bs.gain) {
                best = Some(BestSplit {
                    feature: f,
                    bin: b,
                    gain,
                });
            }
        }
    }

    let Some(split) = best else {
        return me;
    };
    importance[split.feature] += split.gain;

    let col = &x.bins[split.feature];
    let (mut l, mut r): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&row| (col[row] as usize) <= split.bin);
    let left = build(
        x,
        &mut l,
        criterion,
        params,
        rng,
        importance,
        depth + 1,
        nodes,
    );
    let right = build(
        x,
        &mut r,
        criterion,
        params,
        rng,
        importance,
        depth + 1,
        nodes,
    );
    nodes[me] = Node::Split {
        feature: split.feature,
        threshold: x.cuts[split.feature][split.bin],
        left,
        right,
    };
    me
}

fn candidate_features(
    n: usize,
    max_features: Option<usize>,
    rng: &mut Option<&mut ChaCha8Rng>,
) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    match (max_features, rng.as_deref_mut()) {
        (Some(k), Some(rng)) if k < n => {
            // Partial Fisher-Yates, then restore column order.
            for i in 0..k {
                let j = rng.gen_range(i..n);
                all.swap(i, j);
            }
            all.truncate(k);
            all.sort_unstable();
            all
        }
        _ => all,
    }
}

/// Normalize raw gains to sum to one (all zeros stay zero).
pub fn normalize(importance: &mut [f64]) {
    let total: f64 = importance.iter().sum();
    if total > 0.0 {
        for v in importance.iter_mut() {
            *v /= total;
        }
    }
}
