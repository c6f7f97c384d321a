//! Squared-error gradient-boosted regression trees.
//!
//! Each tree fits the current residuals with greedy variance-reduction
//! splits on axis-aligned thresholds; leaves hold the mean residual. The
//! ensemble predicts `base + lr * Σ leaf`. Split search is exact: per node,
//! every boundary between distinct sorted feature values is scored. Ties keep
//! the first candidate seen (lowest feature index, then lowest threshold).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{Location, SpatialDataset, SpatialRecord};
use crate::predictors::Predictor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtHyper {
    pub trees: usize,
    pub depth: usize,
    pub learning_rate: f64,
    /// Minimum number of samples in each child of a split.
    pub min_samples: usize,
}

impl Default for GbtHyper {
    fn default() -> Self {
        Self {
            trees: 100,
            depth: 6,
            learning_rate: 0.3,
            min_samples: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn leaf_value(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf(_)))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    base_score: f64,
    learning_rate: f64,
    n_features: usize,
    /// Whether location coordinates are appended to the dataset features.
    include_coords: bool,
    trees: Vec<Tree>,
}

impl GbtModel {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn base_score(&self) -> f64 {
        self.base_score
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.base_score
            + self
                .trees
                .iter()
                .map(|t| self.learning_rate * t.leaf_value(x))
                .sum::<f64>()
    }

    /// Prediction using only the first `n` trees.
    pub fn predict_row_truncated(&self, x: &[f64], n: usize) -> f64 {
        self.base_score
            + self.trees[..n.min(self.trees.len())]
                .iter()
                .map(|t| self.learning_rate * t.leaf_value(x))
                .sum::<f64>()
    }
}

/// Design row for a record: dataset features, then `x, y` when requested.
pub fn feature_row(rec: &SpatialRecord, include_coords: bool) -> Vec<f64> {
    let mut row = rec.features.clone();
    if include_coords {
        row.push(rec.loc.x);
        row.push(rec.loc.y);
    }
    row
}

/// Fits a model on dataset features (plus coordinates when `include_coords`).
pub fn train_gbt_dataset(
    train: &SpatialDataset,
    hyper: GbtHyper,
    include_coords: bool,
) -> Result<GbtModel> {
    let rows: Vec<Vec<f64>> = train
        .records()
        .iter()
        .map(|r| feature_row(r, include_coords))
        .collect();
    let mut model = train_gbt(&rows, &train.targets(), hyper)?;
    model.n_features = train.n_features();
    model.include_coords = include_coords;
    Ok(model)
}

pub fn train_gbt(rows: &[Vec<f64>], targets: &[f64], hyper: GbtHyper) -> Result<GbtModel> {
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if rows.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: rows.len(),
            right: targets.len(),
        });
    }
    let n_cols = rows[0].len();
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(Error::InvalidArgument("ragged feature rows".into()));
    }
    if !(hyper.learning_rate > 0.0) || hyper.min_samples == 0 {
        return Err(Error::InvalidArgument(
            "learning rate must be positive and min_samples at least 1".into(),
        ));
    }
    let n = rows.len();
    let base_score = crate::stats::mean(targets);
    let mut pred = vec![base_score; n];

    // Column-major copy and one global sort per feature.
    let cols: Vec<Vec<f64>> = (0..n_cols)
        .map(|f| rows.iter().map(|r| r[f]).collect())
        .collect();
    let sorted: Vec<Vec<usize>> = cols
        .iter()
        .map(|c| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| c[a].total_cmp(&c[b]).then(a.cmp(&b)));
            idx
        })
        .collect();

    let mut trees = Vec::with_capacity(hyper.trees);
    let mut residual = vec![0.0; n];
    for _ in 0..hyper.trees {
        for i in 0..n {
            residual[i] = targets[i] - pred[i];
        }
        let mut builder = TreeBuilder {
            cols: &cols,
            residual: &residual,
            hyper,
            nodes: Vec::new(),
            side: vec![false; n],
        };
        let all: Vec<usize> = (0..n).collect();
        builder.grow(all, sorted.clone(), 0);
        let tree = Tree {
            nodes: builder.nodes,
        };
        for (i, p) in pred.iter_mut().enumerate() {
            *p += hyper.learning_rate * tree.leaf_value(&rows[i]);
        }
        trees.push(tree);
    }
    Ok(GbtModel {
        base_score,
        learning_rate: hyper.learning_rate,
        n_features: n_cols,
        include_coords: false,
        trees,
    })
}

struct TreeBuilder<'a> {
    cols: &'a [Vec<f64>],
    residual: &'a [f64],
    hyper: GbtHyper,
    nodes: Vec<Node>,
    /// Scratch: true when a sample goes left at the split being applied.
    side: Vec<bool>,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl TreeBuilder<'_> {
    /// Grows the subtree for `members`; `sorted[f]` lists the members in
    /// ascending order of feature `f`. Returns the node index.
    fn grow(&mut self, members: Vec<usize>, sorted: Vec<Vec<usize>>, depth: usize) -> usize {
        let n = members.len();
        let total: f64 = members.iter().map(|&i| self.residual[i]).sum();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(total / n as f64));
        if depth >= self.hyper.depth || n < 2 * self.hyper.min_samples {
            return id;
        }
        let Some(best) = self.best_split(&sorted, total) else {
            return id;
        };

        let col = &self.cols[best.feature];
        for &i in &members {
            self.side[i] = col[i] <= best.threshold;
        }
        let (left_m, right_m): (Vec<usize>, Vec<usize>) =
            members.iter().partition(|&&i| self.side[i]);
        let mut left_s = Vec::with_capacity(sorted.len());
        let mut right_s = Vec::with_capacity(sorted.len());
        for order in sorted {
            let (l, r): (Vec<usize>, Vec<usize>) = order.into_iter().partition(|&i| self.side[i]);
            left_s.push(l);
            right_s.push(r);
        }
        let left = self.grow(left_m, left_s, depth + 1);
        let right = self.grow(right_m, right_s, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    fn best_split(&self, sorted: &[Vec<usize>], total: f64) -> Option<BestSplit> {
        let min = self.hyper.min_samples;
        let mut best: Option<BestSplit> = None;
        for (f, order) in sorted.iter().enumerate() {
            let n = order.len();
            let col = &self.cols[f];
            let parent = total * total / n as f64;
            let mut left_sum = 0.0;
            for pos in 0..n - 1 {
                left_sum += self.residual[order[pos]];
                let n_left = pos + 1;
                let (a, b) = (col[order[pos]], col[order[pos + 1]]);
                if a == b || n_left < min || n - n_left < min {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / n_left as f64
                    + right_sum * right_sum / (n - n_left) as f64
                    - parent;
                if gain > 1e-12 * (parent.abs() + 1.0)
                    && best.as_ref().is_none_or(|s| gain > s.gain)
                {
                    let mid = a + (b - a) / 2.0;
                    best = Some(BestSplit {
                        gain,
                        feature: f,
                        threshold: if mid < b { mid } else { a },
                    });
                }
            }
        }
        best
    }
}

impl Predictor for GbtModel {
    fn predict(&self, loc: &Location, features: &[f64]) -> Result<f64> {
        let expected = self.n_features;
        if features.len() != expected {
            return Err(Error::SchemaMismatch {
                expected,
                found: features.len(),
            });
        }
        if self.include_coords {
            let mut row = features.to_vec();
            row.push(loc.x);
            row.push(loc.y);
            Ok(self.predict_row(&row))
        } else {
            Ok(self.predict_row(features))
        }
    }
}
