//! Neighbor-weighting neural interpolator ("DGSI-lite").
//!
//! For a query, the `k` nearest training points are encoded by normalized
//! distance and the bearing from the query as `(sin θ, cos θ)`. A small
//! tanh MLP maps the flattened encoding to `k` logits; their softmax gives
//! the neighbor weights and the prediction is the weighted mean of neighbor
//! targets. Variants extend the encoding:
//!
//! * `LocalFeature` appends the standardized mean of the neighbors' targets.
//! * `Location` appends each neighbor's coordinates, scaled to `[-1, 1]` over
//!   the training bounding box.
//!
//! Training minimizes squared error on leave-one-out queries over the
//! training set (each training point predicted from its `k` nearest other
//! training points), on standardized targets, with per-query gradient steps
//! in a seeded shuffled order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{bearing, max_pairwise_distance, nearest, Location, SpatialDataset};
use crate::predictors::Predictor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DgsiVariant {
    Base,
    LocalFeature,
    Location,
}

impl DgsiVariant {
    pub fn short_name(self) -> &'static str {
        match self {
            DgsiVariant::Base => "base",
            DgsiVariant::LocalFeature => "local",
            DgsiVariant::Location => "loc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgsiHyper {
    pub k: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for DgsiHyper {
    fn default() -> Self {
        Self {
            k: 6,
            hidden: 32,
            epochs: 300,
            learning_rate: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Dense {
    n_in: usize,
    n_out: usize,
    /// Row-major `n_out × n_in`.
    w: Vec<f64>,
    b: Vec<f64>,
}

impl Dense {
    fn xavier(n_in: usize, n_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (n_in + n_out) as f64).sqrt();
        Self {
            n_in,
            n_out,
            w: (0..n_in * n_out)
                .map(|_| rng.random_range(-limit..limit))
                .collect(),
            b: vec![0.0; n_out],
        }
    }

    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.w
                .chunks_exact(self.n_in)
                .zip(&self.b)
                .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b),
        );
    }

    /// Gradient step given `d_out = ∂L/∂(pre-activation output)`; writes
    /// `∂L/∂x` into `d_in` using the pre-update weights.
    fn backward_step(&mut self, x: &[f64], d_out: &[f64], d_in: Option<&mut Vec<f64>>, lr: f64) {
        if let Some(d_in) = d_in {
            d_in.clear();
            d_in.resize(self.n_in, 0.0);
            for (row, &g) in self.w.chunks_exact(self.n_in).zip(d_out) {
                for (d, w) in d_in.iter_mut().zip(row) {
                    *d += g * w;
                }
            }
        }
        for ((row, b), &g) in self
            .w
            .chunks_exact_mut(self.n_in)
            .zip(&mut self.b)
            .zip(d_out)
        {
            for (w, v) in row.iter_mut().zip(x) {
                *w -= lr * g * v;
            }
            *b -= lr * g;
        }
    }
}

/// Two tanh hidden layers and a linear logit head.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct Mlp {
    layers: [Dense; 3],
}

struct Activations {
    h1: Vec<f64>,
    h2: Vec<f64>,
    logits: Vec<f64>,
}

impl Mlp {
    fn new(n_in: usize, hidden: usize, n_out: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            layers: [
                Dense::xavier(n_in, hidden, rng),
                Dense::xavier(hidden, hidden, rng),
                Dense::xavier(hidden, n_out, rng),
            ],
        }
    }

    fn forward(&self, x: &[f64]) -> Activations {
        let mut h1 = Vec::new();
        let mut h2 = Vec::new();
        let mut logits = Vec::new();
        self.layers[0].forward(x, &mut h1);
        h1.iter_mut().for_each(|v| *v = v.tanh());
        self.layers[1].forward(&h1, &mut h2);
        h2.iter_mut().for_each(|v| *v = v.tanh());
        self.layers[2].forward(&h2, &mut logits);
        Activations { h1, h2, logits }
    }

    fn backward_step(&mut self, x: &[f64], act: &Activations, d_logits: &[f64], lr: f64) {
        let mut d_h2 = Vec::new();
        self.layers[2].backward_step(&act.h2, d_logits, Some(&mut d_h2), lr);
        for (d, h) in d_h2.iter_mut().zip(&act.h2) {
            *d *= 1.0 - h * h;
        }
        let mut d_h1 = Vec::new();
        self.layers[1].backward_step(&act.h1, &d_h2, Some(&mut d_h1), lr);
        for (d, h) in d_h1.iter_mut().zip(&act.h1) {
            *d *= 1.0 - h * h;
        }
        self.layers[0].backward_step(x, &d_h1, None, lr);
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DgsiLiteModel {
    variant: DgsiVariant,
    hyper: DgsiHyper,
    seed: u64,
    locations: Vec<Location>,
    targets: Vec<f64>,
    target_mean: f64,
    target_sd: f64,
    max_distance: f64,
    bbox: [f64; 4],
    net: Mlp,
    loss_history: Vec<f64>,
}

/// Weighted neighbor set for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborWeights {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

struct Encoder<'a> {
    variant: DgsiVariant,
    locations: &'a [Location],
    targets: &'a [f64],
    target_mean: f64,
    target_sd: f64,
    max_distance: f64,
    bbox: [f64; 4],
}

impl Encoder<'_> {
    fn input_len(variant: DgsiVariant, k: usize) -> usize {
        match variant {
            DgsiVariant::Base => 3 * k,
            DgsiVariant::LocalFeature => 3 * k + 1,
            DgsiVariant::Location => 5 * k,
        }
    }

    fn encode(&self, query: &Location, neighbors: &[(usize, f64)]) -> Vec<f64> {
        let mut x = Vec::with_capacity(Self::input_len(self.variant, neighbors.len()));
        for &(j, d) in neighbors {
            let theta = bearing(query, &self.locations[j]);
            x.push(d / self.max_distance);
            x.push(theta.sin());
            x.push(theta.cos());
            if self.variant == DgsiVariant::Location {
                let [x0, x1, y0, y1] = self.bbox;
                let scale = |v: f64, lo: f64, hi: f64| {
                    if hi > lo {
                        2.0 * (v - lo) / (hi - lo) - 1.0
                    } else {
                        0.0
                    }
                };
                x.push(scale(self.locations[j].x, x0, x1));
                x.push(scale(self.locations[j].y, y0, y1));
            }
        }
        if self.variant == DgsiVariant::LocalFeature {
            let mean = neighbors.iter().map(|&(j, _)| self.targets[j]).sum::<f64>()
                / neighbors.len() as f64;
            x.push((mean - self.target_mean) / self.target_sd);
        }
        x
    }
}

/// Convex combination of neighbor targets, exact for equal targets and
/// clamped to their range.
fn combine(weights: &[f64], values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let v = lo
        + weights
            .iter()
            .zip(values)
            .map(|(w, z)| w * (z - lo))
            .sum::<f64>();
    v.clamp(lo, hi)
}

pub fn train_dgsi_lite(
    train: &SpatialDataset,
    variant: DgsiVariant,
    hyper: DgsiHyper,
    seed: u64,
) -> Result<DgsiLiteModel> {
    let n = train.len();
    let k = hyper.k;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k >= n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must be smaller than the training size {n}"
        )));
    }
    if hyper.hidden == 0 || !(hyper.learning_rate > 0.0) {
        return Err(Error::InvalidArgument(
            "hidden size and learning rate must be positive".into(),
        ));
    }
    let locations = train.locations();
    let targets = train.targets();
    let target_mean = crate::stats::mean(&targets);
    let var = targets
        .iter()
        .map(|z| (z - target_mean).powi(2))
        .sum::<f64>()
        / n as f64;
    let target_sd = if var > 0.0 { var.sqrt() } else { 1.0 };
    let max_distance = match max_pairwise_distance(&locations) {
        d if d > 0.0 => d,
        _ => 1.0,
    };
    let bbox = locations.iter().fold(
        [
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ],
        |b, l| [b[0].min(l.x), b[1].max(l.x), b[2].min(l.y), b[3].max(l.y)],
    );

    let encoder = Encoder {
        variant,
        locations: &locations,
        targets: &targets,
        target_mean,
        target_sd,
        max_distance,
        bbox,
    };
    let standardized: Vec<f64> = targets
        .iter()
        .map(|z| (z - target_mean) / target_sd)
        .collect();

    // Leave-one-out queries: inputs depend only on geometry and targets, so
    // they are encoded once.
    let queries: Vec<(Vec<f64>, Vec<usize>)> = (0..n)
        .map(|i| {
            let nb = nearest(&locations, &locations[i], k, Some(i));
            (
                encoder.encode(&locations[i], &nb),
                nb.iter().map(|p| p.0).collect(),
            )
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Mlp::new(Encoder::input_len(variant, k), hyper.hidden, k, &mut rng);

    let epoch_loss = |net: &Mlp| -> f64 {
        queries
            .iter()
            .enumerate()
            .map(|(i, (x, nb))| {
                let w = softmax(&net.forward(x).logits);
                let pred: f64 = w.iter().zip(nb).map(|(w, &j)| w * standardized[j]).sum();
                (pred - standardized[i]).powi(2)
            })
            .sum::<f64>()
            / n as f64
    };

    let mut loss_history = Vec::with_capacity(hyper.epochs + 1);
    let initial = epoch_loss(&net);
    if !initial.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: 0 });
    }
    loss_history.push(initial);

    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 1..=hyper.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (x, nb) = &queries[i];
            let act = net.forward(x);
            let w = softmax(&act.logits);
            let zs: Vec<f64> = nb.iter().map(|&j| standardized[j]).collect();
            let pred: f64 = w.iter().zip(&zs).map(|(w, z)| w * z).sum();
            let d_pred = 2.0 * (pred - standardized[i]);
            let d_logits: Vec<f64> = w
                .iter()
                .zip(&zs)
                .map(|(w, z)| d_pred * w * (z - pred))
                .collect();
            net.backward_step(x, &act, &d_logits, hyper.learning_rate);
        }
        let loss = epoch_loss(&net);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        loss_history.push(loss);
    }

    Ok(DgsiLiteModel {
        variant,
        hyper,
        seed,
        locations,
        targets,
        target_mean,
        target_sd,
        max_distance,
        bbox,
        net,
        loss_history,
    })
}

impl DgsiLiteModel {
    pub fn variant(&self) -> DgsiVariant {
        self.variant
    }

    /// Mean standardized squared leave-one-out error before training
    /// (index 0) and after each epoch.
    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }

    fn encoder(&self) -> Encoder<'_> {
        Encoder {
            variant: self.variant,
            locations: &self.locations,
            targets: &self.targets,
            target_mean: self.target_mean,
            target_sd: self.target_sd,
            max_distance: self.max_distance,
            bbox: self.bbox,
        }
    }

    pub fn neighbor_weights(&self, query: &Location) -> Result<NeighborWeights> {
        let crs = self.locations[0].crs;
        if query.crs != crs {
            return Err(Error::CrsMismatch {
                a: crs,
                b: query.crs,
            });
        }
        let nb = nearest(&self.locations, query, self.hyper.k, None);
        let x = self.encoder().encode(query, &nb);
        Ok(NeighborWeights {
            indices: nb.iter().map(|p| p.0).collect(),
            weights: softmax(&self.net.forward(&x).logits),
        })
    }
}

impl Predictor for DgsiLiteModel {
    fn predict(&self, loc: &Location, _features: &[f64]) -> Result<f64> {
        let nw = self.neighbor_weights(loc)?;
        let values: Vec<f64> = nw.indices.iter().map(|&j| self.targets[j]).collect();
        Ok(combine(&nw.weights, &values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::Crs;

    fn scattered(n: usize, f: impl Fn(f64, f64) -> f64) -> SpatialDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<_> = (0..n)
            .map(|_| {
                let (x, y) = (rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0);
                (x, y, f(x, y))
            })
            .collect();
        SpatialDataset::from_points(&pts, Crs::Planar).unwrap()
    }

    fn quick() -> DgsiHyper {
        DgsiHyper {
            epochs: 20,
            ..DgsiHyper::default()
        }
    }

    #[test]
    fn constant_field_is_exact() {
        let ds = scattered(40, |_, _| 17.25);
        for v in [
            DgsiVariant::Base,
            DgsiVariant::LocalFeature,
            DgsiVariant::Location,
        ] {
            let m = train_dgsi_lite(&ds, v, quick(), 3).unwrap();
            for q in [Location::planar(1.0, 2.0), Location::planar(9.5, 0.1)] {
                assert_eq!(m.predict(&q, &[]).unwrap(), 17.25);
            }
        }
    }

    #[test]
    fn k1_returns_nearest_target() {
        let ds = scattered(30, |x, y| x * y);
        let m = train_dgsi_lite(&ds, DgsiVariant::Base, DgsiHyper { k: 1, ..quick() }, 0).unwrap();
        let q = Location::planar(4.2, 5.1);
        let nn = crate::geo::knn_neighbors(&ds, &q, 1).unwrap()[0].0;
        assert_eq!(m.predict(&q, &[]).unwrap(), ds.records()[nn].target);
    }

    #[test]
    fn weights_are_probabilities_and_prediction_bounded() {
        let ds = scattered(50, |x, y| (x * 0.7).sin() + y);
        let m = train_dgsi_lite(&ds, DgsiVariant::Location, quick(), 9).unwrap();
        for i in 0..20 {
            let q = Location::planar(i as f64 * 0.5, 10.0 - i as f64 * 0.45);
            let nw = m.neighbor_weights(&q).unwrap();
            assert!(nw.weights.iter().all(|&w| w >= 0.0));
            assert!((nw.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let vals: Vec<f64> = nw.indices.iter().map(|&j| ds.records()[j].target).collect();
            let p = m.predict(&q, &[]).unwrap();
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(p >= lo && p <= hi);
        }
    }

    #[test]
    fn training_reduces_loss_on_trend() {
        let ds = scattered(60, |x, y| 2.0 * x - y);
        let m = train_dgsi_lite(
            &ds,
            DgsiVariant::Base,
            DgsiHyper {
                epochs: 200,
                ..DgsiHyper::default()
            },
            5,
        )
        .unwrap();
        let h = m.loss_history();
        assert_eq!(h.len(), 201);
        assert!(h[200] < h[0], "{} !< {}", h[200], h[0]);
    }

    #[test]
    fn deterministic_per_seed() {
        let ds = scattered(30, |x, y| x + y);
        let a = train_dgsi_lite(&ds, DgsiVariant::LocalFeature, quick(), 4).unwrap();
        let b = train_dgsi_lite(&ds, DgsiVariant::LocalFeature, quick(), 4).unwrap();
        assert_eq!(a.loss_history(), b.loss_history());
    }

    #[test]
    fn k_must_be_below_training_size() {
        let ds = scattered(6, |x, _| x);
        assert!(train_dgsi_lite(&ds, DgsiVariant::Base, DgsiHyper { k: 6, ..quick() }, 0).is_err());
        assert!(train_dgsi_lite(&ds, DgsiVariant::Base, DgsiHyper { k: 0, ..quick() }, 0).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut net = Mlp::new(4, 5, 3, &mut rng);
        let x = [0.3, -0.2, 0.9, 0.1];
        let z = [1.0, -0.5, 2.0];
        let target = 0.4;
        let loss = |net: &Mlp| {
            let w = softmax(&net.forward(&x).logits);
            let p: f64 = w.iter().zip(&z).map(|(w, z)| w * z).sum();
            (p - target).powi(2)
        };
        let h = 1e-6;
        let mut numeric = Vec::new();
        for idx in [0usize, 7, 13] {
            let mut plus = net.clone();
            plus.layers[0].w[idx] += h;
            let mut minus = net.clone();
            minus.layers[0].w[idx] -= h;
            numeric.push((loss(&plus) - loss(&minus)) / (2.0 * h));
        }
        // Analytic gradient recovered from a unit-rate step.
        let act = net.forward(&x);
        let w = softmax(&act.logits);
        let p: f64 = w.iter().zip(&z).map(|(w, z)| w * z).sum();
        let d_logits: Vec<f64> = w
            .iter()
            .zip(&z)
            .map(|(w, zj)| 2.0 * (p - target) * w * (zj - p))
            .collect();
        let before = net.layers[0].w.clone();
        net.backward_step(&x, &act, &d_logits, 1.0);
        for (k, idx) in [0usize, 7, 13].iter().enumerate() {
            let analytic = before[*idx] - net.layers[0].w[*idx];
            assert!(
                (analytic - numeric[k]).abs() < 1e-6,
                "{analytic} vs {}",
                numeric[k]
            );
        }
    }
}
