//! Empirical semivariograms and weighted least-squares variogram fitting.
//!
//! Model curves (h ≥ 0), with nugget `c0`, partial sill `c1`, range `a`:
//!
//! * exponential: `c0 + c1 * (1 - exp(-h / a))`
//! * gaussian:    `c0 + c1 * (1 - exp(-h² / a²))`
//! * linear:      `c0 + b * h`
//!
//! For a fixed range the bounded models are linear in `(c0, c1)`, so the fit
//! profiles the range: an exact nonnegative 2-parameter least squares at each
//! candidate range, a log-spaced grid over `(0, 3 * max_lag]`, then
//! golden-section refinement around the best grid cell.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{distance_unchecked, SpatialDataset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariogramBin {
    /// Bin midpoint.
    pub lag: f64,
    pub gamma: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalVariogram {
    pub bins: Vec<VariogramBin>,
    pub max_lag: f64,
}

impl EmpiricalVariogram {
    pub fn total_pairs(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }
}

/// Classical (Matheron) estimator over equal-width lag bins on `(0, max_lag]`.
/// Pairs farther apart than `max_lag` are ignored; empty bins are dropped.
pub fn empirical_semivariogram(
    train: &SpatialDataset,
    n_bins: usize,
    max_lag: f64,
) -> Result<EmpiricalVariogram> {
    if train.len() < 2 {
        return Err(Error::InvalidArgument(
            "semivariogram needs at least 2 points".into(),
        ));
    }
    if n_bins == 0 {
        return Err(Error::InvalidArgument("n_bins must be at least 1".into()));
    }
    if !(max_lag > 0.0 && max_lag.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "max_lag must be positive, got {max_lag}"
        )));
    }
    let width = max_lag / n_bins as f64;
    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    let recs = train.records();
    for i in 0..recs.len() {
        for j in i + 1..recs.len() {
            let d = distance_unchecked(&recs[i].loc, &recs[j].loc);
            if d > max_lag {
                continue;
            }
            let b = ((d / width) as usize).min(n_bins - 1);
            let diff = recs[i].target - recs[j].target;
            sums[b] += diff * diff;
            counts[b] += 1;
        }
    }
    let bins = (0..n_bins)
        .filter(|&b| counts[b] > 0)
        .map(|b| VariogramBin {
            lag: (b as f64 + 0.5) * width,
            gamma: sums[b] / (2.0 * counts[b] as f64),
            count: counts[b],
        })
        .collect();
    Ok(EmpiricalVariogram { bins, max_lag })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VariogramKind {
    Exponential,
    Linear,
    Gaussian,
}

impl VariogramKind {
    pub fn free_parameters(self) -> usize {
        match self {
            VariogramKind::Linear => 2,
            _ => 3,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            VariogramKind::Exponential => "exp",
            VariogramKind::Linear => "lin",
            VariogramKind::Gaussian => "gau",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariogramModel {
    pub kind: VariogramKind,
    pub nugget: f64,
    /// Partial sill; unused by the linear model.
    pub sill: f64,
    /// Range parameter; unused by the linear model.
    pub range: f64,
    /// Slope; linear model only.
    pub slope: f64,
}

impl VariogramModel {
    pub fn exponential(nugget: f64, sill: f64, range: f64) -> Self {
        Self {
            kind: VariogramKind::Exponential,
            nugget,
            sill,
            range,
            slope: 0.0,
        }
    }

    pub fn gaussian(nugget: f64, sill: f64, range: f64) -> Self {
        Self {
            kind: VariogramKind::Gaussian,
            nugget,
            sill,
            range,
            slope: 0.0,
        }
    }

    pub fn linear(nugget: f64, slope: f64) -> Self {
        Self {
            kind: VariogramKind::Linear,
            nugget,
            sill: 0.0,
            range: 1.0,
            slope,
        }
    }

    /// Model curve; `semivariance(0) == nugget`.
    pub fn semivariance(&self, h: f64) -> f64 {
        self.nugget + self.structured(h)
    }

    fn structured(&self, h: f64) -> f64 {
        match self.kind {
            VariogramKind::Exponential => self.sill * basis(self.kind, h, self.range),
            VariogramKind::Gaussian => self.sill * basis(self.kind, h, self.range),
            VariogramKind::Linear => self.slope * h,
        }
    }

    /// Semivariance between two sample locations: zero at zero separation,
    /// the model curve otherwise (the nugget is a discontinuity at the origin).
    pub fn between_points(&self, h: f64) -> f64 {
        if h == 0.0 {
            0.0
        } else {
            self.semivariance(h)
        }
    }
}

fn basis(kind: VariogramKind, h: f64, a: f64) -> f64 {
    match kind {
        VariogramKind::Exponential => 1.0 - (-h / a).exp(),
        VariogramKind::Gaussian => 1.0 - (-(h * h) / (a * a)).exp(),
        VariogramKind::Linear => h,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariogramFit {
    pub model: VariogramModel,
    /// Pair-count weighted residual sum of squares.
    pub wsse: f64,
}

/// Nonnegative weighted least squares for `gamma ≈ c0 + c1 * g`.
/// Returns `(c0, c1, objective)`.
fn nnls2(g: &[f64], gamma: &[f64], w: &[f64]) -> (f64, f64, f64) {
    let (mut sw, mut sg, mut sgg, mut sy, mut sgy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&gi, &yi), &wi) in g.iter().zip(gamma).zip(w) {
        sw += wi;
        sg += wi * gi;
        sgg += wi * gi * gi;
        sy += wi * yi;
        sgy += wi * gi * yi;
    }
    let objective = |c0: f64, c1: f64| -> f64 {
        g.iter()
            .zip(gamma)
            .zip(w)
            .map(|((&gi, &yi), &wi)| {
                let r = yi - c0 - c1 * gi;
                wi * r * r
            })
            .sum()
    };

    let mut candidates = Vec::with_capacity(4);
    let det = sw * sgg - sg * sg;
    if det > 1e-12 * sw * sgg.max(f64::MIN_POSITIVE) {
        let c0 = (sgg * sy - sg * sgy) / det;
        let c1 = (sw * sgy - sg * sy) / det;
        if c0 >= 0.0 && c1 >= 0.0 {
            candidates.push((c0, c1));
        }
    }
    if sgg > 0.0 {
        candidates.push((0.0, (sgy / sgg).max(0.0)));
    }
    if sw > 0.0 {
        candidates.push(((sy / sw).max(0.0), 0.0));
    }
    candidates.push((0.0, 0.0));

    candidates
        .into_iter()
        .map(|(c0, c1)| (c0, c1, objective(c0, c1)))
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .expect("candidate list is never empty")
}

/// Weighted least-squares fit with pair-count weights.
pub fn fit_variogram(emp: &EmpiricalVariogram, kind: VariogramKind) -> Result<VariogramFit> {
    let need = kind.free_parameters();
    if emp.bins.len() < need {
        return Err(Error::VariogramFit(format!(
            "{} bins available, {need} required for {kind:?}",
            emp.bins.len()
        )));
    }
    let lags: Vec<f64> = emp.bins.iter().map(|b| b.lag).collect();
    let gamma: Vec<f64> = emp.bins.iter().map(|b| b.gamma).collect();
    let w: Vec<f64> = emp.bins.iter().map(|b| b.count as f64).collect();
    if gamma.iter().chain(&lags).any(|v| !v.is_finite()) {
        return Err(Error::VariogramFit("non-finite bin values".into()));
    }

    let fit = match kind {
        VariogramKind::Linear => {
            let (c0, b, wsse) = nnls2(&lags, &gamma, &w);
            VariogramFit {
                model: VariogramModel::linear(c0, b),
                wsse,
            }
        }
        VariogramKind::Exponential | VariogramKind::Gaussian => {
            let upper = 3.0 * emp.max_lag;
            let profile = |a: f64| -> (f64, f64, f64) {
                let g: Vec<f64> = lags.iter().map(|&h| basis(kind, h, a)).collect();
                nnls2(&g, &gamma, &w)
            };

            const GRID: usize = 240;
            let lower = upper * 1e-4;
            let ratio = (upper / lower).powf(1.0 / (GRID - 1) as f64);
            let grid: Vec<f64> = (0..GRID)
                .map(|i| {
                    if i == GRID - 1 {
                        upper
                    } else {
                        lower * ratio.powi(i as i32)
                    }
                })
                .collect();
            let scores: Vec<f64> = grid.iter().map(|&a| profile(a).2).collect();
            let best = scores
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);

            let mut lo = grid[best.saturating_sub(1)];
            let mut hi = grid[(best + 1).min(GRID - 1)];
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            let mut x1 = hi - phi * (hi - lo);
            let mut x2 = lo + phi * (hi - lo);
            let (mut f1, mut f2) = (profile(x1).2, profile(x2).2);
            for _ in 0..200 {
                if hi - lo <= 1e-12 * hi {
                    break;
                }
                if f1 <= f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - phi * (hi - lo);
                    f1 = profile(x1).2;
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + phi * (hi - lo);
                    f2 = profile(x2).2;
                }
            }
            let mut a = 0.5 * (lo + hi);
            let (mut c0, mut c1, mut wsse) = profile(a);
            if scores[best] < wsse {
                a = grid[best];
                (c0, c1, wsse) = profile(a);
            }
            let model = match kind {
                VariogramKind::Exponential => VariogramModel::exponential(c0, c1, a),
                _ => VariogramModel::gaussian(c0, c1, a),
            };
            VariogramFit { model, wsse }
        }
    };
    if !fit.wsse.is_finite() {
        return Err(Error::VariogramFit("non-finite objective".into()));
    }
    Ok(fit)
}
