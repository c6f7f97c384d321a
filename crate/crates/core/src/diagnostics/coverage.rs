use serde::{Deserialize, Serialize};

use crate::conformal::GeoInterval;
use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub n_test: usize,
    pub n_covered: usize,
    pub coverage: f64,
    pub mean_length: f64,
    pub median_length: f64,
    /// Miscoverage level ε the intervals were built for.
    pub epsilon: f64,
}

/// Share of `truth` inside the closed intervals.
pub fn coverage_ratio(intervals: &[GeoInterval], truth: &[f64]) -> Result<CoverageReport> {
    let bounds: Vec<(f64, f64)> = intervals
        .iter()
        .map(|iv| (iv.lower(), iv.upper()))
        .collect();
    let epsilon = intervals.first().map_or(f64::NAN, |iv| iv.level.epsilon());
    coverage_of_bounds(&bounds, truth, epsilon)
}

/// Coverage for arbitrary `(lower, upper)` pairs.
pub fn coverage_of_bounds(
    bounds: &[(f64, f64)],
    truth: &[f64],
    epsilon: f64,
) -> Result<CoverageReport> {
    if bounds.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: bounds.len(),
            right: truth.len(),
        });
    }
    if bounds.is_empty() {
        return Err(Error::InvalidArgument("no intervals to evaluate".into()));
    }
    let n_covered = bounds
        .iter()
        .zip(truth)
        .filter(|((lo, hi), y)| *lo <= **y && **y <= *hi)
        .count();
    let mut lengths: Vec<f64> = bounds.iter().map(|(lo, hi)| hi - lo).collect();
    let mean_length = stats::mean(&lengths);
    let median_length = stats::median(&mut lengths).unwrap_or(f64::NAN);
    Ok(CoverageReport {
        n_test: bounds.len(),
        n_covered,
        coverage: n_covered as f64 / bounds.len() as f64,
        mean_length,
        median_length,
        epsilon,
    })
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("rmse of empty input".into()));
    }
    let sse: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sse / pred.len() as f64).sqrt())
}

pub fn pearson_corr(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InvalidArgument(
            "correlation needs at least 2 points".into(),
        ));
    }
    let ma = stats::mean(a);
    let mb = stats::mean(b);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if is_flat(a, saa) || is_flat(b, sbb) {
        return Err(Error::ZeroVariance);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Sum of squared deviations at rounding level relative to the data scale.
fn is_flat(v: &[f64], ss: f64) -> bool {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    !(ss > v.len() as f64 * (1e-12 * scale).powi(2))
}
