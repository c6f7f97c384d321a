//! Bootstrap percentile intervals: refit on resampled training data and read
//! per-point percentiles `[ε/2, 1 − ε/2]` of the replicate predictions.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::CoverageLevel;
use crate::diagnostics::coverage::{coverage_of_bounds, CoverageReport};
use crate::error::{Error, Result};
use crate::geo::SpatialDataset;
use crate::predictors::{predict_batch, ModelFactory};
use crate::stats::percentile_sorted;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub replicates: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub coverage: CoverageReport,
    pub wall_seconds: f64,
}

/// Replicate `r` resamples and fits with seed `seed + r`, so results do not
/// depend on how replicates are scheduled across threads.
pub fn bootstrap_intervals(
    ds: &SpatialDataset,
    test: &SpatialDataset,
    replicates: usize,
    factory: &dyn ModelFactory,
    level: CoverageLevel,
    seed: u64,
) -> Result<BootstrapReport> {
    let start = Instant::now();
    if replicates < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 replicates, got {replicates}"
        )));
    }
    if ds.is_empty() || test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = ds.len();
    let runs: Vec<Result<Vec<f64>>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let rep_seed = seed.wrapping_add(r as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(rep_seed);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let sample = ds.subset(&idx);
            factory
                .fit(&sample, rep_seed)
                .and_then(|m| predict_batch(m.as_ref(), test.records()))
                .map_err(|e| Error::Replicate {
                    index: r,
                    source: Box::new(e),
                })
        })
        .collect();
    let preds: Vec<Vec<f64>> = runs.into_iter().collect::<Result<_>>()?;

    let lo_p = level.epsilon() / 2.0;
    let hi_p = 1.0 - level.epsilon() / 2.0;
    let mut column = vec![0.0; replicates];
    let mut lower = Vec::with_capacity(test.len());
    let mut upper = Vec::with_capacity(test.len());
    for j in 0..test.len() {
        for (c, p) in column.iter_mut().zip(&preds) {
            *c = p[j];
        }
        column.sort_by(f64::total_cmp);
        lower.push(percentile_sorted(&column, lo_p));
        upper.push(percentile_sorted(&column, hi_p));
    }
    let bounds: Vec<(f64, f64)> = lower.iter().copied().zip(upper.iter().copied()).collect();
    let coverage = coverage_of_bounds(&bounds, &test.targets(), level.epsilon())?;
    Ok(BootstrapReport {
        replicates,
        lower,
        upper,
        coverage,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}
