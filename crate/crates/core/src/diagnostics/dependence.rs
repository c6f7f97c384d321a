//! Relationship between local spatial dependence and uncertainty.
//!
//! For each run, local Moran's I of the observed values is computed over the
//! full weights matrix and compared with per-point uncertainty at a subset of
//! those points (the test points). Across runs, each run's global Moran's I is
//! correlated with its inner correlation.

use serde::{Deserialize, Serialize};

use crate::diagnostics::coverage::pearson_corr;
use crate::diagnostics::moran::{local_morans_i, morans_i, SpatialWeightsMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct DependenceRun {
    /// One entry per analysed point.
    pub uncertainty: Vec<f64>,
    /// Observed values for every point in `weights`.
    pub values: Vec<f64>,
    pub weights: SpatialWeightsMatrix,
    /// Rows of `weights` the uncertainties belong to; `None` means all of them.
    pub points: Option<Vec<usize>>,
}

/// Pearson correlation, or `Degenerate` when either side is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Association {
    Correlation(f64),
    Degenerate,
}

impl Association {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Correlation(r) => Some(r),
            Self::Degenerate => None,
        }
    }

    fn of(a: &[f64], b: &[f64]) -> Result<Self> {
        match pearson_corr(a, b) {
            Ok(r) => Ok(Self::Correlation(r)),
            Err(Error::ZeroVariance) => Ok(Self::Degenerate),
            Err(e) => Err(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependenceEntry {
    /// `None` when the values are constant.
    pub global_i: Option<f64>,
    pub inner: Association,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceAnalysis {
    pub runs: Vec<DependenceEntry>,
    /// Correlation of global I with the inner correlation over usable runs.
    pub outer: Association,
    pub usable_runs: usize,
}

fn local_at_points(
    values: &[f64],
    w: &SpatialWeightsMatrix,
    points: Option<&[usize]>,
) -> Result<Vec<f64>> {
    let local = local_morans_i(values, w)?;
    match points {
        None => Ok(local),
        Some(p) => p
            .iter()
            .map(|&i| {
                local.get(i).copied().ok_or_else(|| {
                    Error::InvalidArgument(format!("point index {i} outside weights"))
                })
            })
            .collect(),
    }
}

fn expected_len(w: &SpatialWeightsMatrix, points: Option<&[usize]>) -> usize {
    points.map_or(w.n(), <[usize]>::len)
}

pub fn dependence_analysis(runs: &[DependenceRun]) -> Result<DependenceAnalysis> {
    let mut entries = Vec::with_capacity(runs.len());
    for (k, run) in runs.iter().enumerate() {
        let pts = run.points.as_deref();
        if run.uncertainty.len() != expected_len(&run.weights, pts) {
            return Err(Error::LengthMismatch {
                left: run.uncertainty.len(),
                right: expected_len(&run.weights, pts),
            });
        }
        let entry = match morans_i(&run.values, &run.weights) {
            Ok(m) => {
                let local = local_at_points(&run.values, &run.weights, pts)?;
                DependenceEntry {
                    global_i: Some(m.i),
                    inner: Association::of(&local, &run.uncertainty)?,
                }
            }
            Err(Error::ZeroVariance) => DependenceEntry {
                global_i: None,
                inner: Association::Degenerate,
            },
            Err(e) => return Err(e),
        };
        if entry.inner == Association::Degenerate {
            log::warn!("run {k}: degenerate inner correlation skipped");
        }
        entries.push(entry);
    }
    let (gi, inner): (Vec<f64>, Vec<f64>) = entries
        .iter()
        .filter_map(|e| Some((e.global_i?, e.inner.value()?)))
        .unzip();
    let outer = if gi.len() >= 2 {
        Association::of(&gi, &inner)?
    } else {
        Association::Degenerate
    };
    Ok(DependenceAnalysis {
        usable_runs: gi.len(),
        runs: entries,
        outer,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyChange {
    /// `variant − base` per point.
    pub deltas: Vec<f64>,
    pub mean_delta: f64,
    pub association: Association,
}

/// Correlates local Moran's I with the change in uncertainty between two runs
/// over the same points.
pub fn uncertainty_change_analysis(
    base: &[f64],
    variant: &[f64],
    values: &[f64],
    w: &SpatialWeightsMatrix,
    points: Option<&[usize]>,
) -> Result<UncertaintyChange> {
    if base.len() != variant.len() {
        return Err(Error::LengthMismatch {
            left: base.len(),
            right: variant.len(),
        });
    }
    if base.len() != expected_len(w, points) {
        return Err(Error::LengthMismatch {
            left: base.len(),
            right: expected_len(w, points),
        });
    }
    if base.is_empty() {
        return Err(Error::InvalidArgument("no points to compare".into()));
    }
    let deltas: Vec<f64> = variant.iter().zip(base).map(|(v, b)| v - b).collect();
    let mean_delta = deltas.iter().sum::<f64>() / deltas.len() as f64;
    let association = match local_at_points(values, w, points) {
        Ok(local) => Association::of(&local, &deltas)?,
        Err(Error::ZeroVariance) => Association::Degenerate,
        Err(e) => return Err(e),
    };
    Ok(UncertaintyChange {
        deltas,
        mean_delta,
        association,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::moran::{build_weights_for_locations, WeightsScheme};
    use crate::geo::Location;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance(seed: u64, n: usize, smooth: f64) -> (SpatialWeightsMatrix, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let locs: Vec<Location> = (0..n)
            .map(|_| Location::planar(rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0))
            .collect();
        let vals = locs
            .iter()
            .map(|l| smooth * (l.x / 3.0).sin() + rng.random::<f64>())
            .collect();
        (
            build_weights_for_locations(&locs, WeightsScheme::KnnRowStandardized(6)).unwrap(),
            vals,
        )
    }

    #[test]
    fn uncertainty_equal_to_local_i_correlates_perfectly() {
        let runs: Vec<DependenceRun> = (0..4)
            .map(|s| {
                let (w, values) = instance(s, 40, s as f64);
                DependenceRun {
                    uncertainty: local_morans_i(&values, &w).unwrap(),
                    values,
                    weights: w,
                    points: None,
                }
            })
            .collect();
        let a = dependence_analysis(&runs).unwrap();
        for e in &a.runs {
            assert!((e.inner.value().unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(a.usable_runs, 4);
        // Inner correlations are all 1, so the outer one is degenerate.
        assert_eq!(a.outer, Association::Degenerate);
    }

    #[test]
    fn independent_uncertainty_weakly_correlated() {
        let (w, values) = instance(11, 90, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let unc: Vec<f64> = (0..90).map(|_| rng.random::<f64>()).collect();
        let run = DependenceRun {
            uncertainty: unc,
            values,
            weights: w,
            points: None,
        };
        let a = dependence_analysis(&[run]).unwrap();
        assert!(a.runs[0].inner.value().unwrap().abs() < 0.3);
    }

    #[test]
    fn subset_points_and_length_checks() {
        let (w, values) = instance(3, 30, 1.0);
        let local = local_morans_i(&values, &w).unwrap();
        let pts = vec![2, 5, 7, 11];
        let run = DependenceRun {
            uncertainty: pts.iter().map(|&i| local[i]).collect(),
            values: values.clone(),
            weights: w.clone(),
            points: Some(pts),
        };
        let a = dependence_analysis(&[run]).unwrap();
        assert!((a.runs[0].inner.value().unwrap() - 1.0).abs() < 1e-12);

        let bad = DependenceRun {
            uncertainty: vec![0.0; 3],
            values,
            weights: w,
            points: None,
        };
        assert!(dependence_analysis(&[bad]).is_err());
    }

    #[test]
    fn change_identical_runs_degenerate() {
        let (w, values) = instance(5, 30, 1.0);
        let u = vec![0.7; 30];
        let c = uncertainty_change_analysis(&u, &u, &values, &w, None).unwrap();
        assert_eq!(c.association, Association::Degenerate);
        assert_eq!(c.mean_delta, 0.0);
    }

    #[test]
    fn change_equal_to_negative_local_i() {
        let (w, values) = instance(6, 30, 1.0);
        let local = local_morans_i(&values, &w).unwrap();
        let base = vec![1.0; 30];
        let variant: Vec<f64> = local.iter().map(|l| 1.0 - l).collect();
        let c = uncertainty_change_analysis(&base, &variant, &values, &w, None).unwrap();
        assert!((c.association.value().unwrap() + 1.0).abs() < 1e-12);
        assert!(uncertainty_change_analysis(&base, &variant[..5], &values, &w, None).is_err());
    }
}
