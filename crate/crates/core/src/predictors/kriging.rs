//! Ordinary kriging in semivariogram form.
//!
//! For `n` training points the system is
//!
//! ```text
//! | Γ  1 | |λ|   |γ₀|
//! | 1ᵀ 0 | |μ| = | 1|
//! ```
//!
//! with `Γᵢⱼ = γ(dᵢⱼ)`, `γ₀ᵢ = γ(dᵢ,query)`. The prediction is `Σ λᵢ zᵢ` and
//! the kriging variance `Σ λᵢ γ₀ᵢ + μ`. The diagonal of `Γ` carries
//! `-ε_reg` with `ε_reg = 1e-10 · scale`, which is a vanishing nugget in
//! covariance terms; `scale` is the largest semivariance between training
//! points (the sill for bounded models).

use nalgebra::{DMatrix, DVector, Dyn, LU};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{distance_unchecked, Location, SpatialDataset};
use crate::predictors::variogram::VariogramModel;
use crate::predictors::Predictor;

const REGULARIZATION: f64 = 1e-10;
const MIN_PIVOT_RATIO: f64 = 1e-15;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "KrigingState", try_from = "KrigingState")]
pub struct KrigingModel {
    locations: Vec<Location>,
    targets: Vec<f64>,
    variogram: VariogramModel,
    epsilon_reg: f64,
    lu: LU<f64, Dyn, Dyn>,
}

#[derive(Serialize, Deserialize)]
struct KrigingState {
    locations: Vec<Location>,
    targets: Vec<f64>,
    variogram: VariogramModel,
}

impl From<KrigingModel> for KrigingState {
    fn from(m: KrigingModel) -> Self {
        Self {
            locations: m.locations,
            targets: m.targets,
            variogram: m.variogram,
        }
    }
}

impl TryFrom<KrigingState> for KrigingModel {
    type Error = Error;

    fn try_from(s: KrigingState) -> Result<Self> {
        build(s.locations, s.targets, s.variogram)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrigingEstimate {
    pub value: f64,
    pub variance: f64,
    pub weights: Vec<f64>,
    pub lagrange: f64,
}

pub fn fit_kriging(train: &SpatialDataset, vario: VariogramModel) -> Result<KrigingModel> {
    if train.len() < 2 {
        return Err(Error::InvalidArgument(
            "kriging needs at least 2 training points".into(),
        ));
    }
    build(train.locations(), train.targets(), vario)
}

fn build(
    locations: Vec<Location>,
    targets: Vec<f64>,
    variogram: VariogramModel,
) -> Result<KrigingModel> {
    let n = locations.len();
    let mut a = DMatrix::<f64>::zeros(n + 1, n + 1);
    let mut scale = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let g = variogram.between_points(distance_unchecked(&locations[i], &locations[j]));
            a[(i, j)] = g;
            a[(j, i)] = g;
            scale = scale.max(g);
        }
        a[(i, n)] = 1.0;
        a[(n, i)] = 1.0;
    }
    let epsilon_reg = REGULARIZATION * if scale > 0.0 { scale } else { 1.0 };
    for i in 0..n {
        a[(i, i)] = -epsilon_reg;
    }
    let lu = a.lu();
    let diag = lu.u().diagonal();
    let max = diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = diag.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let pivot_ratio = if max > 0.0 { min / max } else { 0.0 };
    if !lu.is_invertible() || !(pivot_ratio > MIN_PIVOT_RATIO) {
        return Err(Error::SingularSystem { pivot_ratio });
    }
    Ok(KrigingModel {
        locations,
        targets,
        variogram,
        epsilon_reg,
        lu,
    })
}

impl KrigingModel {
    pub fn variogram(&self) -> &VariogramModel {
        &self.variogram
    }

    pub fn epsilon_reg(&self) -> f64 {
        self.epsilon_reg
    }

    pub fn estimate(&self, query: &Location) -> Result<KrigingEstimate> {
        let crs = self.locations[0].crs;
        if query.crs != crs {
            return Err(Error::CrsMismatch {
                a: crs,
                b: query.crs,
            });
        }
        let n = self.locations.len();
        // At a training location λ = e_i, μ = 0 solves the unregularized
        // system exactly; the regularized solve would be off by O(ε_reg·‖Γ⁻¹‖).
        if let Some(i) = self
            .locations
            .iter()
            .position(|l| distance_unchecked(l, query) == 0.0)
        {
            let mut weights = vec![0.0; n];
            weights[i] = 1.0;
            return Ok(KrigingEstimate {
                value: self.targets[i],
                variance: 0.0,
                weights,
                lagrange: 0.0,
            });
        }
        let mut rhs = DVector::<f64>::zeros(n + 1);
        for (i, l) in self.locations.iter().enumerate() {
            rhs[i] = self.variogram.between_points(distance_unchecked(l, query));
        }
        rhs[n] = 1.0;
        let sol = self
            .lu
            .solve(&rhs)
            .ok_or(Error::SingularSystem { pivot_ratio: 0.0 })?;
        let weights: Vec<f64> = sol.iter().take(n).copied().collect();
        let lagrange = sol[n];
        let value = weights.iter().zip(&self.targets).map(|(w, z)| w * z).sum();
        let variance = weights
            .iter()
            .zip(rhs.iter())
            .map(|(w, g)| w * g)
            .sum::<f64>()
            + lagrange;
        Ok(KrigingEstimate {
            value,
            variance: variance.max(0.0),
            weights,
            lagrange,
        })
    }
}

/// Prediction and kriging variance at `query`.
pub fn ok_predict(model: &KrigingModel, query: &Location) -> Result<(f64, f64)> {
    let e = model.estimate(query)?;
    Ok((e.value, e.variance))
}

impl Predictor for KrigingModel {
    fn predict(&self, loc: &Location, _features: &[f64]) -> Result<f64> {
        Ok(self.estimate(loc)?.value)
    }

    fn kriging_variance(&self, loc: &Location) -> Option<Result<f64>> {
        Some(self.estimate(loc).map(|e| e.variance))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::Crs;

    fn model() -> VariogramModel {
        VariogramModel::exponential(0.0, 1.0, 2.0)
    }

    #[test]
    fn exact_at_training_points() {
        let ds = SpatialDataset::from_points(
            &[
                (0.0, 0.0, 1.0),
                (1.0, 0.5, 3.0),
                (2.0, 2.0, -1.0),
                (0.3, 1.7, 0.5),
            ],
            Crs::Planar,
        )
        .unwrap();
        let m = fit_kriging(&ds, model()).unwrap();
        for r in ds.records() {
            let (v, var) = ok_predict(&m, &r.loc).unwrap();
            assert!((v - r.target).abs() < 1e-8);
            assert!(var < 1e-8);
        }
    }

    #[test]
    fn continuous_next_to_training_points() {
        let ds = SpatialDataset::from_points(
            &[
                (0.0, 0.0, 1.0),
                (1.0, 0.5, 3.0),
                (2.0, 2.0, -1.0),
                (0.3, 1.7, 0.5),
            ],
            Crs::Planar,
        )
        .unwrap();
        let m = fit_kriging(&ds, model()).unwrap();
        for r in ds.records() {
            let near = m
                .estimate(&Location::planar(r.loc.x + 1e-9, r.loc.y))
                .unwrap();
            assert!((near.value - r.target).abs() < 1e-6);
            assert!(near.variance < 1e-6);
            assert!((near.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn symmetric_neighbors_average() {
        let ds =
            SpatialDataset::from_points(&[(-1.0, 0.0, 1.0), (1.0, 0.0, 3.0)], Crs::Planar).unwrap();
        let m = fit_kriging(&ds, model()).unwrap();
        let (v, _) = ok_predict(&m, &Location::planar(0.0, 0.0)).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn weights_sum_to_one() {
        let pts: Vec<_> = (0..12)
            .map(|i| ((i * 7 % 5) as f64, (i * 3 % 11) as f64 * 0.3, i as f64))
            .collect();
        let ds = SpatialDataset::from_points(&pts, Crs::Planar).unwrap();
        let m = fit_kriging(&ds, VariogramModel::gaussian(0.1, 2.0, 3.0)).unwrap();
        let e = m.estimate(&Location::planar(1.3, 0.7)).unwrap();
        assert!((e.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(e.variance >= 0.0);
    }

    #[test]
    fn constant_zero_variogram_still_solvable() {
        let ds = SpatialDataset::from_points(
            &[(0.0, 0.0, 5.0), (1.0, 0.0, 5.0), (0.0, 1.0, 5.0)],
            Crs::Planar,
        )
        .unwrap();
        let m = fit_kriging(&ds, VariogramModel::exponential(0.0, 0.0, 1.0)).unwrap();
        let (v, _) = ok_predict(&m, &Location::planar(3.0, 3.0)).unwrap();
        assert!((v - 5.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_single_point_and_crs_mismatch() {
        let one = SpatialDataset::from_points(&[(0.0, 0.0, 1.0)], Crs::Planar).unwrap();
        assert!(fit_kriging(&one, model()).is_err());
        let two =
            SpatialDataset::from_points(&[(0.0, 0.0, 1.0), (1.0, 1.0, 2.0)], Crs::Planar).unwrap();
        let m = fit_kriging(&two, model()).unwrap();
        assert!(ok_predict(&m, &Location::lat_lon(0.0, 0.0).unwrap()).is_err());
    }
}
