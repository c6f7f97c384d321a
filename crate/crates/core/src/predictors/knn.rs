//! Inverse-distance weighted k-nearest-neighbor interpolation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{nearest, Location, SpatialDataset};
use crate::predictors::Predictor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    k: usize,
    power: f64,
    locations: Vec<Location>,
    targets: Vec<f64>,
}

pub fn fit_knn(train: &SpatialDataset, k: usize, power: f64) -> Result<KnnModel> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    Ok(KnnModel {
        k: k.min(train.len()),
        power,
        locations: train.locations(),
        targets: train.targets(),
    })
}

impl Predictor for KnnModel {
    fn predict(&self, loc: &Location, _features: &[f64]) -> Result<f64> {
        let crs = self.locations[0].crs;
        if loc.crs != crs {
            return Err(Error::CrsMismatch { a: crs, b: loc.crs });
        }
        let nb = nearest(&self.locations, loc, self.k, None);
        if nb[0].1 == 0.0 {
            return Ok(self.targets[nb[0].0]);
        }
        let (mut num, mut den) = (0.0, 0.0);
        for (j, d) in nb {
            let w = d.powf(-self.power);
            num += w * self.targets[j];
            den += w;
        }
        Ok(num / den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::Crs;

    #[test]
    fn exact_hit_and_midpoint() {
        let ds = SpatialDataset::from_points(
            &[(0.0, 0.0, 1.0), (2.0, 0.0, 3.0), (10.0, 10.0, 100.0)],
            Crs::Planar,
        )
        .unwrap();
        let m = fit_knn(&ds, 2, 2.0).unwrap();
        assert_eq!(m.predict(&Location::planar(2.0, 0.0), &[]).unwrap(), 3.0);
        assert!((m.predict(&Location::planar(1.0, 0.0), &[]).unwrap() - 2.0).abs() < 1e-12);
    }
}
