//! Synthetic scenes: Gaussian random fields with known covariance and
//! regression scenes with a closed-form trend and named noise profiles.
//!
//! Regression trend, with `u, v` the coordinates rescaled to `[0, 1]` over the
//! extent:
//!
//! ```text
//! t(x, y) = sin(2πu) + cos(πv) + u·v
//! ```

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{distance_unchecked, Crs, Location, SpatialDataset, SpatialRecord};

const CHOLESKY_JITTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CovarianceKind {
    /// `sill · exp(−h/range)`
    Exponential,
    /// `sill · exp(−h²/range²)`
    Gaussian,
    /// Spatially independent: `sill` at `h = 0` only.
    Nugget,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub kind: CovarianceKind,
    pub sill: f64,
    pub range: f64,
    pub nugget: f64,
    pub mean: f64,
}

impl FieldSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sill >= 0.0
            && self.nugget >= 0.0
            && self.sill.is_finite()
            && self.nugget.is_finite())
        {
            return Err(Error::InvalidArgument(
                "sill and nugget must be finite and nonnegative".into(),
            ));
        }
        if !(self.range > 0.0 && self.range.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "range must be positive, got {}",
                self.range
            )));
        }
        if !self.mean.is_finite() {
            return Err(Error::InvalidArgument("mean must be finite".into()));
        }
        Ok(())
    }

    /// Covariance between two points at distance `h`; includes the nugget at
    /// `h = 0`.
    pub fn covariance(&self, h: f64) -> f64 {
        let structured = match self.kind {
            CovarianceKind::Exponential => self.sill * (-h / self.range).exp(),
            CovarianceKind::Gaussian => self.sill * (-(h * h) / (self.range * self.range)).exp(),
            CovarianceKind::Nugget => {
                if h == 0.0 {
                    self.sill
                } else {
                    0.0
                }
            }
        };
        structured + if h == 0.0 { self.nugget } else { 0.0 }
    }

    pub fn covariance_matrix(&self, locations: &[Location]) -> DMatrix<f64> {
        let n = locations.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.covariance(0.0)
            } else {
                self.covariance(distance_unchecked(&locations[i], &locations[j]))
            }
        })
    }
}

/// One exact draw of the field at `locations`.
pub fn sample_gaussian_field(
    spec: &FieldSpec,
    locations: &[Location],
    seed: u64,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if locations.is_empty() {
        return Err(Error::InvalidArgument("no locations to sample".into()));
    }
    if locations.iter().any(|l| l.crs != locations[0].crs) {
        return Err(Error::InvalidArgument(
            "locations mix coordinate systems".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = locations.len();
    let total = spec.sill + spec.nugget;
    if total == 0.0 {
        return Ok(vec![spec.mean; n]);
    }
    let normals: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    if spec.kind == CovarianceKind::Nugget {
        let sd = total.sqrt();
        return Ok(normals.iter().map(|z| spec.mean + sd * z).collect());
    }
    let mut cov = spec.covariance_matrix(locations);
    for i in 0..n {
        cov[(i, i)] += CHOLESKY_JITTER * total;
    }
    let chol = cov.cholesky().ok_or(Error::NotFactorizable)?;
    let draw = chol.l() * DVector::from_vec(normals);
    Ok(draw.iter().map(|v| spec.mean + v).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extent {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Extent {
    pub fn unit() -> Self {
        Self {
            x_min: 0.0,
            x_max: 1.0,
            y_min: 0.0,
            y_max: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_min < self.x_max
            && self.y_min < self.y_max;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid extent {self:?}")))
        }
    }

    fn normalized(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (x - self.x_min) / (self.x_max - self.x_min),
            (y - self.y_min) / (self.y_max - self.y_min),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Sampling {
    UniformRandom,
    /// Points scattered around `clusters` random centers with standard
    /// deviation `spread` times the extent width, clipped to the extent.
    Clustered {
        clusters: usize,
        spread: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseProfile {
    Constant(f64),
    /// Linear in x from `left` at `x_min` to `right` at `x_max`.
    LinearRamp {
        left: f64,
        right: f64,
    },
    /// `left` for x below the midpoint of the extent, `right` otherwise.
    TwoRegion {
        left: f64,
        right: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub n: usize,
    pub extent: Extent,
    pub sampling: Sampling,
    pub noise: NoiseProfile,
    pub seed: u64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::InvalidArgument(format!(
                "scenes need at least 10 points, got {}",
                self.n
            )));
        }
        self.extent.validate()?;
        if let Sampling::Clustered { clusters, spread } = self.sampling {
            if clusters == 0 || !(spread > 0.0) {
                return Err(Error::InvalidArgument(
                    "clustered sampling needs clusters ≥ 1 and spread > 0".into(),
                ));
            }
        }
        let sds = match self.noise {
            NoiseProfile::Constant(s) => vec![s],
            NoiseProfile::LinearRamp { left, right } | NoiseProfile::TwoRegion { left, right } => {
                vec![left, right]
            }
        };
        if sds.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::InvalidArgument(
                "noise standard deviations must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// True noise standard deviation at `(x, y)`.
    pub fn sigma_at(&self, x: f64, _y: f64) -> f64 {
        let e = &self.extent;
        match self.noise {
            NoiseProfile::Constant(s) => s,
            NoiseProfile::LinearRamp { left, right } => {
                let u = ((x - e.x_min) / (e.x_max - e.x_min)).clamp(0.0, 1.0);
                left + (right - left) * u
            }
            NoiseProfile::TwoRegion { left, right } => {
                if x < 0.5 * (e.x_min + e.x_max) {
                    left
                } else {
                    right
                }
            }
        }
    }

    pub fn trend_at(&self, x: f64, y: f64) -> f64 {
        let (u, v) = self.extent.normalized(x, y);
        (2.0 * std::f64::consts::PI * u).sin() + (std::f64::consts::PI * v).cos() + u * v
    }
}

pub fn sample_locations(
    n: usize,
    extent: &Extent,
    sampling: Sampling,
    rng: &mut impl Rng,
) -> Vec<Location> {
    let w = extent.x_max - extent.x_min;
    let h = extent.y_max - extent.y_min;
    match sampling {
        Sampling::UniformRandom => (0..n)
            .map(|_| {
                Location::planar(
                    extent.x_min + w * rng.random::<f64>(),
                    extent.y_min + h * rng.random::<f64>(),
                )
            })
            .collect(),
        Sampling::Clustered { clusters, spread } => {
            let centers: Vec<(f64, f64)> = (0..clusters)
                .map(|_| {
                    (
                        extent.x_min + w * rng.random::<f64>(),
                        extent.y_min + h * rng.random::<f64>(),
                    )
                })
                .collect();
            (0..n)
                .map(|_| {
                    let (cx, cy) = centers[rng.random_range(0..clusters)];
                    let dx: f64 = rng.sample(StandardNormal);
                    let dy: f64 = rng.sample(StandardNormal);
                    Location::planar(
                        (cx + spread * w * dx).clamp(extent.x_min, extent.x_max),
                        (cy + spread * w * dy).clamp(extent.y_min, extent.y_max),
                    )
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegressionScene {
    pub dataset: SpatialDataset,
    /// True noise standard deviation per record.
    pub sigma: Vec<f64>,
    /// Noise-free trend per record.
    pub trend: Vec<f64>,
}

/// Targets are `t(x, y) + σ(x, y)·N(0, 1)`; the dataset carries no features.
pub fn make_regression_scene(spec: &SceneSpec) -> Result<RegressionScene> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let locs = sample_locations(spec.n, &spec.extent, spec.sampling, &mut rng);
    let mut sigma = Vec::with_capacity(spec.n);
    let mut trend = Vec::with_capacity(spec.n);
    let records = locs
        .into_iter()
        .map(|l| {
            let s = spec.sigma_at(l.x, l.y);
            let t = spec.trend_at(l.x, l.y);
            let z: f64 = rng.sample(StandardNormal);
            sigma.push(s);
            trend.push(t);
            SpatialRecord::new(l, vec![], t + s * z)
        })
        .collect();
    Ok(RegressionScene {
        dataset: SpatialDataset::new(records, vec![], Crs::Planar)?,
        sigma,
        trend,
    })
}

/// Field realization at `n` sampled locations, as a dataset without features.
pub fn make_field_scene(
    field: &FieldSpec,
    n: usize,
    extent: &Extent,
    sampling: Sampling,
    seed: u64,
) -> Result<SpatialDataset> {
    extent.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("no points requested".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let locs = sample_locations(n, extent, sampling, &mut rng);
    let values = sample_gaussian_field(field, &locs, rng.random())?;
    let records = locs
        .into_iter()
        .zip(values)
        .map(|(l, v)| SpatialRecord::new(l, vec![], v))
        .collect();
    SpatialDataset::new(records, vec![], Crs::Planar)
}
