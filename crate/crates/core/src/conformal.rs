//! Split conformal prediction with geographically weighted quantiles.
//!
//! Calibration residuals `αᵢ = |f(Xᵢ) − yᵢ|` are sorted once into a
//! [`CalibrationProfile`]. For a test location, each calibration point gets
//! weight `β(dist(test, calibᵢ))` from a [`DecayKernel`]; weights are
//! normalized over the calibration set and accumulated in score order, and the
//! half-width `q̂` is the first score whose cumulative weight reaches `1 − ε`.
//! The interval is `[f(X) − q̂, f(X) + q̂]`.
//!
//! With the uniform kernel this is ordinary split conformal prediction.
//!
//! Cumulative weights are compared against `1 − ε` with an absolute slack of
//! [`CUMULATIVE_SLACK`], so that a cumulative sum that equals the target in
//! exact arithmetic is not rejected over rounding noise.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::geo::{
    distance_unchecked, median_pairwise_distance, split_dataset, Location, SpatialDataset,
    SplitFractions, SplitResult,
};
use crate::predictors::{ModelFactory, Predictor};

pub const CUMULATIVE_SLACK: f64 = 1e-12;

/// Miscoverage level ε; intervals target coverage `1 − ε`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct CoverageLevel(f64);

impl CoverageLevel {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        Ok(Self(epsilon))
    }

    pub fn epsilon(self) -> f64 {
        self.0
    }

    pub fn target(self) -> f64 {
        1.0 - self.0
    }
}

/// Calibration scores sorted ascending (stable), with their locations and the
/// index each score had in the calibration set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationProfile {
    scores: Vec<f64>,
    locations: Vec<Location>,
    original_index: Vec<usize>,
}

impl CalibrationProfile {
    pub fn new(scores: Vec<f64>, locations: Vec<Location>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::InvalidArgument("empty calibration set".into()));
        }
        if scores.len() != locations.len() {
            return Err(Error::LengthMismatch {
                left: scores.len(),
                right: locations.len(),
            });
        }
        if scores.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::InvalidArgument(
                "scores must be finite and nonnegative".into(),
            ));
        }
        if locations.iter().any(|l| l.crs != locations[0].crs) {
            return Err(Error::InvalidArgument(
                "calibration locations mix coordinate systems".into(),
            ));
        }
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
        Ok(Self {
            scores: order.iter().map(|&i| scores[i]).collect(),
            locations: order.iter().map(|&i| locations[i]).collect(),
            original_index: order,
        })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn original_index(&self) -> &[usize] {
        &self.original_index
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Absolute-residual scores of `model` on `calib`.
pub fn nonconformity_scores(
    model: &dyn Predictor,
    calib: &SpatialDataset,
) -> Result<CalibrationProfile> {
    if calib.is_empty() {
        return Err(Error::InvalidArgument("empty calibration set".into()));
    }
    let preds = crate::predictors::predict_batch(model, calib.records())?;
    let scores = preds
        .iter()
        .zip(calib.records())
        .map(|(p, r)| (p - r.target).abs())
        .collect();
    CalibrationProfile::new(scores, calib.locations())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelFamily {
    Gaussian,
    Exponential,
    Bisquare,
    Uniform,
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "exponential" => Ok(Self::Exponential),
            "bisquare" => Ok(Self::Bisquare),
            "uniform" => Ok(Self::Uniform),
            other => Err(Error::InvalidArgument(format!("unknown kernel '{other}'"))),
        }
    }
}

/// Distance-decay function β with `β(0) = 1`, nonincreasing in distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayKernel {
    family: KernelFamily,
    bandwidth: f64,
}

impl DecayKernel {
    pub fn new(family: KernelFamily, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0) || bandwidth.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(Self { family, bandwidth })
    }

    pub fn uniform() -> Self {
        Self {
            family: KernelFamily::Uniform,
            bandwidth: 1.0,
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn weight(&self, d: f64) -> f64 {
        let b = self.bandwidth;
        match self.family {
            KernelFamily::Gaussian => (-(d * d) / (2.0 * b * b)).exp(),
            KernelFamily::Exponential => (-d / b).exp(),
            KernelFamily::Bisquare => {
                if d < b {
                    let u = d / b;
                    (1.0 - u * u).powi(2)
                } else {
                    0.0
                }
            }
            KernelFamily::Uniform => 1.0,
        }
    }
}

pub fn kernel_weight(kernel: &DecayKernel, d: f64) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "distance must be nonnegative, got {d}"
        )));
    }
    Ok(kernel.weight(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bandwidth {
    Fixed(f64),
    /// Median pairwise distance between calibration locations.
    MedianCalibration,
}

impl std::str::FromStr for Bandwidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "median" {
            return Ok(Self::MedianCalibration);
        }
        match s.parse::<f64>() {
            Ok(b) if b > 0.0 && b.is_finite() => Ok(Self::Fixed(b)),
            _ => Err(Error::InvalidArgument(format!(
                "bandwidth must be 'median' or a positive number, got '{s}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub bandwidth: Bandwidth,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self {
            family: KernelFamily::Gaussian,
            bandwidth: Bandwidth::MedianCalibration,
        }
    }
}

impl KernelSpec {
    pub fn resolve(&self, profile: &CalibrationProfile) -> Result<DecayKernel> {
        let b = match self.bandwidth {
            Bandwidth::Fixed(b) => b,
            Bandwidth::MedianCalibration => {
                let m = median_pairwise_distance(profile.locations());
                if m > 0.0 {
                    m
                } else {
                    log::warn!("median calibration distance is zero; using bandwidth 1");
                    1.0
                }
            }
        };
        DecayKernel::new(self.family, b)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantileOptions {
    /// Adds the test point's own mass `β(0)` at `+∞` before normalizing;
    /// the quantile is infinite when calibration mass cannot reach `1 − ε`.
    pub conservative: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoQuantile {
    pub q_hat: f64,
    /// True when every kernel weight was zero and uniform weights were used.
    pub uniform_fallback: bool,
}

/// Weighted quantile over sorted scores; `weights[i]` belongs to `scores[i]`.
fn weighted_quantile(
    scores: &[f64],
    weights: &[f64],
    level: CoverageLevel,
    extra_mass: f64,
) -> f64 {
    let total: f64 = weights.iter().sum::<f64>() + extra_mass;
    let threshold = level.target() - CUMULATIVE_SLACK;
    let mut cumulative = 0.0;
    for (s, w) in scores.iter().zip(weights) {
        cumulative += w / total;
        if cumulative >= threshold {
            return *s;
        }
    }
    if extra_mass > 0.0 {
        f64::INFINITY
    } else {
        *scores.last().expect("profile is nonempty")
    }
}

/// Plain split-conformal quantile: the smallest score whose uniform
/// cumulative weight `k/m` reaches `1 − ε`.
pub fn cp_quantile(profile: &CalibrationProfile, level: CoverageLevel) -> f64 {
    let weights = vec![1.0; profile.len()];
    weighted_quantile(&profile.scores, &weights, level, 0.0)
}

pub fn geo_quantile(
    profile: &CalibrationProfile,
    test_loc: &Location,
    kernel: &DecayKernel,
    level: CoverageLevel,
) -> Result<f64> {
    Ok(geo_quantile_with(profile, test_loc, kernel, level, QuantileOptions::default())?.q_hat)
}

pub fn geo_quantile_with(
    profile: &CalibrationProfile,
    test_loc: &Location,
    kernel: &DecayKernel,
    level: CoverageLevel,
    options: QuantileOptions,
) -> Result<GeoQuantile> {
    let crs = profile.locations[0].crs;
    if test_loc.crs != crs {
        return Err(Error::CrsMismatch {
            a: crs,
            b: test_loc.crs,
        });
    }
    let weights: Vec<f64> = profile
        .locations
        .iter()
        .map(|l| kernel.weight(distance_unchecked(test_loc, l)))
        .collect();
    let extra = if options.conservative {
        kernel.weight(0.0)
    } else {
        0.0
    };
    let q = quantile_from_weights(profile, weights, level, extra);
    if q.uniform_fallback {
        log::warn!(
            "all calibration weights are zero at ({}, {}); falling back to uniform weights",
            test_loc.x,
            test_loc.y
        );
    }
    Ok(q)
}

/// Weighted quantile for explicit nonnegative weights, one per profile entry
/// in sorted-score order. A positive `test_mass` is placed at `+∞`.
pub fn weighted_profile_quantile(
    profile: &CalibrationProfile,
    weights: &[f64],
    level: CoverageLevel,
    test_mass: f64,
) -> Result<GeoQuantile> {
    if weights.len() != profile.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: profile.len(),
        });
    }
    if weights
        .iter()
        .chain([&test_mass])
        .any(|w| !(w.is_finite() && *w >= 0.0))
    {
        return Err(Error::InvalidArgument(
            "weights must be finite and nonnegative".into(),
        ));
    }
    Ok(quantile_from_weights(
        profile,
        weights.to_vec(),
        level,
        test_mass,
    ))
}

fn quantile_from_weights(
    profile: &CalibrationProfile,
    mut weights: Vec<f64>,
    level: CoverageLevel,
    extra: f64,
) -> GeoQuantile {
    let mut uniform_fallback = false;
    if weights.iter().sum::<f64>() <= 0.0 {
        weights.iter_mut().for_each(|w| *w = 1.0);
        uniform_fallback = true;
    }
    GeoQuantile {
        q_hat: weighted_quantile(&profile.scores, &weights, level, extra),
        uniform_fallback,
    }
}

/// Symmetric prediction interval `[center − half_width, center + half_width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoInterval {
    pub center: f64,
    pub half_width: f64,
    pub level: CoverageLevel,
}

impl GeoInterval {
    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    /// Interval length `2 q̂`, reported as the uncertainty.
    pub fn length(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn contains(&self, y: f64) -> bool {
        self.lower() <= y && y <= self.upper()
    }
}

/// Per-location quantiles for many test points, in input order.
pub fn geo_quantiles(
    profile: &CalibrationProfile,
    locations: &[Location],
    kernel: &DecayKernel,
    level: CoverageLevel,
    options: QuantileOptions,
) -> Result<Vec<GeoQuantile>> {
    locations
        .par_iter()
        .map(|l| geo_quantile_with(profile, l, kernel, level, options))
        .collect()
}

/// GeoCP intervals for `test` around `model` predictions.
pub fn geocp_intervals(
    model: &dyn Predictor,
    profile: &CalibrationProfile,
    test: &SpatialDataset,
    kernel: &DecayKernel,
    level: CoverageLevel,
    options: QuantileOptions,
) -> Result<Vec<GeoInterval>> {
    let preds = crate::predictors::predict_batch(model, test.records())?;
    let qs = geo_quantiles(profile, &test.locations(), kernel, level, options)?;
    Ok(preds
        .into_iter()
        .zip(qs)
        .map(|(center, q)| GeoInterval {
            center,
            half_width: q.q_hat,
            level,
        })
        .collect())
}

/// Plain split-conformal intervals: one half-width for every test point.
pub fn cp_intervals(
    model: &dyn Predictor,
    profile: &CalibrationProfile,
    test: &SpatialDataset,
    level: CoverageLevel,
) -> Result<Vec<GeoInterval>> {
    let q = cp_quantile(profile, level);
    let preds = crate::predictors::predict_batch(model, test.records())?;
    Ok(preds
        .into_iter()
        .map(|center| GeoInterval {
            center,
            half_width: q,
            level,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoCpConfig {
    pub kernel: KernelSpec,
    pub level: CoverageLevel,
    pub fractions: SplitFractions,
    pub seed: u64,
    pub options: QuantileOptions,
}

pub struct GeoCpRun {
    pub split: SplitResult,
    pub model: Box<dyn Predictor>,
    pub profile: CalibrationProfile,
    pub kernel: DecayKernel,
    pub intervals: Vec<GeoInterval>,
    /// Test points whose weights fell back to uniform.
    pub fallback_count: usize,
    pub fit_seconds: f64,
    pub total_seconds: f64,
}

/// Split, fit, score, then per-test-point weighted quantiles.
pub fn geocp_run(
    ds: &SpatialDataset,
    factory: &dyn ModelFactory,
    cfg: &GeoCpConfig,
) -> Result<GeoCpRun> {
    let start = Instant::now();
    let split = split_dataset(ds, cfg.fractions, cfg.seed).map_err(Error::at(Stage::Split))?;
    if split.train.is_empty() || split.calib.is_empty() {
        return Err(Error::at(Stage::Split)(Error::InvalidFractions(
            "training and calibration parts must be nonempty".into(),
        )));
    }
    let fit_start = Instant::now();
    let model = factory
        .fit(&split.train, cfg.seed)
        .map_err(Error::at(Stage::Fit))?;
    let fit_seconds = fit_start.elapsed().as_secs_f64();
    let profile =
        nonconformity_scores(model.as_ref(), &split.calib).map_err(Error::at(Stage::Score))?;

    let kernel = cfg
        .kernel
        .resolve(&profile)
        .map_err(Error::at(Stage::Quantile))?;
    let preds = crate::predictors::predict_batch(model.as_ref(), split.test.records())
        .map_err(Error::at(Stage::Quantile))?;
    let qs = geo_quantiles(
        &profile,
        &split.test.locations(),
        &kernel,
        cfg.level,
        cfg.options,
    )
    .map_err(Error::at(Stage::Quantile))?;
    let fallback_count = qs.iter().filter(|q| q.uniform_fallback).count();
    let intervals = preds
        .into_iter()
        .zip(qs)
        .map(|(center, q)| GeoInterval {
            center,
            half_width: q.q_hat,
            level: cfg.level,
        })
        .collect();
    Ok(GeoCpRun {
        split,
        model,
        profile,
        kernel,
        intervals,
        fallback_count,
        fit_seconds,
        total_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Writes `x,y,y_true,y_pred,q_hat,lower,upper,length`, one row per test
/// point in the given order. `y_true` is left empty when `truth` is `None`.
pub fn write_intervals_csv<W: Write>(
    locations: &[Location],
    truth: Option<&[f64]>,
    intervals: &[GeoInterval],
    writer: W,
) -> Result<()> {
    if locations.len() != intervals.len() {
        return Err(Error::LengthMismatch {
            left: locations.len(),
            right: intervals.len(),
        });
    }
    if let Some(t) = truth {
        if t.len() != intervals.len() {
            return Err(Error::LengthMismatch {
                left: t.len(),
                right: intervals.len(),
            });
        }
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "x", "y", "y_true", "y_pred", "q_hat", "lower", "upper", "length",
    ])?;
    for (i, (loc, iv)) in locations.iter().zip(intervals).enumerate() {
        let y_true = truth.map(|t| t[i].to_string()).unwrap_or_default();
        w.write_record([
            loc.x.to_string(),
            loc.y.to_string(),
            y_true,
            iv.center.to_string(),
            iv.half_width.to_string(),
            iv.lower().to_string(),
            iv.upper().to_string(),
            iv.length().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::Crs;
    use crate::predictors::PredictorSpec;

    fn eps(e: f64) -> CoverageLevel {
        CoverageLevel::new(e).unwrap()
    }

    fn profile(scores: &[f64]) -> CalibrationProfile {
        let locs = (0..scores.len())
            .map(|i| Location::planar(i as f64, 0.0))
            .collect();
        CalibrationProfile::new(scores.to_vec(), locs).unwrap()
    }

    struct Offset(f64);

    impl Predictor for Offset {
        fn predict(&self, loc: &Location, _: &[f64]) -> Result<f64> {
            Ok(loc.x + loc.y + self.0)
        }
    }

    fn truth_ds(n: usize) -> SpatialDataset {
        let pts: Vec<_> = (0..n)
            .map(|i| (i as f64, (i % 3) as f64, i as f64 + (i % 3) as f64))
            .collect();
        SpatialDataset::from_points(&pts, Crs::Planar).unwrap()
    }

    #[test]
    fn coverage_level_bounds() {
        assert!(CoverageLevel::new(0.0).is_err());
        assert!(CoverageLevel::new(1.0).is_err());
        assert!(CoverageLevel::new(0.1).is_ok());
    }

    #[test]
    fn scores_perfect_and_offset() {
        let ds = truth_ds(10);
        let p = nonconformity_scores(&Offset(0.0), &ds).unwrap();
        assert!(p.scores().iter().all(|&s| s == 0.0));
        let p = nonconformity_scores(&Offset(1.0), &ds).unwrap();
        assert!(p.scores().iter().all(|&s| s == 1.0));
        let empty = SpatialDataset::new(vec![], vec![], Crs::Planar).unwrap();
        assert!(nonconformity_scores(&Offset(0.0), &empty).is_err());
    }

    #[test]
    fn profile_sorted_stably() {
        let p = profile(&[3.0, 1.0, 3.0, 0.5]);
        assert_eq!(p.scores(), &[0.5, 1.0, 3.0, 3.0]);
        assert_eq!(p.original_index(), &[3, 1, 0, 2]);
        assert_eq!(p.locations()[2].x, 0.0);
    }

    #[test]
    fn kernel_values() {
        for fam in [
            KernelFamily::Gaussian,
            KernelFamily::Exponential,
            KernelFamily::Bisquare,
            KernelFamily::Uniform,
        ] {
            let k = DecayKernel::new(fam, 2.0).unwrap();
            assert_eq!(kernel_weight(&k, 0.0).unwrap(), 1.0);
        }
        let g = DecayKernel::new(KernelFamily::Gaussian, 3.0).unwrap();
        assert!((g.weight(3.0) - 0.6065306597126334).abs() < 1e-15);
        let b = DecayKernel::new(KernelFamily::Bisquare, 3.0).unwrap();
        assert_eq!(b.weight(3.0), 0.0);
        assert!(DecayKernel::new(KernelFamily::Gaussian, 0.0).is_err());
        assert!(DecayKernel::new(KernelFamily::Gaussian, -1.0).is_err());
        assert!(kernel_weight(&g, -1.0).is_err());
    }

    #[test]
    fn cp_quantile_examples() {
        let p = profile(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(cp_quantile(&p, eps(0.4)), 3.0);
        assert_eq!(cp_quantile(&p, eps(0.01)), 5.0);
        assert_eq!(cp_quantile(&profile(&[7.0]), eps(0.9)), 7.0);
    }

    #[test]
    fn uniform_kernel_reduces_to_cp() {
        let p = profile(&[0.3, 2.0, 1.1, 0.7, 5.2, 3.3, 0.01]);
        for e in [0.05, 0.1, 0.2] {
            let q = geo_quantile(
                &p,
                &Location::planar(2.5, 1.0),
                &DecayKernel::uniform(),
                eps(e),
            )
            .unwrap();
            assert_eq!(q, cp_quantile(&p, eps(e)));
        }
    }

    #[test]
    fn point_mass_limit() {
        let scores = [0.1, 0.2, 9.0, 0.3, 0.4];
        let locs: Vec<Location> = (0..5)
            .map(|i| Location::planar(i as f64 * 10.0, 0.0))
            .collect();
        let p = CalibrationProfile::new(scores.to_vec(), locs).unwrap();
        let k = DecayKernel::new(KernelFamily::Gaussian, 0.01).unwrap();
        let q = geo_quantile(&p, &Location::planar(20.0, 0.0), &k, eps(0.1)).unwrap();
        assert_eq!(q, 9.0);
    }

    #[test]
    fn zero_weight_falls_back_to_uniform() {
        let p = profile(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let k = DecayKernel::new(KernelFamily::Bisquare, 0.5).unwrap();
        let far = Location::planar(100.0, 100.0);
        let q = geo_quantile_with(&p, &far, &k, eps(0.4), QuantileOptions::default()).unwrap();
        assert!(q.uniform_fallback);
        assert_eq!(q.q_hat, 3.0);
    }

    #[test]
    fn conservative_adds_test_mass() {
        let p = profile(&[1.0, 2.0, 3.0, 4.0]);
        let u = DecayKernel::uniform();
        let loc = Location::planar(0.0, 0.0);
        let cons = QuantileOptions { conservative: true };
        // 4 calibration masses + 1 test mass: k/5 >= 0.6 at k = 3.
        assert_eq!(
            geo_quantile_with(&p, &loc, &u, eps(0.4), cons)
                .unwrap()
                .q_hat,
            3.0
        );
        // 1 - ε = 0.9 cannot be reached by 4/5.
        assert_eq!(
            geo_quantile_with(&p, &loc, &u, eps(0.1), cons)
                .unwrap()
                .q_hat,
            f64::INFINITY
        );
    }

    #[test]
    fn crs_mismatch_rejected() {
        let p = profile(&[1.0]);
        let q = Location::lat_lon(0.0, 0.0).unwrap();
        assert!(geo_quantile(&p, &q, &DecayKernel::uniform(), eps(0.1)).is_err());
    }

    #[test]
    fn bandwidth_parsing() {
        assert_eq!(
            "median".parse::<Bandwidth>().unwrap(),
            Bandwidth::MedianCalibration
        );
        assert_eq!("2.5".parse::<Bandwidth>().unwrap(), Bandwidth::Fixed(2.5));
        assert!("-1".parse::<Bandwidth>().is_err());
        assert!("wide".parse::<Bandwidth>().is_err());
    }

    #[test]
    fn pipeline_perfect_predictor_zero_width() {
        // Targets equal x + y, which the offset-0 model reproduces.
        struct Factory;
        impl ModelFactory for Factory {
            fn fit(&self, _: &SpatialDataset, _: u64) -> Result<Box<dyn Predictor>> {
                Ok(Box::new(Offset(0.0)))
            }
        }
        let ds = truth_ds(50);
        let cfg = GeoCpConfig {
            kernel: KernelSpec::default(),
            level: eps(0.1),
            fractions: SplitFractions::default(),
            seed: 3,
            options: QuantileOptions::default(),
        };
        let run = geocp_run(&ds, &Factory, &cfg).unwrap();
        assert_eq!(run.intervals.len(), run.split.test.len());
        for (iv, r) in run.intervals.iter().zip(run.split.test.records()) {
            assert_eq!(iv.length(), 0.0);
            assert_eq!(iv.center, r.target);
        }
    }

    #[test]
    fn pipeline_uniform_kernel_constant_length() {
        let ds = truth_ds(60);
        let cfg = GeoCpConfig {
            kernel: KernelSpec {
                family: KernelFamily::Uniform,
                bandwidth: Bandwidth::Fixed(1.0),
            },
            level: eps(0.1),
            fractions: SplitFractions::new(0.6, 0.2, 0.2).unwrap(),
            seed: 1,
            options: QuantileOptions::default(),
        };
        let spec: PredictorSpec = "knn".parse().unwrap();
        let run = geocp_run(&ds, &spec, &cfg).unwrap();
        let first = run.intervals[0].length();
        assert!(run.intervals.iter().all(|iv| iv.length() == first));
    }

    #[test]
    fn pipeline_errors_are_stage_labeled() {
        let ds = truth_ds(3);
        let cfg = GeoCpConfig {
            kernel: KernelSpec::default(),
            level: eps(0.1),
            fractions: SplitFractions::new(1.0, 0.0, 0.0).unwrap(),
            seed: 0,
            options: QuantileOptions::default(),
        };
        let spec: PredictorSpec = "knn".parse().unwrap();
        let err = geocp_run(&ds, &spec, &cfg).err().unwrap();
        assert!(err.to_string().starts_with("stage 1"), "{err}");

        let ds = truth_ds(20);
        let cfg = GeoCpConfig {
            fractions: SplitFractions::new(0.2, 0.4, 0.4).unwrap(),
            ..cfg
        };
        let spec: PredictorSpec = "dgsi:base".parse().unwrap();
        let err = geocp_run(&ds, &spec, &cfg).err().unwrap();
        assert!(err.to_string().starts_with("stage 2"), "{err}");
    }

    #[test]
    fn interval_csv_layout() {
        let ivs = [GeoInterval {
            center: 2.0,
            half_width: 0.5,
            level: eps(0.1),
        }];
        let mut buf = Vec::new();
        write_intervals_csv(&[Location::planar(1.0, 2.0)], Some(&[2.2]), &ivs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "x,y,y_true,y_pred,q_hat,lower,upper,length\n1,2,2.2,2,0.5,1.5,2.5,1\n"
        );
    }
}
