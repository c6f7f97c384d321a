//! Spatial uncertainty quantification with geographically weighted conformal
//! prediction.
//!
//! The crate splits into:
//!
//! * [`geo`]: locations, distances, datasets, CSV I/O and seeded splitting.
//! * [`predictors`]: the model contract plus ordinary kriging, a
//!   neighbor-weighting neural interpolator and gradient-boosted trees.
//! * [`conformal`]: nonconformity scores, split-conformal and geographically
//!   weighted quantiles, and the end-to-end pipeline.
//! * [`diagnostics`]: coverage, bootstrap baseline, RMSE, Moran's I / LISA and
//!   the uncertainty–dependence analyses.
//! * [`synth`]: Gaussian random fields and heteroscedastic regression scenes.

pub mod conformal;
pub mod diagnostics;
pub mod error;
pub mod geo;
pub mod predictors;
pub mod synth;

mod stats;

pub use error::{Error, Result, Stage};
pub use geo::{Crs, Location, SpatialDataset, SpatialRecord, SplitFractions, SplitResult};
