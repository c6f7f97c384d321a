//! The predictor contract and the built-in models.
//!
//! Any fitted model implementing [`Predictor`] can be conformalized; any
//! [`ModelFactory`] can be driven through the full pipeline and the bootstrap
//! baseline. [`PredictorSpec`] is the factory for the built-in models, which
//! fit into a serializable [`FittedModel`].

pub mod dgsi;
pub mod gbt;
pub mod knn;
pub mod kriging;
pub mod variogram;

use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{max_pairwise_distance, Location, SpatialDataset, SpatialRecord};

pub use dgsi::{train_dgsi_lite, DgsiHyper, DgsiLiteModel, DgsiVariant};
pub use gbt::{train_gbt, train_gbt_dataset, GbtHyper, GbtModel};
pub use knn::{fit_knn, KnnModel};
pub use kriging::{fit_kriging, ok_predict, KrigingModel};
pub use variogram::{
    empirical_semivariogram, fit_variogram, EmpiricalVariogram, VariogramFit, VariogramKind,
    VariogramModel,
};

/// A fitted regressor. Prediction must be deterministic and re-entrant.
pub trait Predictor: Send + Sync {
    fn predict(&self, loc: &Location, features: &[f64]) -> Result<f64>;

    fn predict_record(&self, rec: &SpatialRecord) -> Result<f64> {
        self.predict(&rec.loc, &rec.features)
    }

    /// Model-internal variance at `loc`, for models that have one.
    fn kriging_variance(&self, _loc: &Location) -> Option<Result<f64>> {
        None
    }
}

/// Something that can be fitted on a training set.
pub trait ModelFactory: Sync {
    fn fit(&self, train: &SpatialDataset, seed: u64) -> Result<Box<dyn Predictor>>;
}

/// Element-wise prediction preserving query order.
pub fn predict_batch(model: &dyn Predictor, queries: &[SpatialRecord]) -> Result<Vec<f64>> {
    queries
        .par_iter()
        .map(|q| model.predict_record(q))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrigingSpec {
    pub kind: VariogramKind,
    pub n_bins: usize,
    /// Maximum variogram lag as a fraction of the largest training distance.
    pub max_lag_fraction: f64,
}

impl KrigingSpec {
    pub fn new(kind: VariogramKind) -> Self {
        Self {
            kind,
            n_bins: 12,
            max_lag_fraction: 0.5,
        }
    }

    pub fn fit_variogram(&self, train: &SpatialDataset) -> Result<VariogramFit> {
        let max_lag = max_pairwise_distance(&train.locations()) * self.max_lag_fraction;
        if !(max_lag > 0.0) {
            return Err(Error::InvalidArgument(
                "training locations are all identical".into(),
            ));
        }
        let emp = empirical_semivariogram(train, self.n_bins, max_lag)?;
        fit_variogram(&emp, self.kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PredictorSpec {
    Kriging(KrigingSpec),
    Dgsi {
        variant: DgsiVariant,
        hyper: DgsiHyper,
    },
    Gbt {
        hyper: GbtHyper,
        include_coords: bool,
    },
    Knn {
        k: usize,
        power: f64,
    },
}

impl PredictorSpec {
    pub fn fit_model(&self, train: &SpatialDataset, seed: u64) -> Result<FittedModel> {
        Ok(match self {
            PredictorSpec::Kriging(spec) => {
                let fit = spec.fit_variogram(train)?;
                FittedModel::Kriging(fit_kriging(train, fit.model)?)
            }
            PredictorSpec::Dgsi { variant, hyper } => {
                FittedModel::Dgsi(train_dgsi_lite(train, *variant, *hyper, seed)?)
            }
            PredictorSpec::Gbt {
                hyper,
                include_coords,
            } => FittedModel::Gbt(train_gbt_dataset(train, *hyper, *include_coords)?),
            PredictorSpec::Knn { k, power } => FittedModel::Knn(fit_knn(train, *k, *power)?),
        })
    }

    /// Stable short name, e.g. `kriging:exp` or `dgsi:local`.
    pub fn name(&self) -> String {
        match self {
            PredictorSpec::Kriging(s) => format!("kriging:{}", s.kind.short_name()),
            PredictorSpec::Dgsi { variant, .. } => format!("dgsi:{}", variant.short_name()),
            PredictorSpec::Gbt { .. } => "gbt".into(),
            PredictorSpec::Knn { .. } => "knn".into(),
        }
    }
}

impl ModelFactory for PredictorSpec {
    fn fit(&self, train: &SpatialDataset, seed: u64) -> Result<Box<dyn Predictor>> {
        Ok(Box::new(self.fit_model(train, seed)?))
    }
}

impl FromStr for PredictorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "kriging:exp" => PredictorSpec::Kriging(KrigingSpec::new(VariogramKind::Exponential)),
            "kriging:lin" => PredictorSpec::Kriging(KrigingSpec::new(VariogramKind::Linear)),
            "kriging:gau" => PredictorSpec::Kriging(KrigingSpec::new(VariogramKind::Gaussian)),
            "dgsi:base" | "dgsi:local" | "dgsi:loc" => PredictorSpec::Dgsi {
                variant: match s {
                    "dgsi:base" => DgsiVariant::Base,
                    "dgsi:local" => DgsiVariant::LocalFeature,
                    _ => DgsiVariant::Location,
                },
                hyper: DgsiHyper::default(),
            },
            "gbt" => PredictorSpec::Gbt {
                hyper: GbtHyper::default(),
                include_coords: false,
            },
            "knn" => PredictorSpec::Knn { k: 8, power: 2.0 },
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown predictor '{other}'"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    Kriging(KrigingModel),
    Dgsi(DgsiLiteModel),
    Gbt(GbtModel),
    Knn(KnnModel),
}

impl Predictor for FittedModel {
    fn predict(&self, loc: &Location, features: &[f64]) -> Result<f64> {
        match self {
            FittedModel::Kriging(m) => m.predict(loc, features),
            FittedModel::Dgsi(m) => m.predict(loc, features),
            FittedModel::Gbt(m) => m.predict(loc, features),
            FittedModel::Knn(m) => m.predict(loc, features),
        }
    }

    fn kriging_variance(&self, loc: &Location) -> Option<Result<f64>> {
        match self {
            FittedModel::Kriging(m) => m.kriging_variance(loc),
            _ => None,
        }
    }
}

/// Identifier written at the top of every saved model.
pub const MODEL_FORMAT: &str = "geoconformal-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SavedModel {
    format: String,
    version: u32,
    model: FittedModel,
}

/// Saved models are JSON objects `{"format": "geoconformal-model",
/// "version": 1, "model": {"kind": ..., ...}}`. Floats are written in
/// shortest round-trip form, so loading reproduces predictions exactly.
pub fn save_model(model: &FittedModel, path: impl AsRef<Path>) -> Result<()> {
    let text = model_to_string(model)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn model_to_string(model: &FittedModel) -> Result<String> {
    let saved = SavedModel {
        format: MODEL_FORMAT.into(),
        version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    };
    Ok(serde_json::to_string_pretty(&saved)?)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<FittedModel> {
    model_from_str(&std::fs::read_to_string(path)?)
}

pub fn model_from_str(text: &str) -> Result<FittedModel> {
    let saved: SavedModel = serde_json::from_str(text)?;
    if saved.format != MODEL_FORMAT {
        return Err(Error::ModelFormat(format!(
            "unexpected format tag '{}'",
            saved.format
        )));
    }
    if saved.version != MODEL_FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported version {}",
            saved.version
        )));
    }
    Ok(saved.model)
}
