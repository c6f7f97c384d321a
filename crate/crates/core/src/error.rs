use std::fmt;

use thiserror::Error;

use crate::geo::Crs;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Pipeline stage labels attached to errors raised inside [`crate::conformal::geocp_run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Split,
    Fit,
    Score,
    Quantile,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Split => "stage 1 (split)",
            Stage::Fit => "stage 2 (fit)",
            Stage::Score => "stage 3 (nonconformity scores)",
            Stage::Quantile => "stage 4 (geographically weighted quantile)",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate reference mismatch: {a:?} vs {b:?}")]
    CrsMismatch { a: Crs, b: Crs },

    #[error("invalid location: {0}")]
    InvalidLocation(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid split fractions: {0}")]
    InvalidFractions(String),

    #[error("missing column '{0}'")]
    MissingColumn(String),

    #[error("cannot parse value '{value}' in row {row}, column '{column}'")]
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("zero variance")]
    ZeroVariance,

    #[error("singular kriging system (pivot ratio {pivot_ratio:.3e})")]
    SingularSystem { pivot_ratio: f64 },

    #[error("covariance matrix is not factorizable")]
    NotFactorizable,

    #[error("non-finite training loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("variogram fit failed: {0}")]
    VariogramFit(String),

    #[error("feature schema mismatch: model expects {expected} features, query has {found}")]
    SchemaMismatch { expected: usize, found: usize },

    #[error("bootstrap replicate {index} failed: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at(stage: Stage) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}
