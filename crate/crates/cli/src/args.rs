//! Command-line definitions. Every value is read back generically through
//! [`crate::settings`], so defaults live here and show up in `--help`.

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "geoconformal",
    version,
    about = "Spatial prediction intervals with geographically weighted conformal prediction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split, fit, calibrate and write GeoCP intervals for the test part
    Geocp(GeocpArgs),
    /// Bootstrap percentile intervals on the same split, for comparison
    Bootstrap(BootstrapArgs),
    /// Multi-run comparison experiments
    Experiment(ExperimentArgs),
    /// Generate a synthetic scene as a dataset CSV
    Synth(SynthArgs),
    /// Global and local Moran's I of the target column
    Moran(MoranArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV with a header row
    #[arg(long, value_name = "PATH")]
    pub data: Option<String>,
    /// Column holding the x coordinate (longitude for latlon)
    #[arg(long, value_name = "NAME", default_value = "x")]
    pub x_col: String,
    /// Column holding the y coordinate (latitude for latlon)
    #[arg(long, value_name = "NAME", default_value = "y")]
    pub y_col: String,
    /// Column holding the target
    #[arg(long, value_name = "NAME", default_value = "target")]
    pub target_col: String,
    /// Comma-separated feature columns
    #[arg(long, value_name = "A,B,..", default_value = "")]
    pub feature_cols: String,
    /// Coordinate system of the x/y columns
    #[arg(long, value_parser = ["planar", "latlon"], default_value = "planar")]
    pub crs: String,
}

#[derive(Debug, Args)]
pub struct HyperArgs {
    /// Append x and y to the feature row of the gradient-boosted trees
    #[arg(long)]
    pub with_coords: bool,
    /// Number of boosted trees
    #[arg(long, value_name = "N", default_value = "100")]
    pub gbt_trees: String,
    /// Maximum tree depth
    #[arg(long, value_name = "N", default_value = "6")]
    pub gbt_depth: String,
    /// Boosting shrinkage
    #[arg(long, value_name = "RATE", default_value = "0.3")]
    pub gbt_learning_rate: String,
    /// Minimum samples in each child of a split
    #[arg(long, value_name = "N", default_value = "1")]
    pub gbt_min_samples: String,
    /// Neighbors per query for the neural interpolator
    #[arg(long, value_name = "K", default_value = "6")]
    pub dgsi_k: String,
    /// Hidden width of the neural interpolator
    #[arg(long, value_name = "N", default_value = "32")]
    pub dgsi_hidden: String,
    /// Training epochs of the neural interpolator
    #[arg(long, value_name = "N", default_value = "300")]
    pub dgsi_epochs: String,
    /// Learning rate of the neural interpolator
    #[arg(long, value_name = "RATE", default_value = "0.01")]
    pub dgsi_learning_rate: String,
    /// Neighbors for inverse-distance weighting
    #[arg(long, value_name = "K", default_value = "8")]
    pub knn_k: String,
    /// Distance exponent for inverse-distance weighting
    #[arg(long, value_name = "P", default_value = "2")]
    pub knn_power: String,
    /// Number of empirical semivariogram bins
    #[arg(long, value_name = "N", default_value = "12")]
    pub variogram_bins: String,
    /// Largest semivariogram lag as a fraction of the largest training distance
    #[arg(long, value_name = "FRACTION", default_value = "0.5")]
    pub variogram_max_lag: String,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Predictor to fit on the training part
    #[arg(long, default_value = "gbt", value_parser = [
        "kriging:exp", "kriging:lin", "kriging:gau", "dgsi:base", "dgsi:local", "dgsi:loc", "gbt", "knn",
    ])]
    pub predictor: String,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Args)]
pub struct ConformalArgs {
    /// Distance-decay kernel for calibration weights
    #[arg(long, value_parser = ["gaussian", "exponential", "bisquare", "uniform"], default_value = "gaussian")]
    pub kernel: String,
    /// Kernel bandwidth in distance units, or "median" for the median calibration distance
    #[arg(long, value_name = "LEN|median", default_value = "median")]
    pub bandwidth: String,
    /// Miscoverage level; intervals target 1 - epsilon
    #[arg(long, value_name = "EPS", default_value = "0.1")]
    pub epsilon: String,
    /// Train/calibration/test fractions
    #[arg(long, value_name = "A/B/C", default_value = "0.8/0.1/0.1")]
    pub split: String,
    /// Count the test point's own weight at infinity (may give unbounded intervals)
    #[arg(long)]
    pub conservative: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Random seed for splitting and training
    #[arg(long, value_name = "N", default_value = "0")]
    pub seed: String,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<String>,
    /// Worker threads (default: all cores)
    #[arg(long, value_name = "N")]
    pub threads: Option<String>,
    /// key = value file with defaults for any flag of this command
    #[arg(long, value_name = "PATH")]
    pub config: Option<String>,
}

#[derive(Debug, Args)]
pub struct GeocpArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub conformal: ConformalArgs,
    /// Also write the fitted model to this path
    #[arg(long, value_name = "PATH")]
    pub save_model: Option<String>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Miscoverage level; percentiles are epsilon/2 and 1 - epsilon/2
    #[arg(long, value_name = "EPS", default_value = "0.1")]
    pub epsilon: String,
    /// Train/calibration/test fractions (the training part is resampled)
    #[arg(long, value_name = "A/B/C", default_value = "0.8/0.1/0.1")]
    pub split: String,
    /// Bootstrap replicates
    #[arg(long, value_name = "B", default_value = "200")]
    pub replicates: String,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment to run
    #[arg(value_parser = ["regression-features", "interpolation-compare", "feature-variants"])]
    pub experiment: String,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[command(flatten)]
    pub conformal: ConformalArgs,
    /// Column that splits the rows into independent runs (e.g. days)
    #[arg(long, value_name = "NAME")]
    pub group_col: Option<String>,
    /// Neighbors in the Moran's I weights
    #[arg(long, value_name = "K", default_value = "8")]
    pub weights_k: String,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scene kind: trend plus noise, or a Gaussian random field
    #[arg(long, value_parser = ["regression", "field"], default_value = "regression")]
    pub kind: String,
    /// Number of points
    #[arg(long, value_name = "N", default_value = "500")]
    pub n: String,
    /// Domain as xmin,xmax,ymin,ymax
    #[arg(long, value_name = "X0,X1,Y0,Y1", default_value = "0,1,0,1")]
    pub extent: String,
    /// "uniform" or "clustered:K:SPREAD"
    #[arg(long, value_name = "LAYOUT", default_value = "uniform")]
    pub sampling: String,
    /// Regression noise: "constant:S", "ramp:S0:S1" or "two-region:S0:S1"
    #[arg(long, value_name = "PROFILE", default_value = "constant:1")]
    pub noise: String,
    /// Field covariance
    #[arg(long, value_parser = ["exponential", "gaussian", "nugget"], default_value = "exponential")]
    pub covariance: String,
    /// Field sill
    #[arg(long, value_name = "V", default_value = "1")]
    pub sill: String,
    /// Field range
    #[arg(long, value_name = "LEN", default_value = "0.2")]
    pub range: String,
    /// Field nugget
    #[arg(long, value_name = "V", default_value = "0")]
    pub nugget: String,
    /// Field mean
    #[arg(long, value_name = "V", default_value = "0")]
    pub mean: String,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct MoranArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Spatial weights: "knn:K" or "band:R", both row-standardized
    #[arg(long, value_name = "SCHEME", default_value = "knn:8")]
    pub weights: String,
    #[command(flatten)]
    pub run: RunArgs,
}
