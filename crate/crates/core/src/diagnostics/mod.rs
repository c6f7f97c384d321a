//! Coverage, error and spatial-dependence diagnostics.

pub mod bootstrap;
pub mod coverage;
pub mod dependence;
pub mod moran;
pub mod report;

pub use bootstrap::{bootstrap_intervals, BootstrapReport};
pub use coverage::{coverage_of_bounds, coverage_ratio, pearson_corr, rmse, CoverageReport};
pub use dependence::{
    dependence_analysis, uncertainty_change_analysis, Association, DependenceAnalysis,
    DependenceEntry, DependenceRun, UncertaintyChange,
};
pub use moran::{
    build_spatial_weights, build_weights_for_locations, local_morans_i, morans_i, MoranResult,
    SpatialWeightsMatrix, WeightsScheme,
};
pub use report::{points_geojson, write_json_pretty};
