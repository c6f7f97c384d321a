use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use geoconformal::conformal::{
    cp_intervals, geocp_run, write_intervals_csv, CoverageLevel, GeoCpConfig, GeoCpRun, KernelSpec,
    QuantileOptions,
};
use geoconformal::diagnostics::{
    bootstrap_intervals, build_weights_for_locations, coverage_ratio, local_morans_i, morans_i,
    pearson_corr, points_geojson, rmse, CoverageReport, MoranResult, WeightsScheme,
};
use geoconformal::geo::{
    parse_dataset_from_reader, split_dataset, write_dataset_csv, ColumnMapping, LoadedDataset,
};
use geoconformal::predictors::{save_model, FittedModel, ModelFactory, Predictor, PredictorSpec};
use geoconformal::synth::{
    make_field_scene, make_regression_scene, CovarianceKind, Extent, FieldSpec, NoiseProfile,
    Sampling, SceneSpec,
};
use geoconformal::{Crs, Location, SpatialDataset};

use crate::output::{num, seconds, timestamp, Bundle};
use crate::settings::Settings;

pub struct DataPlan {
    pub path: PathBuf,
    pub mapping: ColumnMapping,
    pub group_col: Option<String>,
}

pub fn data_plan(s: &Settings) -> Result<DataPlan> {
    let crs = match s.str("crs")? {
        "planar" => Crs::Planar,
        "latlon" => Crs::LatLon,
        other => bail!("invalid value '{other}' for --crs"),
    };
    let features = s
        .opt("feature-cols")
        .map(|f| {
            f.split(',')
                .map(|c| c.trim().to_string())
                .filter(|c| !c.is_empty())
                .collect()
        })
        .unwrap_or_default();
    Ok(DataPlan {
        path: PathBuf::from(s.str("data")?),
        mapping: ColumnMapping {
            x: s.str("x-col")?.to_string(),
            y: s.str("y-col")?.to_string(),
            target: s.str("target-col")?.to_string(),
            features,
            crs,
        },
        group_col: s.opt("group-col").map(str::to_string),
    })
}

fn log_warnings(loaded: &LoadedDataset, label: &str) {
    for w in &loaded.warnings {
        log::warn!("{label}: {w}");
    }
}

pub fn load_dataset(plan: &DataPlan) -> Result<LoadedDataset> {
    let file = std::fs::File::open(&plan.path)
        .with_context(|| format!("opening {}", plan.path.display()))?;
    let loaded = parse_dataset_from_reader(file, &plan.mapping)
        .with_context(|| format!("reading {}", plan.path.display()))?;
    log_warnings(&loaded, &plan.path.display().to_string());
    Ok(loaded)
}

/// One dataset per distinct value of the group column, in order of first
/// appearance; a single group named `all` without a group column.
pub fn load_groups(plan: &DataPlan) -> Result<Vec<(String, LoadedDataset)>> {
    let Some(col) = &plan.group_col else {
        return Ok(vec![("all".to_string(), load_dataset(plan)?)]);
    };
    let mut reader = csv::Reader::from_path(&plan.path)
        .with_context(|| format!("opening {}", plan.path.display()))?;
    let headers = reader.headers()?.clone();
    let gi = headers
        .iter()
        .position(|h| h == col)
        .ok_or_else(|| anyhow!("group column '{col}' not found"))?;
    let mut order: Vec<String> = Vec::new();
    let mut rows: BTreeMap<String, Vec<csv::StringRecord>> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec?;
        let key = rec.get(gi).unwrap_or("").to_string();
        if !rows.contains_key(&key) {
            order.push(key.clone());
        }
        rows.entry(key).or_default().push(rec);
    }
    order
        .into_iter()
        .map(|key| {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&headers)?;
            for r in &rows[&key] {
                w.write_record(r)?;
            }
            let bytes = w.into_inner().map_err(|e| anyhow!("{e}"))?;
            let loaded = parse_dataset_from_reader(bytes.as_slice(), &plan.mapping)
                .with_context(|| format!("group '{key}'"))?;
            log_warnings(&loaded, &format!("group '{key}'"));
            Ok((key, loaded))
        })
        .collect()
}

/// Named predictor with hyperparameters taken from the settings.
pub fn predictor_spec(s: &Settings, name: &str) -> Result<PredictorSpec> {
    let mut spec: PredictorSpec = name.parse()?;
    let with_coords = s.flag("with-coords")?;
    match &mut spec {
        PredictorSpec::Gbt {
            hyper,
            include_coords,
        } => {
            hyper.trees = s.get("gbt-trees")?;
            hyper.depth = s.get("gbt-depth")?;
            hyper.learning_rate = s.get("gbt-learning-rate")?;
            hyper.min_samples = s.get("gbt-min-samples")?;
            *include_coords = with_coords;
        }
        PredictorSpec::Dgsi { hyper, .. } => {
            hyper.k = s.get("dgsi-k")?;
            hyper.hidden = s.get("dgsi-hidden")?;
            hyper.epochs = s.get("dgsi-epochs")?;
            hyper.learning_rate = s.get("dgsi-learning-rate")?;
        }
        PredictorSpec::Knn { k, power } => {
            *k = s.get("knn-k")?;
            *power = s.get("knn-power")?;
        }
        PredictorSpec::Kriging(k) => {
            k.n_bins = s.get("variogram-bins")?;
            k.max_lag_fraction = s.get("variogram-max-lag")?;
            if k.n_bins == 0 || !(k.max_lag_fraction > 0.0) {
                bail!("variogram bins and max lag must be positive");
            }
        }
    }
    Ok(spec)
}

/// Checks a predictor against the dataset schema before any fitting.
pub fn check_predictor(spec: &PredictorSpec, ds: &SpatialDataset) -> Result<()> {
    if let PredictorSpec::Gbt {
        include_coords: false,
        ..
    } = spec
    {
        if ds.n_features() == 0 {
            bail!("gbt needs --feature-cols or --with-coords");
        }
    }
    Ok(())
}

pub fn geocp_config(s: &Settings) -> Result<GeoCpConfig> {
    Ok(GeoCpConfig {
        kernel: KernelSpec {
            family: s.get("kernel")?,
            bandwidth: s.get("bandwidth")?,
        },
        level: CoverageLevel::new(s.get("epsilon")?)?,
        fractions: s.get("split")?,
        seed: s.get("seed")?,
        options: QuantileOptions {
            conservative: s.flag("conservative")?,
        },
    })
}

pub fn out_dir(s: &Settings) -> Result<PathBuf> {
    Ok(PathBuf::from(s.str("out")?))
}

pub fn threads(s: &Settings) -> Result<Option<usize>> {
    match s.opt("threads") {
        None => Ok(None),
        Some(_) => {
            let n: usize = s.get("threads")?;
            if n == 0 {
                bail!("--threads must be at least 1");
            }
            Ok(Some(n))
        }
    }
}

/// Keeps a copy of the last fitted model so it can be saved.
pub struct Capturing {
    pub spec: PredictorSpec,
    pub slot: Mutex<Option<FittedModel>>,
}

impl ModelFactory for Capturing {
    fn fit(&self, train: &SpatialDataset, seed: u64) -> geoconformal::Result<Box<dyn Predictor>> {
        let m = self.spec.fit_model(train, seed)?;
        *self.slot.lock().expect("model slot poisoned") = Some(m.clone());
        Ok(Box::new(m))
    }
}

/// Per-point products of one GeoCP run on its test part.
pub struct RunOutputs {
    pub locations: Vec<Location>,
    pub truth: Vec<f64>,
    pub pred: Vec<f64>,
    pub q_hat: Vec<f64>,
    pub uncertainty: Vec<f64>,
    pub kriging_variance: Option<Vec<f64>>,
    pub coverage: CoverageReport,
    pub cp_coverage: CoverageReport,
    pub rmse: f64,
    pub uncertainty_moran: Option<MoranResult>,
    pub uncertainty_local_i: Option<Vec<f64>>,
    pub error_uncertainty_corr: Option<f64>,
}

fn knn_scheme(k: usize, n: usize) -> WeightsScheme {
    WeightsScheme::KnnRowStandardized(k.min(n.saturating_sub(1)).max(1))
}

pub fn run_outputs(run: &GeoCpRun, weights_k: usize) -> Result<RunOutputs> {
    let test = &run.split.test;
    let locations = test.locations();
    let truth = test.targets();
    let pred: Vec<f64> = run.intervals.iter().map(|iv| iv.center).collect();
    let q_hat: Vec<f64> = run.intervals.iter().map(|iv| iv.half_width).collect();
    let uncertainty: Vec<f64> = run.intervals.iter().map(|iv| iv.length()).collect();
    let kriging_variance = locations
        .iter()
        .map(|l| run.model.kriging_variance(l))
        .collect::<Option<Vec<_>>>()
        .map(|v| v.into_iter().collect::<geoconformal::Result<Vec<f64>>>())
        .transpose()?;
    let coverage = coverage_ratio(&run.intervals, &truth)?;
    let cp = cp_intervals(
        run.model.as_ref(),
        &run.profile,
        test,
        run.intervals[0].level,
    )?;
    let cp_coverage = coverage_ratio(&cp, &truth)?;
    let finite = uncertainty.iter().all(|u| u.is_finite());
    let (uncertainty_moran, uncertainty_local_i) = if finite && locations.len() > 2 {
        let w = build_weights_for_locations(&locations, knn_scheme(weights_k, locations.len()))?;
        (
            morans_i(&uncertainty, &w).ok(),
            local_morans_i(&uncertainty, &w).ok(),
        )
    } else {
        (None, None)
    };
    let abs_err: Vec<f64> = pred
        .iter()
        .zip(&truth)
        .map(|(p, t)| (p - t).abs())
        .collect();
    let error_uncertainty_corr = if finite {
        pearson_corr(&abs_err, &uncertainty).ok()
    } else {
        None
    };
    Ok(RunOutputs {
        rmse: rmse(&pred, &truth)?,
        locations,
        truth,
        pred,
        q_hat,
        uncertainty,
        kriging_variance,
        coverage,
        cp_coverage,
        uncertainty_moran,
        uncertainty_local_i,
        error_uncertainty_corr,
    })
}

fn moran_json(m: &Option<MoranResult>) -> Value {
    match m {
        Some(m) => {
            json!({"i": num(m.i), "expected_i": num(m.expected_i), "z_score": num(m.z_score)})
        }
        None => Value::Null,
    }
}

pub fn run_summary(o: &RunOutputs, run: &GeoCpRun) -> Value {
    json!({
        "coverage": o.coverage,
        "cp_coverage": o.cp_coverage,
        "rmse": num(o.rmse),
        "mean_uncertainty": num(o.coverage.mean_length),
        "mean_kriging_variance": o.kriging_variance.as_ref().map(|v| num(v.iter().sum::<f64>() / v.len() as f64)),
        "uncertainty_morans_i": moran_json(&o.uncertainty_moran),
        "error_uncertainty_corr": o.error_uncertainty_corr.map(num),
        "kernel": {"family": format!("{:?}", run.kernel.family()).to_lowercase(), "bandwidth": num(run.kernel.bandwidth())},
        "uniform_fallbacks": run.fallback_count,
        "split": {"train": run.split.train.len(), "calib": run.split.calib.len(), "test": run.split.test.len()},
        "timings": {"fit_seconds": seconds(run.fit_seconds), "total_seconds": seconds(run.total_seconds)},
    })
}

/// `intervals.csv`, `coverage.json` and `uncertainty.geojson` under `prefix`.
pub fn add_run_files(
    bundle: &mut Bundle,
    prefix: &Path,
    o: &RunOutputs,
    run: &GeoCpRun,
) -> Result<()> {
    let mut csv = Vec::new();
    write_intervals_csv(&o.locations, Some(&o.truth), &run.intervals, &mut csv)?;
    bundle.add_bytes(prefix.join("intervals.csv"), csv);
    bundle.add_json(prefix.join("coverage.json"), &o.coverage)?;
    let nan = vec![f64::NAN; o.locations.len()];
    let local = o.uncertainty_local_i.as_deref().unwrap_or(&nan);
    let mut props: Vec<(&str, &[f64])> = vec![
        ("y_true", &o.truth),
        ("y_pred", &o.pred),
        ("q_hat", &o.q_hat),
        ("uncertainty", &o.uncertainty),
        ("local_i", local),
    ];
    if let Some(kv) = &o.kriging_variance {
        props.push(("kriging_variance", kv));
    }
    bundle.add_json(
        prefix.join("uncertainty.geojson"),
        &points_geojson(&o.locations, &props)?,
    )?;
    Ok(())
}

pub fn summary_header(command: &str, s: &Settings) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("tool".into(), json!("geoconformal"));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("command".into(), json!(command));
    m.insert("timestamp".into(), json!(timestamp()));
    m.insert(
        "config".into(),
        serde_json::to_value(s).expect("settings serialize"),
    );
    m
}

pub fn dataset_json(l: &LoadedDataset) -> Value {
    json!({"records": l.dataset.len(), "features": l.dataset.feature_names(), "warnings": l.warnings})
}

pub fn cmd_geocp(s: &Settings) -> Result<Bundle> {
    let plan = data_plan(s)?;
    let spec = predictor_spec(s, s.str("predictor")?)?;
    let cfg = geocp_config(s)?;
    let out = out_dir(s)?;
    let save = s.opt("save-model").map(PathBuf::from);

    let loaded = load_dataset(&plan)?;
    check_predictor(&spec, &loaded.dataset)?;
    let factory = Capturing {
        spec,
        slot: Mutex::new(None),
    };
    let run = geocp_run(&loaded.dataset, &factory, &cfg)?;
    let outputs = run_outputs(&run, 8)?;

    let mut bundle = Bundle::new(&out);
    add_run_files(&mut bundle, Path::new(""), &outputs, &run)?;
    let mut summary = summary_header("geocp", s);
    summary.insert("dataset".into(), dataset_json(&loaded));
    summary.insert("predictor".into(), json!(spec.name()));
    summary.insert("result".into(), run_summary(&outputs, &run));
    bundle.add_json("summary.json", &summary)?;
    if let Some(path) = save {
        let model = factory
            .slot
            .lock()
            .expect("model slot poisoned")
            .take()
            .expect("model was fitted");
        let tmp = tempfile_beside(&path);
        save_model(&model, &tmp)?;
        std::fs::rename(&tmp, &path).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(bundle)
}

fn tempfile_beside(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp{}", std::process::id()))
}

pub fn cmd_bootstrap(s: &Settings) -> Result<Bundle> {
    let plan = data_plan(s)?;
    let spec = predictor_spec(s, s.str("predictor")?)?;
    let level = CoverageLevel::new(s.get("epsilon")?)?;
    let fractions = s.get("split")?;
    let replicates: usize = s.get("replicates")?;
    let seed: u64 = s.get("seed")?;
    let out = out_dir(s)?;

    let loaded = load_dataset(&plan)?;
    check_predictor(&spec, &loaded.dataset)?;
    let split = split_dataset(&loaded.dataset, fractions, seed)?;
    let report = bootstrap_intervals(&split.train, &split.test, replicates, &spec, level, seed)?;

    let locations = split.test.locations();
    let truth = split.test.targets();
    let lengths: Vec<f64> = report
        .lower
        .iter()
        .zip(&report.upper)
        .map(|(l, u)| u - l)
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "y_true", "lower", "upper", "length"])?;
    for i in 0..locations.len() {
        w.write_record([
            locations[i].x.to_string(),
            locations[i].y.to_string(),
            truth[i].to_string(),
            report.lower[i].to_string(),
            report.upper[i].to_string(),
            lengths[i].to_string(),
        ])?;
    }
    let mut bundle = Bundle::new(&out);
    bundle.add_bytes("intervals.csv", w.into_inner().map_err(|e| anyhow!("{e}"))?);
    bundle.add_json("coverage.json", &report.coverage)?;
    bundle.add_json(
        "uncertainty.geojson",
        &points_geojson(
            &locations,
            &[
                ("y_true", &truth),
                ("lower", &report.lower),
                ("upper", &report.upper),
                ("uncertainty", &lengths),
            ],
        )?,
    )?;
    let mut summary = summary_header("bootstrap", s);
    summary.insert("dataset".into(), dataset_json(&loaded));
    summary.insert("predictor".into(), json!(spec.name()));
    summary.insert(
        "result".into(),
        json!({
            "replicates": report.replicates,
            "coverage": report.coverage,
            "split": {"train": split.train.len(), "calib": split.calib.len(), "test": split.test.len()},
            "timings": {"total_seconds": seconds(report.wall_seconds)},
        }),
    );
    bundle.add_json("summary.json", &summary)?;
    Ok(bundle)
}

fn parse_pair(spec: &str, what: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [a, b] => Ok((a.parse()?, b.parse()?)),
        _ => bail!("{what} needs two values separated by ':'"),
    }
}

pub fn parse_noise(text: &str) -> Result<NoiseProfile> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    Ok(match kind {
        "constant" => {
            NoiseProfile::Constant(rest.parse().with_context(|| format!("noise '{text}'"))?)
        }
        "ramp" => {
            let (left, right) = parse_pair(rest, "ramp noise")?;
            NoiseProfile::LinearRamp { left, right }
        }
        "two-region" => {
            let (left, right) = parse_pair(rest, "two-region noise")?;
            NoiseProfile::TwoRegion { left, right }
        }
        _ => bail!("unknown noise profile '{text}'"),
    })
}

pub fn parse_sampling(text: &str) -> Result<Sampling> {
    if text == "uniform" {
        return Ok(Sampling::UniformRandom);
    }
    let rest = text
        .strip_prefix("clustered:")
        .ok_or_else(|| anyhow!("unknown sampling '{text}'"))?;
    let (k, spread) = rest
        .split_once(':')
        .ok_or_else(|| anyhow!("clustered sampling needs K:SPREAD"))?;
    Ok(Sampling::Clustered {
        clusters: k.parse()?,
        spread: spread.parse()?,
    })
}

pub fn parse_extent(text: &str) -> Result<Extent> {
    let v: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("extent '{text}'"))?;
    let [x_min, x_max, y_min, y_max] = v.as_slice() else {
        bail!("extent needs four numbers");
    };
    let e = Extent {
        x_min: *x_min,
        x_max: *x_max,
        y_min: *y_min,
        y_max: *y_max,
    };
    e.validate()?;
    Ok(e)
}

pub fn parse_weights(text: &str) -> Result<WeightsScheme> {
    let (kind, v) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("weights must be knn:K or band:R"))?;
    Ok(match kind {
        "knn" => WeightsScheme::KnnRowStandardized(v.parse()?),
        "band" => WeightsScheme::DistanceBand(v.parse()?),
        _ => bail!("unknown weights scheme '{text}'"),
    })
}

pub fn cmd_synth(s: &Settings) -> Result<Bundle> {
    let n: usize = s.get("n")?;
    let extent = parse_extent(s.str("extent")?)?;
    let sampling = parse_sampling(s.str("sampling")?)?;
    let seed: u64 = s.get("seed")?;
    let out = out_dir(s)?;
    let mut bundle = Bundle::new(&out);
    let mut summary = summary_header("synth", s);
    let mut csv = Vec::new();
    match s.str("kind")? {
        "regression" => {
            let spec = SceneSpec {
                n,
                extent,
                sampling,
                noise: parse_noise(s.str("noise")?)?,
                seed,
            };
            let scene = make_regression_scene(&spec)?;
            write_dataset_csv(&scene.dataset, &mut csv)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["x", "y", "trend", "sigma"])?;
            for (i, r) in scene.dataset.records().iter().enumerate() {
                w.write_record([
                    r.loc.x.to_string(),
                    r.loc.y.to_string(),
                    scene.trend[i].to_string(),
                    scene.sigma[i].to_string(),
                ])?;
            }
            bundle.add_bytes("truth.csv", w.into_inner().map_err(|e| anyhow!("{e}"))?);
        }
        "field" => {
            let kind = match s.str("covariance")? {
                "exponential" => CovarianceKind::Exponential,
                "gaussian" => CovarianceKind::Gaussian,
                "nugget" => CovarianceKind::Nugget,
                other => bail!("unknown covariance '{other}'"),
            };
            let field = FieldSpec {
                kind,
                sill: s.get("sill")?,
                range: s.get("range")?,
                nugget: s.get("nugget")?,
                mean: s.get("mean")?,
            };
            let ds = make_field_scene(&field, n, &extent, sampling, seed)?;
            write_dataset_csv(&ds, &mut csv)?;
        }
        other => bail!("unknown scene kind '{other}'"),
    }
    bundle.add_bytes("scene.csv", csv);
    summary.insert("points".into(), json!(n));
    bundle.add_json("summary.json", &summary)?;
    Ok(bundle)
}

pub fn cmd_moran(s: &Settings) -> Result<Bundle> {
    let plan = data_plan(s)?;
    let scheme = parse_weights(s.str("weights")?)?;
    let out = out_dir(s)?;
    let loaded = load_dataset(&plan)?;
    let ds = &loaded.dataset;
    let w = build_weights_for_locations(&ds.locations(), scheme)?;
    let values = ds.targets();
    let global = morans_i(&values, &w).context("global Moran's I")?;
    let local = local_morans_i(&values, &w)?;
    let locations = ds.locations();

    let mut bundle = Bundle::new(&out);
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["x", "y", "value", "local_i"])?;
    for i in 0..values.len() {
        csv.write_record([
            locations[i].x.to_string(),
            locations[i].y.to_string(),
            values[i].to_string(),
            local[i].to_string(),
        ])?;
    }
    bundle.add_bytes("lisa.csv", csv.into_inner().map_err(|e| anyhow!("{e}"))?);
    bundle.add_json(
        "lisa.geojson",
        &points_geojson(&locations, &[("value", &values), ("local_i", &local)])?,
    )?;
    let mut summary = summary_header("moran", s);
    summary.insert("dataset".into(), dataset_json(&loaded));
    summary.insert(
        "result".into(),
        json!({"morans_i": moran_json(&Some(global)), "isolated_points": w.isolated().len()}),
    );
    bundle.add_json("summary.json", &summary)?;
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsers() {
        assert_eq!(
            parse_noise("constant:0.5").unwrap(),
            NoiseProfile::Constant(0.5)
        );
        assert_eq!(
            parse_noise("two-region:0.5:2").unwrap(),
            NoiseProfile::TwoRegion {
                left: 0.5,
                right: 2.0
            }
        );
        assert!(parse_noise("wiggly").is_err());
        assert_eq!(
            parse_sampling("clustered:3:0.1").unwrap(),
            Sampling::Clustered {
                clusters: 3,
                spread: 0.1
            }
        );
        assert!(parse_extent("0,1,1,0").is_err());
        assert_eq!(
            parse_weights("band:1.5").unwrap(),
            WeightsScheme::DistanceBand(1.5)
        );
        assert!(parse_weights("queen").is_err());
    }

    #[test]
    fn hyperparameters_override_defaults() {
        let s = Settings::from_pairs([
            ("gbt-trees", "7"),
            ("gbt-depth", "2"),
            ("gbt-learning-rate", "0.1"),
            ("gbt-min-samples", "3"),
            ("with-coords", "true"),
        ]);
        match predictor_spec(&s, "gbt").unwrap() {
            PredictorSpec::Gbt {
                hyper,
                include_coords,
            } => {
                assert_eq!((hyper.trees, hyper.depth, hyper.min_samples), (7, 2, 3));
                assert!(include_coords);
            }
            other => panic!("{other:?}"),
        }
        assert!(predictor_spec(&s, "dgsi:base").is_err());
    }
}
