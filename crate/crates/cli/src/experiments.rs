//! Multi-run experiments. Each group of rows (or the whole dataset) gets one
//! GeoCP run per model on the same split, followed by a comparison.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Map, Value};

use geoconformal::conformal::geocp_run;
use geoconformal::diagnostics::{
    build_spatial_weights, dependence_analysis, local_morans_i, morans_i, points_geojson,
    uncertainty_change_analysis, Association, DependenceRun, SpatialWeightsMatrix, WeightsScheme,
};
use geoconformal::geo::LoadedDataset;
use geoconformal::predictors::PredictorSpec;

use crate::commands::{
    add_run_files, data_plan, dataset_json, geocp_config, load_groups, out_dir, predictor_spec,
    run_outputs, run_summary, summary_header, RunOutputs,
};
use crate::output::{num, Bundle};
use crate::settings::Settings;

struct Model {
    dir: &'static str,
    spec: PredictorSpec,
}

fn models(s: &Settings, experiment: &str) -> Result<Vec<Model>> {
    let gbt = |include_coords| -> Result<PredictorSpec> {
        let spec = predictor_spec(s, "gbt")?;
        let PredictorSpec::Gbt { hyper, .. } = spec else {
            unreachable!()
        };
        Ok(PredictorSpec::Gbt {
            hyper,
            include_coords,
        })
    };
    Ok(match experiment {
        "regression-features" => vec![
            Model {
                dir: "aspatial",
                spec: gbt(false)?,
            },
            Model {
                dir: "spatial",
                spec: gbt(true)?,
            },
        ],
        "interpolation-compare" => vec![
            Model {
                dir: "kriging-exp",
                spec: predictor_spec(s, "kriging:exp")?,
            },
            Model {
                dir: "kriging-lin",
                spec: predictor_spec(s, "kriging:lin")?,
            },
            Model {
                dir: "kriging-gau",
                spec: predictor_spec(s, "kriging:gau")?,
            },
            Model {
                dir: "dgsi-base",
                spec: predictor_spec(s, "dgsi:base")?,
            },
        ],
        "feature-variants" => vec![
            Model {
                dir: "dgsi-base",
                spec: predictor_spec(s, "dgsi:base")?,
            },
            Model {
                dir: "dgsi-local",
                spec: predictor_spec(s, "dgsi:local")?,
            },
            Model {
                dir: "dgsi-loc",
                spec: predictor_spec(s, "dgsi:loc")?,
            },
        ],
        other => bail!("unknown experiment '{other}'"),
    })
}

fn group_dir(key: &str, grouped: bool) -> PathBuf {
    if !grouped {
        return PathBuf::new();
    }
    let clean: String = key
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    PathBuf::from(format!("group-{clean}"))
}

fn assoc(a: Association) -> Value {
    match a {
        Association::Correlation(r) => num(r),
        Association::Degenerate => json!("degenerate"),
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Values-side spatial context of one group: weights over all its points,
/// global Moran's I of the target and its local indicators.
struct GroupContext {
    weights: SpatialWeightsMatrix,
    values: Vec<f64>,
    global_i: Option<f64>,
    local_i: Option<Vec<f64>>,
}

fn group_context(loaded: &LoadedDataset, k: usize) -> Result<GroupContext> {
    let ds = &loaded.dataset;
    let k = k.min(ds.len().saturating_sub(1)).max(1);
    let weights = build_spatial_weights(ds, WeightsScheme::KnnRowStandardized(k))?;
    let values = ds.targets();
    let global_i = morans_i(&values, &weights).ok().map(|m| m.i);
    let local_i = local_morans_i(&values, &weights).ok();
    Ok(GroupContext {
        weights,
        values,
        global_i,
        local_i,
    })
}

struct GroupRun {
    key: String,
    context: GroupContext,
    test_idx: Vec<usize>,
    outputs: Vec<RunOutputs>,
    summaries: Vec<Value>,
    dataset: Value,
}

pub fn cmd_experiment(s: &Settings) -> Result<Bundle> {
    let experiment = s.str("experiment")?.to_string();
    let plan = data_plan(s)?;
    let cfg = geocp_config(s)?;
    let weights_k: usize = s.get("weights-k")?;
    if weights_k == 0 {
        bail!("--weights-k must be at least 1");
    }
    let out = out_dir(s)?;
    let models = models(s, &experiment)?;

    let groups = load_groups(&plan)?;
    let grouped = plan.group_col.is_some();
    let mut bundle = Bundle::new(&out);
    let mut runs = Vec::with_capacity(groups.len());
    for (key, loaded) in &groups {
        let context = group_context(loaded, weights_k).with_context(|| format!("group '{key}'"))?;
        let mut outputs = Vec::new();
        let mut summaries = Vec::new();
        let mut test_idx = Vec::new();
        for m in &models {
            let run = geocp_run(&loaded.dataset, &m.spec, &cfg)
                .with_context(|| format!("group '{key}', model {}", m.spec.name()))?;
            let o = run_outputs(&run, weights_k)?;
            add_run_files(&mut bundle, &group_dir(key, grouped).join(m.dir), &o, &run)?;
            summaries.push(json!({"model": m.spec.name(), "result": run_summary(&o, &run)}));
            test_idx = run.split.test_idx.clone();
            outputs.push(o);
        }
        runs.push(GroupRun {
            key: key.clone(),
            context,
            test_idx,
            outputs,
            summaries,
            dataset: dataset_json(loaded),
        });
    }

    let analysis = match experiment.as_str() {
        "regression-features" => regression_features(&mut bundle, &runs, grouped)?,
        "interpolation-compare" => interpolation_compare(&runs, &models)?,
        _ => feature_variants(&mut bundle, &runs, &models, grouped)?,
    };
    let mut summary = summary_header("experiment", s);
    summary.insert("experiment".into(), json!(experiment));
    summary.insert(
        "groups".into(),
        Value::Array(
            runs.iter()
                .map(|g| {
                    json!({
                        "group": g.key,
                        "dataset": g.dataset,
                        "values_morans_i": g.context.global_i.map(num),
                        "runs": g.summaries,
                    })
                })
                .collect(),
        ),
    );
    summary.insert("analysis".into(), analysis);
    bundle.add_json("summary.json", &summary)?;
    Ok(bundle)
}

fn local_at_test(g: &GroupRun) -> Vec<f64> {
    match &g.context.local_i {
        Some(l) => g.test_idx.iter().map(|&i| l[i]).collect(),
        None => vec![f64::NAN; g.test_idx.len()],
    }
}

fn regression_features(bundle: &mut Bundle, runs: &[GroupRun], grouped: bool) -> Result<Value> {
    let mut per_group = Vec::new();
    for g in runs {
        let (a, b) = (&g.outputs[0], &g.outputs[1]);
        let n = a.truth.len();
        let du: Vec<f64> = (0..n)
            .map(|i| b.uncertainty[i] - a.uncertainty[i])
            .collect();
        let ea: Vec<f64> = (0..n).map(|i| (a.pred[i] - a.truth[i]).abs()).collect();
        let eb: Vec<f64> = (0..n).map(|i| (b.pred[i] - b.truth[i]).abs()).collect();
        let de: Vec<f64> = (0..n).map(|i| eb[i] - ea[i]).collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "x",
            "y",
            "y_true",
            "uncertainty_aspatial",
            "uncertainty_spatial",
            "delta_uncertainty",
            "abs_error_aspatial",
            "abs_error_spatial",
            "delta_error",
        ])?;
        for i in 0..n {
            w.write_record(
                [
                    a.locations[i].x,
                    a.locations[i].y,
                    a.truth[i],
                    a.uncertainty[i],
                    b.uncertainty[i],
                    du[i],
                    ea[i],
                    eb[i],
                    de[i],
                ]
                .map(|v| v.to_string()),
            )?;
        }
        let dir = group_dir(&g.key, grouped);
        bundle.add_bytes(
            dir.join("comparison.csv"),
            w.into_inner().map_err(|e| anyhow!("{e}"))?,
        );
        bundle.add_json(
            dir.join("comparison.geojson"),
            &points_geojson(
                &a.locations,
                &[
                    ("delta_uncertainty", &du),
                    ("delta_error", &de),
                    ("local_i", &local_at_test(g)),
                ],
            )?,
        )?;
        per_group.push(json!({
            "group": g.key,
            "mean_uncertainty_aspatial": num(a.coverage.mean_length),
            "mean_uncertainty_spatial": num(b.coverage.mean_length),
            "mean_delta_uncertainty": num(mean(&du)),
            "share_uncertainty_reduced": num(du.iter().filter(|d| **d < 0.0).count() as f64 / n as f64),
            "share_error_reduced": num(de.iter().filter(|d| **d < 0.0).count() as f64 / n as f64),
        }));
    }
    Ok(json!({"per_group": per_group}))
}

fn interpolation_compare(runs: &[GroupRun], models: &[Model]) -> Result<Value> {
    let mut per_group = Vec::new();
    for g in runs {
        let mut order: Vec<usize> = (0..models.len()).collect();
        order.sort_by(|&i, &j| g.outputs[i].rmse.total_cmp(&g.outputs[j].rmse));
        per_group.push(json!({
            "group": g.key,
            "ranking_by_rmse": order.iter().map(|&i| models[i].spec.name()).collect::<Vec<_>>(),
        }));
    }
    let mut per_model = Vec::new();
    let mut mean_rmse = Vec::new();
    for (mi, m) in models.iter().enumerate() {
        let rmse: Vec<f64> = runs.iter().map(|g| g.outputs[mi].rmse).collect();
        let morans: Vec<Option<f64>> = runs
            .iter()
            .map(|g| g.outputs[mi].uncertainty_moran.map(|r| r.i))
            .collect();
        let above = morans.iter().flatten().filter(|i| **i > 0.1).count();
        let dep = dependence(runs, mi)?;
        mean_rmse.push(mean(&rmse));
        per_model.push(json!({
            "model": m.spec.name(),
            "mean_rmse": num(mean(&rmse)),
            "mean_uncertainty": num(mean(&runs.iter().map(|g| g.outputs[mi].coverage.mean_length).collect::<Vec<_>>())),
            "mean_coverage": num(mean(&runs.iter().map(|g| g.outputs[mi].coverage.coverage).collect::<Vec<_>>())),
            "uncertainty_morans_i": morans.iter().map(|v| v.map(num)).collect::<Vec<_>>(),
            "share_morans_i_above_0_1": num(above as f64 / runs.len() as f64),
            "dependence": dep,
        }));
    }
    let mut order: Vec<usize> = (0..models.len()).collect();
    order.sort_by(|&i, &j| mean_rmse[i].total_cmp(&mean_rmse[j]));
    Ok(json!({
        "per_group": per_group,
        "per_model": per_model,
        "ranking_by_mean_rmse": order.iter().map(|&i| models[i].spec.name()).collect::<Vec<_>>(),
    }))
}

/// Global Moran's I of values against corr(local I, uncertainty), per group and
/// across groups, for model `mi`.
fn dependence(runs: &[GroupRun], mi: usize) -> Result<Value> {
    let dep_runs: Vec<DependenceRun> = runs
        .iter()
        .filter(|g| g.outputs[mi].uncertainty.iter().all(|u| u.is_finite()))
        .map(|g| DependenceRun {
            uncertainty: g.outputs[mi].uncertainty.clone(),
            values: g.context.values.clone(),
            weights: g.context.weights.clone(),
            points: Some(g.test_idx.clone()),
        })
        .collect();
    let a = dependence_analysis(&dep_runs)?;
    Ok(json!({
        "inner": a.runs.iter().map(|r| json!({"values_morans_i": r.global_i.map(num), "corr": assoc(r.inner)})).collect::<Vec<_>>(),
        "outer": assoc(a.outer),
        "usable_runs": a.usable_runs,
    }))
}

fn feature_variants(
    bundle: &mut Bundle,
    runs: &[GroupRun],
    models: &[Model],
    grouped: bool,
) -> Result<Value> {
    let mut per_group = Vec::new();
    let mut mean_unc: Vec<Vec<f64>> = vec![Vec::new(); models.len()];
    let mut change_on_dependent: Vec<Vec<f64>> = vec![Vec::new(); models.len()];
    for g in runs {
        let base = &g.outputs[0];
        let local = local_at_test(g);
        let mut changes = Map::new();
        let mut deltas = Vec::new();
        for (mi, m) in models.iter().enumerate() {
            mean_unc[mi].push(g.outputs[mi].coverage.mean_length);
            if mi == 0 {
                continue;
            }
            let c = uncertainty_change_analysis(
                &base.uncertainty,
                &g.outputs[mi].uncertainty,
                &g.context.values,
                &g.context.weights,
                Some(&g.test_idx),
            )?;
            if let (Some(gi), Some(r)) = (g.context.global_i, c.association.value()) {
                if gi > 0.3 {
                    change_on_dependent[mi].push(r);
                }
            }
            changes.insert(
                m.spec.name(),
                json!({"mean_delta_uncertainty": num(c.mean_delta), "corr_local_i_delta": assoc(c.association)}),
            );
            deltas.push(c.deltas);
        }
        let n = base.truth.len();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![
            "x".to_string(),
            "y".into(),
            "y_true".into(),
            "local_i".into(),
        ];
        header.extend(models.iter().map(|m| format!("uncertainty_{}", m.dir)));
        header.extend(models[1..].iter().map(|m| format!("delta_{}", m.dir)));
        w.write_record(&header)?;
        for i in 0..n {
            let mut row = vec![
                base.locations[i].x,
                base.locations[i].y,
                base.truth[i],
                local[i],
            ];
            row.extend(g.outputs.iter().map(|o| o.uncertainty[i]));
            row.extend(deltas.iter().map(|d| d[i]));
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        let dir = group_dir(&g.key, grouped);
        bundle.add_bytes(
            dir.join("variants.csv"),
            w.into_inner().map_err(|e| anyhow!("{e}"))?,
        );
        let names: Vec<String> = models[1..]
            .iter()
            .map(|m| format!("delta_{}", m.dir))
            .collect();
        let mut props: Vec<(&str, &[f64])> = vec![("local_i", &local)];
        props.extend(
            names
                .iter()
                .map(String::as_str)
                .zip(deltas.iter().map(Vec::as_slice)),
        );
        bundle.add_json(
            dir.join("variants.geojson"),
            &points_geojson(&base.locations, &props)?,
        )?;
        per_group.push(json!({"group": g.key, "changes_vs_base": changes}));
    }
    let mut per_model = Vec::new();
    for (mi, m) in models.iter().enumerate() {
        per_model.push(json!({
            "model": m.spec.name(),
            "mean_uncertainty": num(mean(&mean_unc[mi])),
            "mean_delta_vs_base": num(mean(&mean_unc[mi]) - mean(&mean_unc[0])),
            "mean_corr_local_i_delta_where_values_morans_i_above_0_3":
                if mi == 0 || change_on_dependent[mi].is_empty() { Value::Null } else { num(mean(&change_on_dependent[mi])) },
            "dependence": dependence(runs, mi)?,
        }));
    }
    Ok(json!({"per_group": per_group, "per_model": per_model}))
}
