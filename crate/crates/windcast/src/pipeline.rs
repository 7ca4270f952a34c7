//! End-to-end orchestration: ingest, clean, feature-select, slice days,
//! similar-day selection, normalization, ensemble training, forecasting,
//! and evaluation, with every artifact written into a run directory.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::bagging::{predict, save_ensemble, train_ensemble, BaggedEnsemble, BaggingConfig};
use crate::bpnn::{select_hidden_width, train, ModelArtifact, NetConfig, HIDDEN_WIDTH_SWEEP};
use crate::config::{DataSource, Granularity, PipelineConfig};
use crate::dataset::{
    aggregate_hourly, ingest_csv, slice_days, synth_generate, wrap_angle, DayUnit, RowReject,
    SampleRecord, Signature1, AMBIENT_TEMP, BLADE_ANGLE, WIND_SPEED,
};
use crate::error::{Error, Result};
use crate::kv::KvWriter;
use crate::metrics::{compare, Comparison, EvalReport};
use crate::preprocess::{
    apply_norm, apply_norm_column, clean, fit_norm, fit_norm_column, invert_norm_column,
    relief_weights, select_features, CleanReport, FeatureWeights, NormStats, ReliefParams,
};
use crate::seeding::{derive_seed, rng_from_seed, standard_normal};
use crate::similar_days::{select_training_days, KMeansOpts, SimilarDayOpts, SimilarDaySelection};

// Stage-seed indices; every random choice derives from `run.seed` through
// these streams.
const SEED_RELIEF: u64 = 1;
const SEED_CLUSTERING: u64 = 2;
const SEED_BAGGING: u64 = 3;
const SEED_WEATHER: u64 = 4;
const SEED_PLAIN_NET: u64 = 5;
const SEED_SINGLE_NET: u64 = 6;
const SEED_SWEEP: u64 = 7;

/// The three approaches of the comparison experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Approach {
    PlainBpnn,
    ClusteringBpnn,
    BaggingClustering,
}

impl Approach {
    pub fn display(self) -> &'static str {
        match self {
            Approach::PlainBpnn => "BPNN",
            Approach::ClusteringBpnn => "BPNN with clustering",
            Approach::BaggingClustering => "Bagging-BPNN with clustering",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Approach::PlainBpnn => "plain_bpnn",
            Approach::ClusteringBpnn => "clustering_bpnn",
            Approach::BaggingClustering => "bagging_clustering",
        }
    }

    fn uses_clustering(self) -> bool {
        !matches!(self, Approach::PlainBpnn)
    }
}

/// One line of the forecast CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRow {
    pub timestamp: i64,
    pub actual_kw: f64,
    pub predicted_kw: f64,
}

/// Everything produced before approach-specific training: cleaned days plus
/// the feature selection audit trail.
#[derive(Debug)]
pub struct Prepared {
    pub days: Vec<DayUnit>,
    pub clean_report: CleanReport,
    pub ingest_rejects: Vec<RowReject>,
    pub dropped_tail_records: usize,
    pub weights: FeatureWeights,
    pub features: Vec<String>,
}

#[derive(Debug)]
pub enum TrainedModel {
    Single(Box<ModelArtifact>),
    Ensemble(Box<BaggedEnsemble>, NormStats, NormStats),
}

/// Result of one trained-and-evaluated approach.
#[derive(Debug)]
pub struct ApproachRun {
    pub approach: Approach,
    pub eval: EvalReport,
    pub forecast: Vec<ForecastRow>,
    pub selection: Option<SimilarDaySelection>,
    pub training_days: Vec<usize>,
    pub model: TrainedModel,
}

/// Load, clean, slice, and feature-select. The last sliced day is held out
/// as the forecast day and takes no part in feature weighting.
pub fn prepare(config: &PipelineConfig) -> Result<Prepared> {
    config
        .validate()
        .map_err(|e| e.in_stage("config", "fix the configuration value"))?;

    let (records, ingest_rejects) = match config.source {
        DataSource::Synthetic => {
            let records = synth_generate(config.data_seed, config.days, &config.curve)
                .map_err(|e| e.in_stage("ingest", "check the data.* synthetic parameters"))?;
            (records, Vec::new())
        }
        DataSource::Csv => {
            let ingested =
                ingest_csv(Path::new(&config.csv_path), &config.schema).map_err(|e| {
                    e.in_stage(
                        "ingest",
                        "check data.csv_path and the schema.* column names",
                    )
                })?;
            (ingested.records, ingested.rejects)
        }
    };

    let (records, clean_report) = if config.clean_enabled {
        clean(&records).map_err(|e| e.in_stage("clean", "every input record was invalid"))?
    } else {
        (records, CleanReport::default())
    };

    let (days, dropped_tail_records) = slice_days(&records).map_err(|e| {
        e.in_stage(
            "slice-days",
            "need full days (144 records each) on a strict 10-minute grid",
        )
    })?;
    if days.len() < 2 {
        return Err(Error::TooFewRecords {
            need: 2 * crate::dataset::RECORDS_PER_DAY,
            got: days.len() * crate::dataset::RECORDS_PER_DAY,
        }
        .in_stage(
            "slice-days",
            "at least two full days are needed: history plus the forecast day",
        ));
    }

    // Relief runs on historical data only; the forecast day's power is the
    // quantity being predicted.
    let historical = &days[..days.len() - 1];
    let candidates = candidate_features(config);
    let mut rows = Vec::new();
    let mut target = Vec::new();
    for day in historical {
        for record in day_rows(&day.records, config.granularity)? {
            rows.push(
                candidates
                    .iter()
                    .map(|name| raw_feature_value(&record, name, &config.schema.extra))
                    .collect::<Result<Vec<f64>>>()?,
            );
            target.push(record.power);
        }
    }
    let params = ReliefParams {
        iterations: config.relief_iterations,
        neighbors: config.relief_neighbors,
        sigma: config.relief_sigma,
        seed: derive_seed(config.seed, SEED_RELIEF),
        threshold: config.relief_threshold,
    };
    let weights = relief_weights(&rows, &candidates, &target, &params)
        .map_err(|e| e.in_stage("feature-selection", "check the candidate feature matrix"))?;

    let forecastable: BTreeSet<String> = config.forecastable.iter().cloned().collect();
    let angular: BTreeSet<String> = [BLADE_ANGLE.to_string()].into();
    let features = select_features(&weights, &forecastable, &config.forced_include, &angular)
        .map_err(|e| {
            e.in_stage(
                "feature-selection",
                "lower relief.threshold or extend relief.forecastable / relief.forced_include",
            )
        })?;

    Ok(Prepared {
        days,
        clean_report,
        ingest_rejects,
        dropped_tail_records,
        weights,
        features,
    })
}

fn candidate_features(config: &PipelineConfig) -> Vec<String> {
    let mut names = vec![
        WIND_SPEED.to_string(),
        BLADE_ANGLE.to_string(),
        AMBIENT_TEMP.to_string(),
    ];
    names.extend(config.schema.extra.iter().cloned());
    names
}

/// Value of a raw (pre-expansion) candidate feature.
fn raw_feature_value(record: &SampleRecord, name: &str, extra_names: &[String]) -> Result<f64> {
    feature_value(record, name, extra_names)
}

/// Value of a selected feature, including the angular expansions.
fn feature_value(record: &SampleRecord, name: &str, extra_names: &[String]) -> Result<f64> {
    match name {
        WIND_SPEED => Ok(record.wind_speed),
        AMBIENT_TEMP => Ok(record.ambient_temp),
        BLADE_ANGLE => Ok(record.blade_angle),
        "blade_angle_sin" => Ok(record.blade_angle.to_radians().sin()),
        "blade_angle_cos" => Ok(record.blade_angle.to_radians().cos()),
        other => {
            let idx = extra_names
                .iter()
                .position(|n| n == other)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown feature `{other}`")))?;
            record.extra.get(idx).copied().ok_or_else(|| {
                Error::InvalidConfig(format!("record lacks extra feature `{other}`"))
            })
        }
    }
}

/// Rows of one day at the configured granularity.
fn day_rows(records: &[SampleRecord], granularity: Granularity) -> Result<Vec<SampleRecord>> {
    match granularity {
        Granularity::Hourly => aggregate_hourly(records).map(|(rows, _)| rows),
        Granularity::TenMin => Ok(records.to_vec()),
    }
}

fn build_matrix(
    days: &[DayUnit],
    indices: &[usize],
    features: &[String],
    extra_names: &[String],
    granularity: Granularity,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &i in indices {
        for record in day_rows(&days[i].records, granularity)? {
            xs.push(
                features
                    .iter()
                    .map(|name| feature_value(&record, name, extra_names))
                    .collect::<Result<Vec<f64>>>()?,
            );
            ys.push(record.power);
        }
    }
    Ok((xs, ys))
}

/// Forecast-day records with the meteorological channels optionally
/// degraded by seeded noise (the power channel is untouched; it is the
/// evaluation target, not an input).
fn degraded_forecast_records(config: &PipelineConfig, forecast: &DayUnit) -> Vec<SampleRecord> {
    if config.weather_noise_std == 0.0 {
        return forecast.records.clone();
    }
    let std = config.weather_noise_std;
    let mut rng = rng_from_seed(derive_seed(config.seed, SEED_WEATHER));
    forecast
        .records
        .iter()
        .map(|r| SampleRecord {
            wind_speed: (r.wind_speed + std * standard_normal(&mut rng)).max(0.0),
            ambient_temp: r.ambient_temp + std * standard_normal(&mut rng),
            blade_angle: wrap_angle(r.blade_angle + 10.0 * std * standard_normal(&mut rng)),
            ..r.clone()
        })
        .collect()
}

/// The clustering reference day: its power signature is borrowed from the
/// day before the forecast day, and its weather signature comes from the
/// forecast day's (possibly degraded) inputs when allowed, otherwise from
/// the prior day as well.
fn reference_day(config: &PipelineConfig, days: &[DayUnit]) -> DayUnit {
    let forecast = &days[days.len() - 1];
    let prior = &days[days.len() - 2];
    let s1 = if config.use_forecast_weather {
        Signature1::from_records(&degraded_forecast_records(config, forecast))
    } else {
        prior.s1
    };
    DayUnit {
        day_index: forecast.day_index,
        records: forecast.records.clone(),
        s1,
        s2: prior.s2,
    }
}

fn forecast_row_count(config: &PipelineConfig) -> usize {
    match config.granularity {
        Granularity::Hourly => config.horizon_hours,
        Granularity::TenMin => config.horizon_hours * 6,
    }
}

/// Train one approach on the prepared data and forecast the held-out day.
pub fn run_approach(
    config: &PipelineConfig,
    prepared: &Prepared,
    approach: Approach,
) -> Result<ApproachRun> {
    let days = &prepared.days;
    let historical_len = days.len() - 1;
    let forecast_day = &days[historical_len];

    let (training_days, selection) = if approach.uses_clustering() {
        let reference = reference_day(config, days);
        let opts = SimilarDayOpts {
            k: config.clusters,
            kmeans: KMeansOpts {
                max_iter: config.kmeans_max_iter,
                tol: config.kmeans_tol,
                restarts: config.restarts,
                seed: derive_seed(config.seed, SEED_CLUSTERING),
            },
            min_days: config.min_intersection_days,
        };
        let sel =
            select_training_days(&days[..historical_len], &reference, &opts).map_err(|e| {
                e.in_stage(
                    "similar-days",
                    "reduce clustering.k or provide more historical days",
                )
            })?;
        (sel.training_days.clone(), Some(sel))
    } else {
        let w = config.window_days.min(historical_len);
        (((historical_len - w)..historical_len).collect(), None)
    };

    let (train_x, train_y) = build_matrix(
        days,
        &training_days,
        &prepared.features,
        &config.schema.extra,
        config.granularity,
    )
    .map_err(|e| e.in_stage("normalize", "training day set produced no rows"))?;

    let input_stats = fit_norm(&train_x)
        .map_err(|e| e.in_stage("normalize", "training day set produced no rows"))?;
    // Targets live inside the sigmoid's comfortable range.
    let target_stats = fit_norm_column(&train_y, 0.1, 0.9)
        .map_err(|e| e.in_stage("normalize", "training day set produced no rows"))?;
    let x_norm = apply_norm(&input_stats, &train_x)?;
    let y_norm = apply_norm_column(&target_stats, &train_y)?;

    let m = prepared.features.len();
    let mut base = NetConfig {
        input_dim: m,
        hidden_dim: config.hidden_dim.unwrap_or(2 * m + 1),
        learning_rate: config.learning_rate,
        max_epochs: config.max_epochs,
        target_error: config.target_error,
        seed: 0,
        weight_init_range: config.weight_init_range,
    };

    if config.hidden_sweep {
        base.hidden_dim = sweep_hidden_width(config, prepared, &training_days, base)?;
    }

    let train_hint = "reduce net.learning_rate, or raise net.max_epochs";
    let model = match approach {
        Approach::BaggingClustering => {
            let bag_config = BaggingConfig {
                ensemble_size: config.ensemble_size,
                bootstrap_fraction: config.bootstrap_fraction,
                base,
                master_seed: derive_seed(config.seed, SEED_BAGGING),
                parallel: config.parallel,
            };
            let ensemble = train_ensemble(&bag_config, &x_norm, &y_norm)
                .map_err(|e| e.in_stage("train", train_hint))?;
            TrainedModel::Ensemble(
                Box::new(ensemble),
                input_stats.clone(),
                target_stats.clone(),
            )
        }
        single => {
            let seed_stream = if single == Approach::PlainBpnn {
                SEED_PLAIN_NET
            } else {
                SEED_SINGLE_NET
            };
            let net_config = NetConfig {
                seed: derive_seed(config.seed, seed_stream),
                ..base
            };
            let net =
                train(net_config, &x_norm, &y_norm).map_err(|e| e.in_stage("train", train_hint))?;
            TrainedModel::Single(Box::new(ModelArtifact {
                net,
                input_stats: input_stats.clone(),
                target_stats: target_stats.clone(),
            }))
        }
    };

    // Forecast inputs: the held-out day's measured (or degraded) weather.
    let degraded = degraded_forecast_records(config, forecast_day);
    let input_rows = day_rows(&degraded, config.granularity)?;
    let actual_rows = day_rows(&forecast_day.records, config.granularity)?;
    let take = forecast_row_count(config).min(input_rows.len());

    let mut fc_x = Vec::with_capacity(take);
    for record in &input_rows[..take] {
        fc_x.push(
            prepared
                .features
                .iter()
                .map(|name| feature_value(record, name, &config.schema.extra))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    let fc_x_norm = apply_norm(&input_stats, &fc_x).map_err(|e| {
        e.in_stage(
            "forecast",
            "input width no longer matches the trained model",
        )
    })?;

    let predicted_norm: Vec<f64> = match &model {
        TrainedModel::Single(artifact) => fc_x_norm
            .iter()
            .map(|x| artifact.net.forward(x).map(|(u, _)| u))
            .collect::<Result<_>>()?,
        TrainedModel::Ensemble(ensemble, _, _) => fc_x_norm
            .iter()
            .map(|x| predict(ensemble, x))
            .collect::<Result<_>>()?,
    };
    let predicted_kw = invert_norm_column(&target_stats, &predicted_norm)?;

    let forecast: Vec<ForecastRow> = actual_rows[..take]
        .iter()
        .zip(&predicted_kw)
        .map(|(record, &p)| ForecastRow {
            timestamp: record.timestamp,
            actual_kw: record.power,
            predicted_kw: p,
        })
        .collect();
    let actual: Vec<f64> = forecast.iter().map(|r| r.actual_kw).collect();
    let eval = EvalReport::evaluate(approach.display(), &actual, &predicted_kw).map_err(|e| {
        e.in_stage(
            "evaluate",
            "forecast produced no rows; check forecast.horizon_hours",
        )
    })?;

    Ok(ApproachRun {
        approach,
        eval,
        forecast,
        selection,
        training_days,
        model,
    })
}

/// Hidden-width sweep on a day split of the training set: the most recent
/// fifth of the training days (at least one) validates, the rest train.
fn sweep_hidden_width(
    config: &PipelineConfig,
    prepared: &Prepared,
    training_days: &[usize],
    base: NetConfig,
) -> Result<usize> {
    let n_val = (training_days.len() / 5).max(1);
    let (fit_days, val_days) = if training_days.len() > n_val {
        training_days.split_at(training_days.len() - n_val)
    } else {
        (training_days, training_days)
    };
    let (fit_x, fit_y) = build_matrix(
        &prepared.days,
        fit_days,
        &prepared.features,
        &config.schema.extra,
        config.granularity,
    )?;
    let (val_x, val_y) = build_matrix(
        &prepared.days,
        val_days,
        &prepared.features,
        &config.schema.extra,
        config.granularity,
    )?;
    let input_stats = fit_norm(&fit_x)?;
    let target_stats = fit_norm_column(&fit_y, 0.1, 0.9)?;
    let template = NetConfig {
        seed: derive_seed(config.seed, SEED_SWEEP),
        ..base
    };
    let selection = select_hidden_width(
        template,
        &HIDDEN_WIDTH_SWEEP,
        (
            &apply_norm(&input_stats, &fit_x)?,
            &apply_norm_column(&target_stats, &fit_y)?,
        ),
        (
            &apply_norm(&input_stats, &val_x)?,
            &apply_norm_column(&target_stats, &val_y)?,
        ),
    )
    .map_err(|e| {
        e.in_stage(
            "train",
            "hidden-width sweep failed; check the validation split",
        )
    })?;
    Ok(selection.config.hidden_dim)
}

/// Full pipeline outcome plus where it was written.
#[derive(Debug)]
pub struct PipelineOutcome {
    pub run_dir: PathBuf,
    pub eval: EvalReport,
    pub forecast: Vec<ForecastRow>,
    pub selection: Option<SimilarDaySelection>,
    pub features: Vec<String>,
}

/// Comparison outcome over the three approaches.
#[derive(Debug)]
pub struct CompareOutcome {
    pub comparison: Comparison,
    pub runs: Vec<ApproachRun>,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_forecast_csv(path: &Path, rows: &[ForecastRow]) -> Result<()> {
    let mut out = String::from("timestamp,actual_kw,predicted_kw\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            r.timestamp, r.actual_kw, r.predicted_kw
        ));
    }
    write_file(path, &out)
}

/// Per-row residuals (predicted minus actual), for external plotting.
fn write_residuals_csv(path: &Path, rows: &[ForecastRow]) -> Result<()> {
    let mut out = String::from("timestamp,residual_kw\n");
    for r in rows {
        out.push_str(&format!(
            "{},{}\n",
            r.timestamp,
            r.predicted_kw - r.actual_kw
        ));
    }
    write_file(path, &out)
}

fn audit_report(prepared: &Prepared) -> String {
    let mut text = prepared.clean_report.to_kv_string();
    let mut w = KvWriter::new();
    w.pair("ingest.rejected_rows", prepared.ingest_rejects.len());
    for r in &prepared.ingest_rejects {
        w.pair(&format!("rejects.row_{}", r.row), &r.reason);
    }
    w.pair("slice.dropped_tail_records", prepared.dropped_tail_records);
    text.push('\n');
    text.push_str(&w.finish());
    text
}

fn feature_report(prepared: &Prepared) -> String {
    let mut text = prepared.weights.to_kv_string();
    let mut w = KvWriter::new();
    w.list("selected.features", &prepared.features);
    text.push('\n');
    text.push_str(&w.finish());
    text
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_approach_artifacts(dir: &Path, run: &ApproachRun) -> Result<()> {
    ensure_dir(dir)?;
    write_forecast_csv(&dir.join("forecast.csv"), &run.forecast)?;
    write_residuals_csv(&dir.join("residuals.csv"), &run.forecast)?;
    write_file(&dir.join("eval.txt"), &run.eval.to_kv_string())?;
    if let Some(sel) = &run.selection {
        write_file(&dir.join("selection.txt"), &sel.to_kv_string())?;
    }
    match &run.model {
        TrainedModel::Single(artifact) => artifact.save(&dir.join("model.model"))?,
        TrainedModel::Ensemble(ensemble, input_stats, target_stats) => {
            save_ensemble(&dir.join("models"), ensemble, input_stats, target_stats)?
        }
    }
    Ok(())
}

/// Run the full proposed pipeline (clustering + bagging ensemble) and write
/// every artifact into `out_dir`.
pub fn run_pipeline(config: &PipelineConfig, out_dir: &Path) -> Result<PipelineOutcome> {
    let prepared = prepare(config)?;
    let run = run_approach(config, &prepared, Approach::BaggingClustering)?;

    let wh = "check permissions on the output directory";
    ensure_dir(out_dir).map_err(|e| e.in_stage("write-artifacts", wh))?;
    write_file(&out_dir.join("config_used.cfg"), &config.to_kv_string())
        .map_err(|e| e.in_stage("write-artifacts", wh))?;
    write_file(&out_dir.join("clean_report.txt"), &audit_report(&prepared))
        .map_err(|e| e.in_stage("write-artifacts", wh))?;
    write_file(
        &out_dir.join("feature_weights.txt"),
        &feature_report(&prepared),
    )
    .map_err(|e| e.in_stage("write-artifacts", wh))?;
    let selection = run
        .selection
        .as_ref()
        .expect("the bagging approach always clusters");
    write_file(&out_dir.join("selection.txt"), &selection.to_kv_string())
        .map_err(|e| e.in_stage("write-artifacts", wh))?;
    match &run.model {
        TrainedModel::Ensemble(ensemble, input_stats, target_stats) => {
            save_ensemble(&out_dir.join("models"), ensemble, input_stats, target_stats)
                .map_err(|e| e.in_stage("write-artifacts", wh))?;
        }
        TrainedModel::Single(artifact) => {
            artifact
                .save(&out_dir.join("model.model"))
                .map_err(|e| e.in_stage("write-artifacts", wh))?;
        }
    }
    write_forecast_csv(&out_dir.join("forecast.csv"), &run.forecast)
        .map_err(|e| e.in_stage("write-artifacts", wh))?;
    write_residuals_csv(&out_dir.join("residuals.csv"), &run.forecast)
        .map_err(|e| e.in_stage("write-artifacts", wh))?;
    write_file(&out_dir.join("eval.txt"), &run.eval.to_kv_string())
        .map_err(|e| e.in_stage("write-artifacts", wh))?;

    Ok(PipelineOutcome {
        run_dir: out_dir.to_path_buf(),
        eval: run.eval,
        forecast: run.forecast,
        selection: run.selection,
        features: prepared.features,
    })
}

/// Run the three-approach comparison on one shared data preparation. With
/// an output directory, artifacts land in one subdirectory per approach.
pub fn run_compare(config: &PipelineConfig, out_dir: Option<&Path>) -> Result<CompareOutcome> {
    let prepared = prepare(config)?;
    let approaches = [
        Approach::PlainBpnn,
        Approach::ClusteringBpnn,
        Approach::BaggingClustering,
    ];
    let mut runs = Vec::with_capacity(approaches.len());
    for approach in approaches {
        runs.push(run_approach(config, &prepared, approach)?);
    }
    let reports: Vec<EvalReport> = runs.iter().map(|r| r.eval.clone()).collect();
    let comparison = compare(&reports)?;

    if let Some(dir) = out_dir {
        let wh = "check permissions on the output directory";
        ensure_dir(dir).map_err(|e| e.in_stage("write-artifacts", wh))?;
        write_file(&dir.join("config_used.cfg"), &config.to_kv_string())
            .map_err(|e| e.in_stage("write-artifacts", wh))?;
        write_file(&dir.join("clean_report.txt"), &audit_report(&prepared))
            .map_err(|e| e.in_stage("write-artifacts", wh))?;
        write_file(&dir.join("feature_weights.txt"), &feature_report(&prepared))
            .map_err(|e| e.in_stage("write-artifacts", wh))?;
        write_file(&dir.join("comparison.txt"), &comparison.render_table())
            .map_err(|e| e.in_stage("write-artifacts", wh))?;
        write_file(&dir.join("comparison_kv.txt"), &comparison.to_kv_string())
            .map_err(|e| e.in_stage("write-artifacts", wh))?;
        for run in &runs {
            write_approach_artifacts(&dir.join(run.approach.slug()), run)
                .map_err(|e| e.in_stage("write-artifacts", wh))?;
        }
    }

    Ok(CompareOutcome { comparison, runs })
}

/// Write a synthetic dataset CSV plus its generation manifest. Fails before
/// touching the filesystem when the synthetic parameters are invalid.
pub fn run_synth(config: &PipelineConfig, out_csv: &Path) -> Result<usize> {
    config
        .curve
        .validate()
        .map_err(|e| e.in_stage("synth", "fix the data.* curve parameters"))?;
    let records = synth_generate(config.data_seed, config.days, &config.curve)
        .map_err(|e| e.in_stage("synth", "fix the data.* synthetic parameters"))?;

    let mut buf = Vec::new();
    crate::dataset::write_csv(&mut buf, &config.schema, &records)
        .map_err(|e| e.in_stage("synth", "CSV serialization failed"))?;
    std::fs::write(out_csv, &buf).map_err(|source| {
        Error::Io {
            path: out_csv.to_path_buf(),
            source,
        }
        .in_stage("synth", "check permissions on the output path")
    })?;

    let mut w = KvWriter::new();
    w.pair("generation.seed", config.data_seed);
    w.pair("generation.days", config.days);
    w.pair("generation.cut_in", config.curve.cut_in);
    w.pair("generation.rated_speed", config.curve.rated_speed);
    w.pair("generation.cut_out", config.curve.cut_out);
    w.pair("generation.rated_power", config.curve.rated_power);
    w.pair("generation.noise_std", config.curve.noise_std);
    w.pair("generation.rows", records.len());
    let manifest_path = out_csv.with_extension("manifest");
    write_file(&manifest_path, &w.finish())
        .map_err(|e| e.in_stage("synth", "check permissions on the output path"))?;
    Ok(records.len())
}
