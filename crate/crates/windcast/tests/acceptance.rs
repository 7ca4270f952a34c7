//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `cargo test --test acceptance -- --nocapture`).

mod common;

use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use windcast::bagging::{predict, train_ensemble, BaggingConfig};
use windcast::bpnn::{batch_gradients, sigmoid, train, NetConfig, NeuralNet};
use windcast::config::PipelineConfig;
use windcast::dataset::{aggregate_hourly, slice_days, synth_generate, PowerCurveParams};
use windcast::metrics::{compare, mae, rmse, EvalReport};
use windcast::pipeline::run_compare;
use windcast::preprocess::{
    apply_norm, apply_norm_column, fit_norm, fit_norm_column, invert_norm, invert_norm_column,
    relief_weights, ReliefParams,
};
use windcast::seeding::rng_from_seed;
use windcast::similar_days::{kmeans, KMeansOpts};

fn report(criterion: &str, pass: bool, detail: String, elapsed: Duration, budget: Duration) {
    let status = if pass && elapsed <= budget {
        "PASS"
    } else {
        "FAIL"
    };
    println!(
        "ACCEPTANCE {criterion}: {status} ({detail}; {:.2}s of {:.0}s budget)",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(pass, "{criterion}: {detail}");
    assert!(
        elapsed <= budget,
        "{criterion} exceeded its runtime budget: {elapsed:?} > {budget:?}"
    );
}

#[test]
fn criterion_1_gradient_correctness() {
    let start = Instant::now();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let m = 2 + (seed % 5) as usize; // 2..=6
        let hidden = 5 + (seed % 9) as usize; // 5..=13
        let net = NeuralNet::init(NetConfig {
            seed: 1000 + seed,
            input_dim: m,
            hidden_dim: hidden,
            ..NetConfig::for_input_dim(m)
        })
        .unwrap();
        let (inputs, targets) = gradient_batch(seed, 8, m);
        let grad = batch_gradients(&net, &inputs, &targets).unwrap();

        for j in 0..hidden {
            for i in 0..m {
                let fd = fd_gradient(&net, &inputs, &targets, h, |n, eps| n.w[j][i] += eps);
                worst = worst.max(rel_err(grad.w[j][i], fd));
            }
            let fd = fd_gradient(&net, &inputs, &targets, h, |n, eps| n.hidden_bias[j] += eps);
            worst = worst.max(rel_err(grad.hidden_bias[j], fd));
            let fd = fd_gradient(&net, &inputs, &targets, h, |n, eps| n.v[j] += eps);
            worst = worst.max(rel_err(grad.v[j], fd));
        }
        let fd = fd_gradient(&net, &inputs, &targets, h, |n, eps| n.output_bias += eps);
        worst = worst.max(rel_err(grad.output_bias, fd));
    }
    report(
        "1 gradient-correctness",
        worst < 1e-4,
        format!("max relative error {worst:.2e} over 20 seeded nets"),
        start.elapsed(),
        Duration::from_secs(5),
    );
}

#[test]
fn criterion_2_relief_oracle_equivalence() {
    let start = Instant::now();
    let rows = vec![
        vec![0.10, 0.90],
        vec![0.30, 0.20],
        vec![0.50, 0.70],
        vec![0.70, 0.10],
        vec![0.90, 0.60],
        vec![0.20, 0.40],
        vec![0.60, 0.30],
        vec![0.80, 0.80],
    ];
    let target = vec![0.35, 0.71, 1.12, 1.46, 1.95, 0.58, 1.33, 1.91];
    let names = vec!["f0".to_string(), "f1".to_string()];
    let params = ReliefParams {
        iterations: None,
        neighbors: usize::MAX,
        ..ReliefParams::default()
    };
    let got = relief_weights(&rows, &names, &target, &params).unwrap();
    let expected = brute_force_rrelieff(&rows, &target, params.sigma);
    let diff = got
        .weights
        .iter()
        .zip(&expected)
        .map(|((_, w), e)| (w - e).abs())
        .fold(0.0_f64, f64::max);
    report(
        "2 relief-oracle-equivalence",
        diff <= 1e-12,
        format!(
            "max |impl - oracle| = {diff:.2e}, weights {:?}",
            got.weights.iter().map(|(_, w)| *w).collect::<Vec<_>>()
        ),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_3_kmeans_blob_recovery() {
    let start = Instant::now();
    let mut recovered = 0;
    let mut identity_ok = true;
    for master in 0..100u64 {
        let (points, labels) = gaussian_blobs(10_000 + master);
        let opts = KMeansOpts {
            restarts: 10,
            seed: master,
            ..KMeansOpts::default()
        };
        let model = kmeans(&points, 4, &opts).unwrap();
        if partition_matches(&model.assignments, &labels, 4) {
            recovered += 1;
        }
        // Centroid-mean identity and nearest-centroid property.
        for c in 0..model.k {
            let members: Vec<usize> = model
                .assignments
                .iter()
                .enumerate()
                .filter(|(_, &a)| a == c)
                .map(|(i, _)| i)
                .collect();
            if members.is_empty() {
                continue;
            }
            for d in 0..2 {
                let mean =
                    members.iter().map(|&i| points[i][d]).sum::<f64>() / members.len() as f64;
                if (mean - model.centroids[c][d]).abs() > 1e-9 {
                    identity_ok = false;
                }
            }
        }
        for (p, &a) in points.iter().zip(&model.assignments) {
            let d_assigned: f64 = p
                .iter()
                .zip(&model.centroids[a])
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            for centroid in &model.centroids {
                let d: f64 = p.iter().zip(centroid).map(|(x, y)| (x - y) * (x - y)).sum();
                if d < d_assigned - 1e-12 {
                    identity_ok = false;
                }
            }
        }
    }
    report(
        "3 kmeans-blob-recovery",
        recovered >= 95 && identity_ok,
        format!("{recovered}/100 exact recoveries, centroid identity {identity_ok}"),
        start.elapsed(),
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_4_metric_exactness() {
    let start = Instant::now();
    let rmse_got = rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
    let mae_got = mae(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
    let metrics_ok = (rmse_got - 3.5355339059327378).abs() < 1e-9 && (mae_got - 3.5).abs() < 1e-9;

    let reports = vec![
        EvalReport {
            approach: "BPNN".into(),
            rmse_kw: 558.098,
            mae_kw: 365.091,
            n: 24,
            per_hour_errors: None,
        },
        EvalReport {
            approach: "BPNN with clustering".into(),
            rmse_kw: 487.718,
            mae_kw: 323.596,
            n: 24,
            per_hour_errors: None,
        },
    ];
    let cmp = compare(&reports).unwrap();
    let red = cmp
        .reductions
        .iter()
        .find(|r| r.baseline == "BPNN" && r.candidate == "BPNN with clustering")
        .unwrap();
    let compare_ok =
        (red.rmse_reduction_pct - 12.7).abs() <= 0.2 && (red.mae_reduction_pct - 11.5).abs() <= 0.2;

    report(
        "4 metric-exactness",
        metrics_ok && compare_ok,
        format!(
            "rmse {rmse_got:.7}, mae {mae_got:.1}, reductions {:.2}%/{:.2}% vs published 12.7%/11.5%",
            red.rmse_reduction_pct, red.mae_reduction_pct
        ),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_5_bagging_stability() {
    let start = Instant::now();
    // Fixed split: 90 training days, 1 test day, hourly rows, wind speed
    // as the single input.
    let records = synth_generate(5, 91, &PowerCurveParams::default()).unwrap();
    let (days, _) = slice_days(&records).unwrap();
    let day_matrix = |range: std::ops::Range<usize>| -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for day in &days[range] {
            for r in aggregate_hourly(&day.records).unwrap().0 {
                xs.push(vec![r.wind_speed]);
                ys.push(r.power);
            }
        }
        (xs, ys)
    };
    let (train_x, train_y) = day_matrix(0..90);
    let (test_x, test_y) = day_matrix(90..91);
    let in_stats = fit_norm(&train_x).unwrap();
    let t_stats = fit_norm_column(&train_y, 0.1, 0.9).unwrap();
    let xn = apply_norm(&in_stats, &train_x).unwrap();
    let yn = apply_norm_column(&t_stats, &train_y).unwrap();
    let txn = apply_norm(&in_stats, &test_x).unwrap();

    // Full-batch descent over 2160 rows wants a smaller step than the
    // module default for 100-300 row batches.
    let base = NetConfig {
        learning_rate: 0.01,
        max_epochs: 600,
        ..NetConfig::for_input_dim(1)
    };
    let eval = |preds_norm: Vec<f64>| -> f64 {
        let preds = invert_norm_column(&t_stats, &preds_norm).unwrap();
        rmse(&test_y, &preds).unwrap()
    };
    let std_of = |v: &[f64]| -> f64 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
    };

    let singles: Vec<f64> = (0..20u64)
        .map(|seed| {
            let net = train(NetConfig { seed, ..base }, &xn, &yn).unwrap();
            eval(txn.iter().map(|x| net.forward(x).unwrap().0).collect())
        })
        .collect();
    let ensembles: Vec<f64> = (0..20u64)
        .map(|master_seed| {
            let config = BaggingConfig::new(base, master_seed);
            let ensemble = train_ensemble(&config, &xn, &yn).unwrap();
            eval(txn.iter().map(|x| predict(&ensemble, x).unwrap()).collect())
        })
        .collect();

    let single_std = std_of(&singles);
    let ensemble_std = std_of(&ensembles);
    report(
        "5 bagging-stability",
        ensemble_std < single_std,
        format!(
            "test-RMSE std across 20 seeds: K=10 ensemble {ensemble_std:.2} kW < single net {single_std:.2} kW"
        ),
        start.elapsed(),
        Duration::from_secs(180),
    );
}

#[test]
fn criterion_6_comparison_ordering() {
    let start = Instant::now();
    let mut plain = Vec::new();
    let mut clustered = Vec::new();
    let mut bagged = Vec::new();
    let mut wins = 0;
    for seed in 0..20u64 {
        let config = PipelineConfig {
            seed,
            ..PipelineConfig::default()
        };
        let outcome = run_compare(&config, None).unwrap();
        let r: Vec<f64> = outcome
            .comparison
            .reports
            .iter()
            .map(|x| x.rmse_kw)
            .collect();
        if r[2] < r[0] {
            wins += 1;
        }
        plain.push(r[0]);
        clustered.push(r[1]);
        bagged.push(r[2]);
    }
    let median = |v: &mut Vec<f64>| -> f64 {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        0.5 * (v[9] + v[10])
    };
    let (mp, mc, mb) = (
        median(&mut plain),
        median(&mut clustered),
        median(&mut bagged),
    );
    let ordering_ok = mb <= mc && mc <= mp;
    report(
        "6 comparison-ordering",
        ordering_ok && wins >= 16,
        format!(
            "median RMSE bagging {mb:.1} <= clustering {mc:.1} <= plain {mp:.1} kW; bagging beat plain in {wins}/20 seeds"
        ),
        start.elapsed(),
        Duration::from_secs(600),
    );
}

#[test]
fn criterion_7_pipeline_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.cfg");
    let mut config = PipelineConfig::default();
    config.days = 40;
    config.max_epochs = 600;
    assert!(config.parallel, "ensemble parallelism stays enabled");
    std::fs::write(&config_path, config.to_kv_string()).unwrap();

    let run = |out: &str| -> Vec<u8> {
        let out_dir = dir.path().join(out);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_windcast"))
            .args([
                "pipeline",
                "--config",
                config_path.to_str().unwrap(),
                "--out-dir",
                out_dir.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out_dir.join("forecast.csv")).unwrap()
    };
    let first = run("run_a");
    let second = run("run_b");
    report(
        "7 pipeline-determinism",
        !first.is_empty() && first == second,
        format!(
            "two cmd_pipeline executions from one saved config: {} byte forecast CSVs identical",
            first.len()
        ),
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_8_normalization_and_sigmoid_invariants() {
    let start = Instant::now();
    let mut rng = rng_from_seed(88);
    let mut norm_worst: f64 = 0.0;
    for _ in 0..1000 {
        let rows = rng.random_range(1..40);
        let cols = rng.random_range(1..8);
        let matrix: Vec<Vec<f64>> = (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| (rng.random::<f64>() - 0.5) * 200.0)
                    .collect()
            })
            .collect();
        let stats = fit_norm(&matrix).unwrap();
        let back = invert_norm(&stats, &apply_norm(&stats, &matrix).unwrap()).unwrap();
        for (row, brow) in matrix.iter().zip(&back) {
            for (a, b) in row.iter().zip(brow) {
                norm_worst = norm_worst.max((a - b).abs());
            }
        }
    }

    let mut sigmoid_worst: f64 = 0.0;
    let mut finite = true;
    let mut grid: Vec<f64> = vec![0.0, 745.0];
    let steps = 200;
    for i in 0..=steps {
        let exponent = -3.0 + (i as f64 / steps as f64) * (745.0_f64.log10() + 3.0);
        grid.push(10.0_f64.powf(exponent));
    }
    for &x in &grid {
        let s = sigmoid(x) + sigmoid(-x);
        sigmoid_worst = sigmoid_worst.max((s - 1.0).abs());
        finite &= sigmoid(x).is_finite() && sigmoid(-x).is_finite();
    }

    report(
        "8 normalization-and-sigmoid-invariants",
        norm_worst <= 1e-12 && sigmoid_worst <= 1e-15 && finite,
        format!(
            "apply-invert worst {norm_worst:.2e} over 1000 matrices; sigmoid symmetry worst {sigmoid_worst:.2e} incl |x|=745, all finite {finite}"
        ),
        start.elapsed(),
        Duration::from_secs(1),
    );
}
