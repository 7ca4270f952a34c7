//! Command-line front end: `synth`, `pipeline`, `compare`, `eval`, and
//! `inspect-model`, with every config key exposed as a flag of the same
//! name (precedence: flag > config file > default).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Command};

use windcast::bagging::EnsembleManifest;
use windcast::bpnn::ModelArtifact;
use windcast::config::{PipelineConfig, CONFIG_KEYS};
use windcast::metrics::{mae, rmse};
use windcast::pipeline::{run_compare, run_pipeline, run_synth};
use windcast::{Error, Result};

fn config_args() -> Vec<Arg> {
    let mut args = vec![Arg::new("config")
        .long("config")
        .value_name("FILE")
        .help("config file (key = value lines under [section] headers)")];
    for (key, help) in CONFIG_KEYS {
        args.push(Arg::new(*key).long(key).value_name("VALUE").help(*help));
    }
    args
}

fn build_cli() -> Command {
    Command::new("windcast")
        .about(
            "Short-term wind power forecasting: similar-day clustering plus a bagged BPNN ensemble",
        )
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(
            Command::new("synth")
                .about("Generate a seeded synthetic SCADA dataset CSV plus its generation manifest")
                .args(config_args())
                .arg(
                    Arg::new("out")
                        .long("out")
                        .value_name("CSV")
                        .required(true)
                        .help("output CSV path"),
                ),
        )
        .subcommand(
            Command::new("pipeline")
                .about("Run the full pipeline and write every run artifact")
                .args(config_args())
                .arg(
                    Arg::new("out-dir")
                        .long("out-dir")
                        .value_name("DIR")
                        .required(true)
                        .help("run directory for artifacts"),
                ),
        )
        .subcommand(
            Command::new("compare")
                .about("Compare plain BPNN, clustering BPNN, and the bagging ensemble on one split")
                .args(config_args())
                .arg(
                    Arg::new("out-dir")
                        .long("out-dir")
                        .value_name("DIR")
                        .help("optional directory for per-approach artifacts"),
                ),
        )
        .subcommand(
            Command::new("eval")
                .about("Compute RMSE and MAE between two columns of a CSV file")
                .arg(Arg::new("csv").value_name("CSV").required(true))
                .arg(
                    Arg::new("actual-col")
                        .long("actual-col")
                        .value_name("NAME")
                        .default_value("actual_kw"),
                )
                .arg(
                    Arg::new("predicted-col")
                        .long("predicted-col")
                        .value_name("NAME")
                        .default_value("predicted_kw"),
                ),
        )
        .subcommand(
            Command::new("inspect-model")
                .about("Summarize a saved model file or ensemble manifest")
                .arg(Arg::new("path").value_name("PATH").required(true)),
        )
}

/// Assemble the config: defaults, then the file, then flags.
fn load_config(matches: &ArgMatches) -> Result<PipelineConfig> {
    let mut config = PipelineConfig::default();
    if let Some(path) = matches.get_one::<String>("config") {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: PathBuf::from(path),
            source,
        })?;
        config.apply_file_text(&text)?;
    }
    for (key, _) in CONFIG_KEYS {
        if let Some(value) = matches.get_one::<String>(key) {
            config.apply_kv(key, value)?;
        }
    }
    Ok(config)
}

fn cmd_synth(matches: &ArgMatches) -> Result<()> {
    let config = load_config(matches)?;
    let out = PathBuf::from(matches.get_one::<String>("out").expect("required"));
    let rows = run_synth(&config, &out)?;
    println!(
        "wrote {rows} rows to {} (manifest: {})",
        out.display(),
        out.with_extension("manifest").display()
    );
    Ok(())
}

fn cmd_pipeline(matches: &ArgMatches) -> Result<()> {
    let config = load_config(matches)?;
    let out_dir = PathBuf::from(matches.get_one::<String>("out-dir").expect("required"));
    let outcome = run_pipeline(&config, &out_dir)?;
    println!("run directory: {}", outcome.run_dir.display());
    println!("selected features: {}", outcome.features.join(", "));
    if let Some(sel) = &outcome.selection {
        println!(
            "training days: {} (fallback: {})",
            sel.training_days.len(),
            sel.fallback_used
        );
    }
    println!(
        "{}: RMSE {:.3} kW, MAE {:.3} kW over {} rows",
        outcome.eval.approach, outcome.eval.rmse_kw, outcome.eval.mae_kw, outcome.eval.n
    );
    Ok(())
}

fn cmd_compare(matches: &ArgMatches) -> Result<()> {
    let config = load_config(matches)?;
    let out_dir = matches.get_one::<String>("out-dir").map(PathBuf::from);
    let outcome = run_compare(&config, out_dir.as_deref())?;
    print!("{}", outcome.comparison.render_table());
    if let Some(dir) = out_dir {
        println!("\nartifacts: {}", dir.display());
    }
    Ok(())
}

fn csv_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path).map_err(Error::Csv)?;
    let headers = rdr.headers()?.clone();
    let idx = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::MissingColumn(column.to_string()))?;
    let mut values = Vec::new();
    for (row_no, row) in rdr.records().enumerate() {
        let row = row?;
        let raw = row.get(idx).unwrap_or("");
        let v: f64 = raw.trim().parse().map_err(|_| Error::BadValue {
            key: format!("{column} (data row {})", row_no + 1),
            value: raw.to_string(),
            message: "expected a number".to_string(),
        })?;
        values.push(v);
    }
    Ok(values)
}

fn cmd_eval(matches: &ArgMatches) -> Result<()> {
    let path = PathBuf::from(matches.get_one::<String>("csv").expect("required"));
    let actual_col = matches.get_one::<String>("actual-col").expect("default");
    let predicted_col = matches.get_one::<String>("predicted-col").expect("default");
    let actual = csv_column(&path, actual_col)?;
    let predicted = csv_column(&path, predicted_col)?;
    println!("n = {}", actual.len());
    println!("RMSE = {:.6}", rmse(&actual, &predicted)?);
    println!("MAE  = {:.6}", mae(&actual, &predicted)?);
    Ok(())
}

fn cmd_inspect_model(matches: &ArgMatches) -> Result<()> {
    let path = PathBuf::from(matches.get_one::<String>("path").expect("required"));
    let bytes = std::fs::read(&path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    if bytes.starts_with(b"WCM1") {
        let artifact = ModelArtifact::decode(&bytes)?;
        let c = artifact.net.config;
        println!("model file: {}", path.display());
        println!("  layers: {} -> {} -> 1", c.input_dim, c.hidden_dim);
        println!("  learning_rate: {}", c.learning_rate);
        println!("  max_epochs: {}", c.max_epochs);
        println!("  target_error: {}", c.target_error);
        println!("  seed: {}", c.seed);
        println!("  weight_init_range: {}", c.weight_init_range);
        println!("  input feature ranges:");
        for (i, (min, max)) in artifact.input_stats.ranges.iter().enumerate() {
            println!("    feature {i}: [{min}, {max}]");
        }
        let (tmin, tmax) = artifact.target_stats.ranges[0];
        println!(
            "  target range: [{tmin}, {tmax}] -> [{}, {}]",
            artifact.target_stats.lo, artifact.target_stats.hi
        );
        return Ok(());
    }
    match std::str::from_utf8(&bytes)
        .ok()
        .and_then(|text| EnsembleManifest::parse(text).ok())
    {
        Some(manifest) => {
            println!("ensemble manifest: {}", path.display());
            println!("  members: {}", manifest.ensemble_size);
            println!("  bootstrap_fraction: {}", manifest.bootstrap_fraction);
            println!("  master_seed: {}", manifest.master_seed);
            for (seed, file) in manifest.member_seeds.iter().zip(&manifest.member_files) {
                println!("  member {file}: seed {seed}");
            }
            Ok(())
        }
        None => Err(Error::ModelFormat(
            "neither a model file (WCM1) nor an ensemble manifest".into(),
        )),
    }
}

fn main() -> ExitCode {
    // Die quietly when a consumer like `head` closes stdout early instead
    // of panicking inside println!.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let matches = build_cli().get_matches();
    let result = match matches.subcommand() {
        Some(("synth", m)) => cmd_synth(m),
        Some(("pipeline", m)) => cmd_pipeline(m),
        Some(("compare", m)) => cmd_compare(m),
        Some(("eval", m)) => cmd_eval(m),
        Some(("inspect-model", m)) => cmd_inspect_model(m),
        _ => unreachable!("subcommand is required"),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
