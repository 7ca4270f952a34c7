//! Pipeline configuration: defaults, key-value file parsing, command-line
//! overrides (flag > file > default), and full serialization for run
//! provenance.

use crate::dataset::{CsvSchema, PowerCurveParams, AMBIENT_TEMP, BLADE_ANGLE, WIND_SPEED};
use crate::error::{Error, Result};
use crate::kv::{parse_kv, parse_list, KvWriter};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataSource {
    Synthetic,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    Hourly,
    TenMin,
}

/// Every tunable of the pipeline. Field defaults mirror the module-level
/// defaults; the full config is serialized into every run directory.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub source: DataSource,
    pub csv_path: String,
    pub days: usize,
    pub data_seed: u64,
    pub curve: PowerCurveParams,

    pub schema: CsvSchema,

    pub clean_enabled: bool,

    /// `None` means every sample is an anchor.
    pub relief_iterations: Option<usize>,
    pub relief_neighbors: usize,
    pub relief_sigma: f64,
    pub relief_threshold: f64,
    pub forced_include: Vec<String>,
    /// Features whose forecast-day values are obtainable.
    pub forecastable: Vec<String>,

    pub clusters: usize,
    pub restarts: usize,
    pub kmeans_max_iter: usize,
    pub kmeans_tol: f64,
    pub min_intersection_days: usize,

    /// `None` applies the 2M+1 heuristic once the input width is known.
    pub hidden_dim: Option<usize>,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub target_error: f64,
    pub weight_init_range: f64,
    /// Sweep hidden widths on a validation split before the final fit.
    pub hidden_sweep: bool,

    pub ensemble_size: usize,
    pub bootstrap_fraction: f64,
    pub parallel: bool,

    pub granularity: Granularity,
    pub horizon_hours: usize,
    /// Optional seeded degradation of forecast-day weather inputs.
    pub weather_noise_std: f64,
    /// Build the reference day's weather signature from the forecast day
    /// itself (measured data); otherwise reuse the prior day's.
    pub use_forecast_weather: bool,

    /// Training window, in days, of the non-clustering baseline.
    pub window_days: usize,

    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            source: DataSource::Synthetic,
            csv_path: String::new(),
            days: 120,
            data_seed: 7,
            curve: PowerCurveParams::default(),
            schema: CsvSchema::default(),
            clean_enabled: true,
            relief_iterations: None,
            relief_neighbors: 10,
            relief_sigma: 20.0,
            relief_threshold: 0.01,
            forced_include: Vec::new(),
            forecastable: vec![
                WIND_SPEED.to_string(),
                BLADE_ANGLE.to_string(),
                AMBIENT_TEMP.to_string(),
            ],
            clusters: 3,
            restarts: 10,
            kmeans_max_iter: 300,
            kmeans_tol: 0.0,
            min_intersection_days: 5,
            hidden_dim: None,
            learning_rate: 0.05,
            max_epochs: 5000,
            target_error: 1e-4,
            weight_init_range: 0.5,
            hidden_sweep: false,
            ensemble_size: 10,
            bootstrap_fraction: 1.0,
            parallel: true,
            granularity: Granularity::Hourly,
            horizon_hours: 24,
            weather_noise_std: 0.0,
            use_forecast_weather: true,
            window_days: 29,
            seed: 42,
        }
    }
}

/// `(key, help)` for every config key; drives both serialization order and
/// the generated command-line flags.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("data.source", "data source: synthetic | csv"),
    ("data.csv_path", "input CSV path when source = csv"),
    ("data.days", "synthetic dataset length in days"),
    ("data.seed", "synthetic generator seed"),
    ("data.cut_in", "turbine cut-in speed, m/s"),
    ("data.rated_speed", "speed reaching rated power, m/s"),
    ("data.cut_out", "turbine cut-out speed, m/s"),
    ("data.rated_power", "rated power, kW"),
    ("data.noise_std", "synthetic power noise std, kW"),
    (
        "schema.timestamp",
        "CSV column holding the minute timestamp",
    ),
    ("schema.wind_speed", "CSV column holding wind speed"),
    ("schema.blade_angle", "CSV column holding the blade angle"),
    (
        "schema.ambient_temp",
        "CSV column holding ambient temperature",
    ),
    ("schema.power", "CSV column holding power"),
    ("schema.extra", "comma list of auxiliary CSV columns"),
    ("clean.enabled", "remove-and-fill unreasonable records"),
    ("relief.iterations", "anchor samples: all | <count>"),
    ("relief.neighbors", "nearest neighbors per anchor"),
    ("relief.sigma", "distance-rank weighting scale"),
    ("relief.threshold", "feature selection weight threshold"),
    (
        "relief.forced_include",
        "comma list of features kept regardless of weight",
    ),
    (
        "relief.forecastable",
        "comma list of features obtainable for the forecast day",
    ),
    ("clustering.k", "cluster count for both signature spaces"),
    ("clustering.restarts", "independent seeded k-means restarts"),
    ("clustering.max_iter", "Lloyd iteration cap"),
    ("clustering.tol", "centroid-movement early-out"),
    (
        "clustering.min_days",
        "minimum training days before the union fallback",
    ),
    ("net.hidden_dim", "hidden width: auto (2M+1) | <count>"),
    ("net.learning_rate", "gradient-descent step size"),
    ("net.max_epochs", "training epoch cap"),
    ("net.target_error", "stop once batch error reaches this"),
    ("net.weight_init_range", "uniform init half-width"),
    (
        "net.hidden_sweep",
        "sweep hidden widths on a validation split",
    ),
    ("bagging.ensemble_size", "number of member networks"),
    (
        "bagging.bootstrap_fraction",
        "bootstrap sample size fraction",
    ),
    ("bagging.parallel", "train members on a thread pool"),
    (
        "forecast.granularity",
        "evaluation granularity: hourly | ten_min",
    ),
    ("forecast.horizon_hours", "forecast horizon, hours (1..=24)"),
    (
        "forecast.weather_noise_std",
        "seeded degradation of forecast-day weather",
    ),
    (
        "forecast.use_forecast_weather",
        "reference S1 from the forecast day's weather",
    ),
    (
        "compare.window_days",
        "training window of the plain-BPNN baseline",
    ),
    ("run.seed", "master seed for every derived stage seed"),
];

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value
        .parse()
        .map_err(|_| bad(key, value, "expected an integer"))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| bad(key, value, "expected an integer"))
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| bad(key, value, "expected a number"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, value, "expected true or false")),
    }
}

fn bad(key: &str, value: &str, message: &str) -> Error {
    Error::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        message: message.to_string(),
    }
}

impl PipelineConfig {
    /// Apply one `key = value` override.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "data.source" => {
                self.source = match value {
                    "synthetic" => DataSource::Synthetic,
                    "csv" => DataSource::Csv,
                    _ => return Err(bad(key, value, "expected synthetic or csv")),
                }
            }
            "data.csv_path" => self.csv_path = value.to_string(),
            "data.days" => self.days = parse_usize(key, value)?,
            "data.seed" => self.data_seed = parse_u64(key, value)?,
            "data.cut_in" => self.curve.cut_in = parse_f64(key, value)?,
            "data.rated_speed" => self.curve.rated_speed = parse_f64(key, value)?,
            "data.cut_out" => self.curve.cut_out = parse_f64(key, value)?,
            "data.rated_power" => self.curve.rated_power = parse_f64(key, value)?,
            "data.noise_std" => self.curve.noise_std = parse_f64(key, value)?,
            "schema.timestamp" => self.schema.timestamp = value.to_string(),
            "schema.wind_speed" => self.schema.wind_speed = value.to_string(),
            "schema.blade_angle" => self.schema.blade_angle = value.to_string(),
            "schema.ambient_temp" => self.schema.ambient_temp = value.to_string(),
            "schema.power" => self.schema.power = value.to_string(),
            "schema.extra" => self.schema.extra = parse_list(value),
            "clean.enabled" => self.clean_enabled = parse_bool(key, value)?,
            "relief.iterations" => {
                self.relief_iterations = if value == "all" {
                    None
                } else {
                    Some(parse_usize(key, value)?)
                }
            }
            "relief.neighbors" => self.relief_neighbors = parse_usize(key, value)?,
            "relief.sigma" => self.relief_sigma = parse_f64(key, value)?,
            "relief.threshold" => self.relief_threshold = parse_f64(key, value)?,
            "relief.forced_include" => self.forced_include = parse_list(value),
            "relief.forecastable" => self.forecastable = parse_list(value),
            "clustering.k" => self.clusters = parse_usize(key, value)?,
            "clustering.restarts" => self.restarts = parse_usize(key, value)?,
            "clustering.max_iter" => self.kmeans_max_iter = parse_usize(key, value)?,
            "clustering.tol" => self.kmeans_tol = parse_f64(key, value)?,
            "clustering.min_days" => self.min_intersection_days = parse_usize(key, value)?,
            "net.hidden_dim" => {
                self.hidden_dim = if value == "auto" {
                    None
                } else {
                    Some(parse_usize(key, value)?)
                }
            }
            "net.learning_rate" => self.learning_rate = parse_f64(key, value)?,
            "net.max_epochs" => self.max_epochs = parse_usize(key, value)?,
            "net.target_error" => self.target_error = parse_f64(key, value)?,
            "net.weight_init_range" => self.weight_init_range = parse_f64(key, value)?,
            "net.hidden_sweep" => self.hidden_sweep = parse_bool(key, value)?,
            "bagging.ensemble_size" => self.ensemble_size = parse_usize(key, value)?,
            "bagging.bootstrap_fraction" => self.bootstrap_fraction = parse_f64(key, value)?,
            "bagging.parallel" => self.parallel = parse_bool(key, value)?,
            "forecast.granularity" => {
                self.granularity = match value {
                    "hourly" => Granularity::Hourly,
                    "ten_min" => Granularity::TenMin,
                    _ => return Err(bad(key, value, "expected hourly or ten_min")),
                }
            }
            "forecast.horizon_hours" => self.horizon_hours = parse_usize(key, value)?,
            "forecast.weather_noise_std" => self.weather_noise_std = parse_f64(key, value)?,
            "forecast.use_forecast_weather" => self.use_forecast_weather = parse_bool(key, value)?,
            "compare.window_days" => self.window_days = parse_usize(key, value)?,
            "run.seed" => self.seed = parse_u64(key, value)?,
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Current value of a key, formatted exactly as `apply_kv` accepts it.
    pub fn get_kv(&self, key: &str) -> Option<String> {
        let v = match key {
            "data.source" => match self.source {
                DataSource::Synthetic => "synthetic".to_string(),
                DataSource::Csv => "csv".to_string(),
            },
            "data.csv_path" => self.csv_path.clone(),
            "data.days" => self.days.to_string(),
            "data.seed" => self.data_seed.to_string(),
            "data.cut_in" => self.curve.cut_in.to_string(),
            "data.rated_speed" => self.curve.rated_speed.to_string(),
            "data.cut_out" => self.curve.cut_out.to_string(),
            "data.rated_power" => self.curve.rated_power.to_string(),
            "data.noise_std" => self.curve.noise_std.to_string(),
            "schema.timestamp" => self.schema.timestamp.clone(),
            "schema.wind_speed" => self.schema.wind_speed.clone(),
            "schema.blade_angle" => self.schema.blade_angle.clone(),
            "schema.ambient_temp" => self.schema.ambient_temp.clone(),
            "schema.power" => self.schema.power.clone(),
            "schema.extra" => self.schema.extra.join(", "),
            "clean.enabled" => self.clean_enabled.to_string(),
            "relief.iterations" => self
                .relief_iterations
                .map_or("all".to_string(), |m| m.to_string()),
            "relief.neighbors" => self.relief_neighbors.to_string(),
            "relief.sigma" => self.relief_sigma.to_string(),
            "relief.threshold" => self.relief_threshold.to_string(),
            "relief.forced_include" => self.forced_include.join(", "),
            "relief.forecastable" => self.forecastable.join(", "),
            "clustering.k" => self.clusters.to_string(),
            "clustering.restarts" => self.restarts.to_string(),
            "clustering.max_iter" => self.kmeans_max_iter.to_string(),
            "clustering.tol" => self.kmeans_tol.to_string(),
            "clustering.min_days" => self.min_intersection_days.to_string(),
            "net.hidden_dim" => self
                .hidden_dim
                .map_or("auto".to_string(), |h| h.to_string()),
            "net.learning_rate" => self.learning_rate.to_string(),
            "net.max_epochs" => self.max_epochs.to_string(),
            "net.target_error" => self.target_error.to_string(),
            "net.weight_init_range" => self.weight_init_range.to_string(),
            "net.hidden_sweep" => self.hidden_sweep.to_string(),
            "bagging.ensemble_size" => self.ensemble_size.to_string(),
            "bagging.bootstrap_fraction" => self.bootstrap_fraction.to_string(),
            "bagging.parallel" => self.parallel.to_string(),
            "forecast.granularity" => match self.granularity {
                Granularity::Hourly => "hourly".to_string(),
                Granularity::TenMin => "ten_min".to_string(),
            },
            "forecast.horizon_hours" => self.horizon_hours.to_string(),
            "forecast.weather_noise_std" => self.weather_noise_std.to_string(),
            "forecast.use_forecast_weather" => self.use_forecast_weather.to_string(),
            "compare.window_days" => self.window_days.to_string(),
            "run.seed" => self.seed.to_string(),
            _ => return None,
        };
        Some(v)
    }

    /// Serialize every key; parsing the result back reproduces the config.
    pub fn to_kv_string(&self) -> String {
        let mut w = KvWriter::new();
        for (key, _) in CONFIG_KEYS {
            w.pair(key, self.get_kv(key).expect("every listed key is gettable"));
        }
        w.finish()
    }

    /// Parse a config file's text and apply it over `self`.
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (key, value) in parse_kv(text)? {
            self.apply_kv(&key, &value)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.source == DataSource::Csv && self.csv_path.is_empty() {
            return Err(Error::InvalidConfig(
                "data.csv_path is required when data.source = csv".into(),
            ));
        }
        if self.source == DataSource::Synthetic {
            self.curve.validate()?;
            if self.days == 0 {
                return Err(Error::InvalidConfig("data.days must be >= 1".into()));
            }
        }
        if self.clusters == 0 {
            return Err(Error::InvalidConfig("clustering.k must be >= 1".into()));
        }
        if self.min_intersection_days == 0 {
            return Err(Error::InvalidConfig(
                "clustering.min_days must be >= 1".into(),
            ));
        }
        if !(self.horizon_hours >= 1 && self.horizon_hours <= 24) {
            return Err(Error::InvalidConfig(
                "forecast.horizon_hours must be in 1..=24".into(),
            ));
        }
        if self.window_days == 0 {
            return Err(Error::InvalidConfig(
                "compare.window_days must be >= 1".into(),
            ));
        }
        if self.ensemble_size == 0 {
            return Err(Error::InvalidConfig(
                "bagging.ensemble_size must be >= 1".into(),
            ));
        }
        if !(self.weather_noise_std >= 0.0) {
            return Err(Error::InvalidConfig(
                "forecast.weather_noise_std must be non-negative".into(),
            ));
        }
        Ok(())
    }
}
