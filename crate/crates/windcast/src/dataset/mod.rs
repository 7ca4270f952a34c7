//! SCADA-style sample records, day units with their clustering signatures,
//! hourly aggregation, and the seeded synthetic generator.

mod ingest;
mod synth;

pub use ingest::{ingest_csv, ingest_csv_reader, write_csv, CsvSchema, Ingested, RowReject};
pub use synth::{synth_generate, PowerCurveParams};

use crate::error::{Error, Result};

/// 10-minute records per day.
pub const RECORDS_PER_DAY: usize = 144;
/// 10-minute records per hour.
pub const RECORDS_PER_HOUR: usize = 6;
/// Grid step in minutes.
pub const RECORD_INTERVAL_MIN: i64 = 10;

/// Canonical feature names used by schemas, feature selection, and configs.
pub const WIND_SPEED: &str = "wind_speed";
pub const BLADE_ANGLE: &str = "blade_angle";
pub const AMBIENT_TEMP: &str = "ambient_temp";
pub const POWER: &str = "power";
pub const TIMESTAMP: &str = "timestamp";

/// One 10-minute SCADA observation.
///
/// `timestamp` is in minutes since the start of the dataset's epoch; `extra`
/// holds auxiliary channel values in the order the schema names them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub timestamp: i64,
    /// Wind speed in m/s (non-negative after cleaning).
    pub wind_speed: f64,
    /// Blade angle in degrees, [0, 360).
    pub blade_angle: f64,
    /// Ambient temperature in degrees Celsius.
    pub ambient_temp: f64,
    /// Power in kW (non-negative after cleaning).
    pub power: f64,
    pub extra: Vec<f64>,
}

/// Daily meteorological signature: extremes and mean of wind speed and
/// temperature, in that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Signature1 {
    pub ws_max: f64,
    pub ws_min: f64,
    pub ws_mean: f64,
    pub t_max: f64,
    pub t_min: f64,
    pub t_mean: f64,
}

impl Signature1 {
    pub fn from_records(records: &[SampleRecord]) -> Self {
        let ws = records.iter().map(|r| r.wind_speed);
        let t = records.iter().map(|r| r.ambient_temp);
        let (ws_max, ws_min, ws_mean) = extremes_and_mean(ws);
        let (t_max, t_min, t_mean) = extremes_and_mean(t);
        Self {
            ws_max,
            ws_min,
            ws_mean,
            t_max,
            t_min,
            t_mean,
        }
    }

    pub fn to_vec(self) -> Vec<f64> {
        vec![
            self.ws_max,
            self.ws_min,
            self.ws_mean,
            self.t_max,
            self.t_min,
            self.t_mean,
        ]
    }
}

/// Daily power signature: extremes and mean of generated power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Signature2 {
    pub wp_max: f64,
    pub wp_min: f64,
    pub wp_mean: f64,
}

impl Signature2 {
    pub fn from_records(records: &[SampleRecord]) -> Self {
        let (wp_max, wp_min, wp_mean) = extremes_and_mean(records.iter().map(|r| r.power));
        Self {
            wp_max,
            wp_min,
            wp_mean,
        }
    }

    pub fn to_vec(self) -> Vec<f64> {
        vec![self.wp_max, self.wp_min, self.wp_mean]
    }
}

fn extremes_and_mean(values: impl Iterator<Item = f64>) -> (f64, f64, f64) {
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        max = max.max(v);
        min = min.min(v);
        sum += v;
        n += 1;
    }
    (max, min, sum / n as f64)
}

/// One day of 144 records plus its clustering signatures.
#[derive(Debug, Clone, PartialEq)]
pub struct DayUnit {
    pub day_index: usize,
    pub records: Vec<SampleRecord>,
    pub s1: Signature1,
    pub s2: Signature2,
}

impl DayUnit {
    /// Build a day from exactly [`RECORDS_PER_DAY`] records, computing both
    /// signatures. Recomputing the signatures from `records` reproduces the
    /// stored values exactly.
    pub fn new(day_index: usize, records: Vec<SampleRecord>) -> Result<Self> {
        if records.len() != RECORDS_PER_DAY {
            return Err(Error::TooFewRecords {
                need: RECORDS_PER_DAY,
                got: records.len(),
            });
        }
        let s1 = Signature1::from_records(&records);
        let s2 = Signature2::from_records(&records);
        Ok(Self {
            day_index,
            records,
            s1,
            s2,
        })
    }
}

/// Check the strict 10-minute grid over `records`.
fn check_grid(records: &[SampleRecord]) -> Result<()> {
    for (i, pair) in records.windows(2).enumerate() {
        let step = pair[1].timestamp - pair[0].timestamp;
        if step != RECORD_INTERVAL_MIN {
            return Err(Error::IrregularGrid {
                index: i + 1,
                expected: RECORD_INTERVAL_MIN,
                got: step,
            });
        }
    }
    Ok(())
}

/// Normalize an angle in degrees to [0, 360).
pub(crate) fn wrap_angle(deg: f64) -> f64 {
    let a = deg % 360.0;
    if a < 0.0 {
        a + 360.0
    } else {
        a
    }
}

/// Circular mean of angles in degrees via averaged sine/cosine components.
pub(crate) fn circular_mean_deg(angles: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for a in angles {
        let r = a.to_radians();
        s += r.sin();
        c += r.cos();
    }
    wrap_angle(s.atan2(c).to_degrees())
}

/// Collapse six 10-minute records into one hourly record: power is summed,
/// wind speed, temperature, and auxiliary channels are averaged, and the
/// blade angle is the circular mean of its sine/cosine components. The
/// output timestamp marks the hour start; a trailing partial hour is
/// dropped and its record count returned alongside the result.
pub fn aggregate_hourly(records: &[SampleRecord]) -> Result<(Vec<SampleRecord>, usize)> {
    if records.len() < RECORDS_PER_HOUR {
        return Err(Error::TooFewRecords {
            need: RECORDS_PER_HOUR,
            got: records.len(),
        });
    }
    check_grid(records)?;
    let full = records.len() / RECORDS_PER_HOUR;
    let dropped = records.len() - full * RECORDS_PER_HOUR;
    let mut out = Vec::with_capacity(full);
    for chunk in records.chunks_exact(RECORDS_PER_HOUR) {
        let n = RECORDS_PER_HOUR as f64;
        let extra_len = chunk[0].extra.len();
        let mut extra = vec![0.0; extra_len];
        for r in chunk {
            for (acc, v) in extra.iter_mut().zip(&r.extra) {
                *acc += v;
            }
        }
        for v in &mut extra {
            *v /= n;
        }
        out.push(SampleRecord {
            timestamp: chunk[0].timestamp,
            wind_speed: chunk.iter().map(|r| r.wind_speed).sum::<f64>() / n,
            blade_angle: circular_mean_deg(chunk.iter().map(|r| r.blade_angle)),
            ambient_temp: chunk.iter().map(|r| r.ambient_temp).sum::<f64>() / n,
            power: chunk.iter().map(|r| r.power).sum::<f64>(),
            extra,
        });
    }
    Ok((out, dropped))
}

/// Cut the record stream into consecutive non-overlapping days of 144
/// records, each with its signatures computed. A trailing partial day is
/// dropped and its record count returned alongside the result.
pub fn slice_days(records: &[SampleRecord]) -> Result<(Vec<DayUnit>, usize)> {
    if records.len() < RECORDS_PER_DAY {
        return Err(Error::TooFewRecords {
            need: RECORDS_PER_DAY,
            got: records.len(),
        });
    }
    check_grid(records)?;
    let full = records.len() / RECORDS_PER_DAY;
    let dropped = records.len() - full * RECORDS_PER_DAY;
    let days = records
        .chunks_exact(RECORDS_PER_DAY)
        .enumerate()
        .map(|(i, chunk)| DayUnit::new(i, chunk.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok((days, dropped))
}
