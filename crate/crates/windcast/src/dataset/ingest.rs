//! CSV ingestion with a configurable column mapping, and the matching writer
//! so synthetic data round-trips through the same schema.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::SampleRecord;

/// Column-name mapping for the required channels plus any auxiliary columns
/// to carry along as extra features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub timestamp: String,
    pub wind_speed: String,
    pub blade_angle: String,
    pub ambient_temp: String,
    pub power: String,
    pub extra: Vec<String>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            timestamp: super::TIMESTAMP.into(),
            wind_speed: super::WIND_SPEED.into(),
            blade_angle: super::BLADE_ANGLE.into(),
            ambient_temp: super::AMBIENT_TEMP.into(),
            power: super::POWER.into(),
            extra: Vec::new(),
        }
    }
}

/// A data row that could not be parsed, reported rather than silently dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowReject {
    /// 1-based data row number (the header is row 0).
    pub row: usize,
    pub reason: String,
}

/// Ingestion result: records sorted by timestamp plus the reject report.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub records: Vec<SampleRecord>,
    pub rejects: Vec<RowReject>,
}

/// Read a SCADA CSV file. Rows with unparseable required fields are
/// collected in the reject report; a duplicated timestamp is an error
/// naming the offending row.
pub fn ingest_csv(path: &Path, schema: &CsvSchema) -> Result<Ingested> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ingest_csv_reader(file, schema)
}

/// Same as [`ingest_csv`] over any reader.
pub fn ingest_csv_reader<R: Read>(reader: R, schema: &CsvSchema) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let ts_col = col(&schema.timestamp)?;
    let ws_col = col(&schema.wind_speed)?;
    let angle_col = col(&schema.blade_angle)?;
    let temp_col = col(&schema.ambient_temp)?;
    let power_col = col(&schema.power)?;
    let extra_cols = schema
        .extra
        .iter()
        .map(|name| col(name))
        .collect::<Result<Vec<_>>>()?;

    let mut records: Vec<(usize, SampleRecord)> = Vec::new();
    let mut rejects = Vec::new();
    for (idx, row) in rdr.records().enumerate() {
        let row_no = idx + 1;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                rejects.push(RowReject {
                    row: row_no,
                    reason: format!("unreadable row: {e}"),
                });
                continue;
            }
        };
        match parse_row(
            &row,
            ts_col,
            ws_col,
            angle_col,
            temp_col,
            power_col,
            &extra_cols,
            schema,
        ) {
            Ok(record) => records.push((row_no, record)),
            Err(reason) => rejects.push(RowReject {
                row: row_no,
                reason,
            }),
        }
    }

    records.sort_by_key(|(_, r)| r.timestamp);
    for pair in records.windows(2) {
        if pair[0].1.timestamp == pair[1].1.timestamp {
            return Err(Error::DuplicateTimestamp {
                row: pair[1].0,
                timestamp: pair[1].1.timestamp,
            });
        }
    }

    Ok(Ingested {
        records: records.into_iter().map(|(_, r)| r).collect(),
        rejects,
    })
}

#[allow(clippy::too_many_arguments)]
fn parse_row(
    row: &csv::StringRecord,
    ts_col: usize,
    ws_col: usize,
    angle_col: usize,
    temp_col: usize,
    power_col: usize,
    extra_cols: &[usize],
    schema: &CsvSchema,
) -> std::result::Result<SampleRecord, String> {
    let cell = |col: usize, name: &str| -> std::result::Result<&str, String> {
        row.get(col)
            .ok_or_else(|| format!("missing field `{name}`"))
    };
    let float = |col: usize, name: &str| -> std::result::Result<f64, String> {
        let raw = cell(col, name)?;
        raw.trim()
            .parse::<f64>()
            .map_err(|_| format!("non-numeric {name} `{raw}`"))
    };
    let ts_raw = cell(ts_col, &schema.timestamp)?;
    let timestamp = ts_raw
        .trim()
        .parse::<i64>()
        .map_err(|_| format!("non-integer {} `{ts_raw}`", schema.timestamp))?;
    let mut extra = Vec::with_capacity(extra_cols.len());
    for (col, name) in extra_cols.iter().zip(&schema.extra) {
        extra.push(float(*col, name)?);
    }
    Ok(SampleRecord {
        timestamp,
        wind_speed: float(ws_col, &schema.wind_speed)?,
        blade_angle: float(angle_col, &schema.blade_angle)?,
        ambient_temp: float(temp_col, &schema.ambient_temp)?,
        power: float(power_col, &schema.power)?,
        extra,
    })
}

/// Write records in the same schema the reader accepts. Floats are printed
/// in shortest round-trip form so a written file re-ingests bit-exactly.
pub fn write_csv<W: Write>(out: W, schema: &CsvSchema, records: &[SampleRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = vec![
        &schema.timestamp,
        &schema.wind_speed,
        &schema.blade_angle,
        &schema.ambient_temp,
        &schema.power,
    ];
    header.extend(schema.extra.iter().map(|s| s.as_str()));
    w.write_record(&header)?;
    for r in records {
        let mut fields = vec![
            r.timestamp.to_string(),
            r.wind_speed.to_string(),
            r.blade_angle.to_string(),
            r.ambient_temp.to_string(),
            r.power.to_string(),
        ];
        fields.extend(r.extra.iter().map(|v| v.to_string()));
        w.write_record(&fields)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}
