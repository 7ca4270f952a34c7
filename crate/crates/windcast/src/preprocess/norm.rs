//! Min-max normalization fitted on training data only.

use crate::error::{Error, Result};

/// Per-feature training min/max plus the target interval. Immutable once
/// fitted; persisted alongside models so forecasts reuse training
/// statistics bit-exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub ranges: Vec<(f64, f64)>,
    pub lo: f64,
    pub hi: f64,
}

impl NormStats {
    pub fn n_features(&self) -> usize {
        self.ranges.len()
    }
}

fn check_rect(data: &[Vec<f64>]) -> Result<usize> {
    let cols = data.first().map_or(0, |r| r.len());
    for (i, row) in data.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::RaggedMatrix {
                row: i,
                got: row.len(),
                expected: cols,
            });
        }
    }
    Ok(cols)
}

/// Fit per-column min/max on the training matrix, mapping onto [0, 1].
pub fn fit_norm(training: &[Vec<f64>]) -> Result<NormStats> {
    fit_norm_range(training, 0.0, 1.0)
}

/// Fit per-column min/max mapping onto [lo, hi].
pub fn fit_norm_range(training: &[Vec<f64>], lo: f64, hi: f64) -> Result<NormStats> {
    if training.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(hi > lo) {
        return Err(Error::InvalidConfig(format!(
            "normalization interval must have hi > lo, got [{lo}, {hi}]"
        )));
    }
    let cols = check_rect(training)?;
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); cols];
    for row in training {
        for (range, &v) in ranges.iter_mut().zip(row) {
            range.0 = range.0.min(v);
            range.1 = range.1.max(v);
        }
    }
    Ok(NormStats { ranges, lo, hi })
}

/// Map each column through `(x - min) / (max - min)` scaled to `[lo, hi]`.
/// Values outside the training range map outside the interval (no
/// clamping); a degenerate column (max == min) maps to the midpoint.
pub fn apply_norm(stats: &NormStats, data: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    transform(stats, data, |stats, range, v| {
        let (min, max) = range;
        if max > min {
            stats.lo + (stats.hi - stats.lo) * (v - min) / (max - min)
        } else {
            0.5 * (stats.lo + stats.hi)
        }
    })
}

/// Inverse of [`apply_norm`]; `invert(apply(x)) == x` to 1e-12 for
/// non-degenerate columns, and degenerate columns recover the constant.
pub fn invert_norm(stats: &NormStats, data: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    transform(stats, data, |stats, range, v| {
        let (min, max) = range;
        if max > min {
            min + (max - min) * (v - stats.lo) / (stats.hi - stats.lo)
        } else {
            min
        }
    })
}

fn transform(
    stats: &NormStats,
    data: &[Vec<f64>],
    f: impl Fn(&NormStats, (f64, f64), f64) -> f64,
) -> Result<Vec<Vec<f64>>> {
    let cols = check_rect(data)?;
    if !data.is_empty() && cols != stats.n_features() {
        return Err(Error::ColumnMismatch {
            expected: stats.n_features(),
            got: cols,
        });
    }
    Ok(data
        .iter()
        .map(|row| {
            row.iter()
                .zip(&stats.ranges)
                .map(|(&v, &range)| f(stats, range, v))
                .collect()
        })
        .collect())
}

/// Convenience for a single column (targets).
pub fn fit_norm_column(values: &[f64], lo: f64, hi: f64) -> Result<NormStats> {
    let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
    fit_norm_range(&rows, lo, hi)
}

pub fn apply_norm_column(stats: &NormStats, values: &[f64]) -> Result<Vec<f64>> {
    let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
    Ok(apply_norm(stats, &rows)?
        .into_iter()
        .map(|r| r[0])
        .collect())
}

pub fn invert_norm_column(stats: &NormStats, values: &[f64]) -> Result<Vec<f64>> {
    let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
    Ok(invert_norm(stats, &rows)?
        .into_iter()
        .map(|r| r[0])
        .collect())
}
