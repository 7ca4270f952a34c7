//! Forecast-error metrics and the multi-approach comparison report.

use crate::error::{Error, Result};
use crate::kv::KvWriter;

fn check_lengths(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.is_empty() || predicted.is_empty() {
        return Err(Error::EmptyInput);
    }
    if actual.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            got: predicted.len(),
        });
    }
    Ok(())
}

/// Root mean squared error.
pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted)?;
    let n = actual.len() as f64;
    let sum: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p) * (a - p))
        .sum();
    Ok((sum / n).sqrt())
}

/// Mean absolute error.
pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted)?;
    let n = actual.len() as f64;
    Ok(actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).abs())
        .sum::<f64>()
        / n)
}

/// One evaluated approach.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub approach: String,
    pub rmse_kw: f64,
    pub mae_kw: f64,
    pub n: usize,
    pub per_hour_errors: Option<Vec<f64>>,
}

impl EvalReport {
    /// Evaluate predictions against actuals, keeping per-sample residuals.
    pub fn evaluate(
        approach: impl Into<String>,
        actual: &[f64],
        predicted: &[f64],
    ) -> Result<Self> {
        Ok(Self {
            approach: approach.into(),
            rmse_kw: rmse(actual, predicted)?,
            mae_kw: mae(actual, predicted)?,
            n: actual.len(),
            per_hour_errors: Some(actual.iter().zip(predicted).map(|(a, p)| p - a).collect()),
        })
    }

    pub fn to_kv_string(&self) -> String {
        let mut w = KvWriter::new();
        w.pair("eval.approach", &self.approach);
        w.pair("eval.rmse_kw", self.rmse_kw);
        w.pair("eval.mae_kw", self.mae_kw);
        w.pair("eval.n", self.n);
        w.finish()
    }
}

/// Percentage reduction of candidate versus baseline for both metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct PairReduction {
    pub baseline: String,
    pub candidate: String,
    pub rmse_reduction_pct: f64,
    pub mae_reduction_pct: f64,
}

/// Comparison table plus the full pairwise reduction matrix, recomputed
/// from the raw metric values.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub reports: Vec<EvalReport>,
    pub reductions: Vec<PairReduction>,
}

/// Build the comparison: `(baseline - candidate) / baseline * 100` for
/// every ordered pair of distinct approaches.
pub fn compare(reports: &[EvalReport]) -> Result<Comparison> {
    if reports.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut reductions = Vec::new();
    for baseline in reports {
        for candidate in reports {
            if std::ptr::eq(baseline, candidate) {
                continue;
            }
            reductions.push(PairReduction {
                baseline: baseline.approach.clone(),
                candidate: candidate.approach.clone(),
                rmse_reduction_pct: reduction_pct(baseline.rmse_kw, candidate.rmse_kw),
                mae_reduction_pct: reduction_pct(baseline.mae_kw, candidate.mae_kw),
            });
        }
    }
    Ok(Comparison {
        reports: reports.to_vec(),
        reductions,
    })
}

fn reduction_pct(baseline: f64, candidate: f64) -> f64 {
    (baseline - candidate) / baseline * 100.0
}

impl Comparison {
    /// Aligned plain-text table followed by the reduction matrix.
    pub fn render_table(&self) -> String {
        let name_width = self
            .reports
            .iter()
            .map(|r| r.approach.len())
            .max()
            .unwrap_or(8)
            .max("approach".len());
        let mut out = String::new();
        out.push_str(&format!(
            "{:<name_width$}  {:>12}  {:>12}  {:>6}\n",
            "approach", "RMSE (kW)", "MAE (kW)", "n"
        ));
        for r in &self.reports {
            out.push_str(&format!(
                "{:<name_width$}  {:>12.3}  {:>12.3}  {:>6}\n",
                r.approach, r.rmse_kw, r.mae_kw, r.n
            ));
        }
        if !self.reductions.is_empty() {
            out.push('\n');
            for red in &self.reductions {
                out.push_str(&format!(
                    "{} vs {}: RMSE {:+.1}%, MAE {:+.1}%\n",
                    red.candidate, red.baseline, -red.rmse_reduction_pct, -red.mae_reduction_pct
                ));
            }
        }
        out
    }

    /// Machine-readable key-value rendering.
    pub fn to_kv_string(&self) -> String {
        let mut w = KvWriter::new();
        for (i, r) in self.reports.iter().enumerate() {
            w.pair(&format!("approaches.name_{i}"), &r.approach);
            w.pair(&format!("approaches.rmse_kw_{i}"), r.rmse_kw);
            w.pair(&format!("approaches.mae_kw_{i}"), r.mae_kw);
        }
        for (i, red) in self.reductions.iter().enumerate() {
            w.pair(&format!("reductions.baseline_{i}"), &red.baseline);
            w.pair(&format!("reductions.candidate_{i}"), &red.candidate);
            w.pair(&format!("reductions.rmse_pct_{i}"), red.rmse_reduction_pct);
            w.pair(&format!("reductions.mae_pct_{i}"), red.mae_reduction_pct);
        }
        w.finish()
    }
}
