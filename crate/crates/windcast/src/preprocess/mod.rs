//! Data preprocessing: cleaning with neighbor-mean fills, Relief feature
//! weighting, input selection, and min-max normalization.

mod norm;
mod relief;

pub use norm::{
    apply_norm, apply_norm_column, fit_norm, fit_norm_column, fit_norm_range, invert_norm,
    invert_norm_column, NormStats,
};
pub use relief::{relief_weights, FeatureWeights, ReliefParams};

use std::collections::BTreeSet;

use crate::dataset::{circular_mean_deg, SampleRecord};
use crate::error::{Error, Result};
use crate::kv::KvWriter;

/// Audit record of what `clean` changed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CleanReport {
    /// Positions whose original record was removed as unreasonable.
    pub removed_indices: Vec<usize>,
    /// Positions refilled with neighbor means (identical to
    /// `removed_indices`: every removal leaves a vacancy that is filled).
    pub filled_indices: Vec<usize>,
    /// Per-rule counts; one record can fire several rules.
    pub rules_fired: Vec<(String, usize)>,
}

impl CleanReport {
    pub fn is_clean(&self) -> bool {
        self.removed_indices.is_empty()
    }

    pub fn to_kv_string(&self) -> String {
        let mut w = KvWriter::new();
        w.pair("clean.removed_count", self.removed_indices.len());
        w.list("clean.removed_indices", &self.removed_indices);
        w.list("clean.filled_indices", &self.filled_indices);
        for (rule, count) in &self.rules_fired {
            w.pair(&format!("rules.{rule}"), count);
        }
        w.finish()
    }
}

const RULE_NEGATIVE_WIND_SPEED: &str = "negative_wind_speed";
const RULE_NEGATIVE_POWER: &str = "negative_power";
const RULE_NON_FINITE: &str = "non_finite";

fn record_is_valid(r: &SampleRecord) -> bool {
    let finite = r.wind_speed.is_finite()
        && r.power.is_finite()
        && r.ambient_temp.is_finite()
        && r.blade_angle.is_finite()
        && r.extra.iter().all(|v| v.is_finite());
    finite && r.wind_speed >= 0.0 && r.power >= 0.0
}

/// Remove unreasonable records (negative wind speed or power, non-finite
/// channels) and fill each vacancy with the mean of the nearest valid
/// preceding and following records; at the sequence boundary the single
/// available neighbor is used. Output length equals input length and the
/// report enumerates every change.
pub fn clean(records: &[SampleRecord]) -> Result<(Vec<SampleRecord>, CleanReport)> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let valid: Vec<bool> = records.iter().map(record_is_valid).collect();
    if valid.iter().all(|&v| !v) {
        return Err(Error::AllRecordsInvalid);
    }

    let mut counts = [0usize; 3];
    for r in records {
        let finite = r.wind_speed.is_finite()
            && r.power.is_finite()
            && r.ambient_temp.is_finite()
            && r.blade_angle.is_finite()
            && r.extra.iter().all(|v| v.is_finite());
        if !finite {
            counts[2] += 1;
            continue;
        }
        if r.wind_speed < 0.0 {
            counts[0] += 1;
        }
        if r.power < 0.0 {
            counts[1] += 1;
        }
    }

    // Nearest valid index at or before / at or after each position.
    let n = records.len();
    let mut prev_valid: Vec<Option<usize>> = vec![None; n];
    let mut next_valid: Vec<Option<usize>> = vec![None; n];
    let mut last = None;
    for i in 0..n {
        if valid[i] {
            last = Some(i);
        }
        prev_valid[i] = last;
    }
    last = None;
    for i in (0..n).rev() {
        if valid[i] {
            last = Some(i);
        }
        next_valid[i] = last;
    }

    let mut out = Vec::with_capacity(n);
    let mut removed = Vec::new();
    for i in 0..n {
        if valid[i] {
            out.push(records[i].clone());
            continue;
        }
        removed.push(i);
        let filled = match (prev_valid[i], next_valid[i]) {
            (Some(p), Some(q)) => mean_fill(&records[p], &records[q], records[i].timestamp),
            (Some(p), None) => one_sided_fill(&records[p], records[i].timestamp),
            (None, Some(q)) => one_sided_fill(&records[q], records[i].timestamp),
            (None, None) => unreachable!("at least one record is valid"),
        };
        out.push(filled);
    }

    let mut rules_fired = Vec::new();
    for (rule, count) in [
        (RULE_NEGATIVE_WIND_SPEED, counts[0]),
        (RULE_NEGATIVE_POWER, counts[1]),
        (RULE_NON_FINITE, counts[2]),
    ] {
        if count > 0 {
            rules_fired.push((rule.to_string(), count));
        }
    }
    let report = CleanReport {
        filled_indices: removed.clone(),
        removed_indices: removed,
        rules_fired,
    };
    Ok((out, report))
}

fn mean_fill(a: &SampleRecord, b: &SampleRecord, timestamp: i64) -> SampleRecord {
    SampleRecord {
        timestamp,
        wind_speed: 0.5 * (a.wind_speed + b.wind_speed),
        blade_angle: circular_mean_deg([a.blade_angle, b.blade_angle].into_iter()),
        ambient_temp: 0.5 * (a.ambient_temp + b.ambient_temp),
        power: 0.5 * (a.power + b.power),
        extra: a
            .extra
            .iter()
            .zip(&b.extra)
            .map(|(x, y)| 0.5 * (x + y))
            .collect(),
    }
}

fn one_sided_fill(src: &SampleRecord, timestamp: i64) -> SampleRecord {
    SampleRecord {
        timestamp,
        ..src.clone()
    }
}

/// Keep the features whose weight exceeds the threshold (or that are
/// forced), intersect with the forecastable set, order by descending
/// weight, and expand angular features into `_sin`/`_cos` components.
pub fn select_features(
    weights: &FeatureWeights,
    forecastable: &BTreeSet<String>,
    forced: &[String],
    angular: &BTreeSet<String>,
) -> Result<Vec<String>> {
    for name in forced {
        if !weights.weights.iter().any(|(n, _)| n == name) {
            return Err(Error::InvalidConfig(format!(
                "forced feature `{name}` is not a candidate feature"
            )));
        }
    }
    let mut selected: Vec<(usize, &str, f64)> = weights
        .weights
        .iter()
        .enumerate()
        .filter(|(_, (name, w))| {
            (*w > weights.threshold || forced.iter().any(|f| f == name))
                && forecastable.contains(name)
        })
        .map(|(i, (name, w))| (i, name.as_str(), *w))
        .collect();
    selected.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });

    let mut out = Vec::new();
    for (_, name, _) in selected {
        if angular.contains(name) {
            out.push(format!("{name}_sin"));
            out.push(format!("{name}_cos"));
        } else {
            out.push(name.to_string());
        }
    }
    if out.is_empty() {
        return Err(Error::EmptySelection);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::RECORD_INTERVAL_MIN;

    fn rec(i: usize, ws: f64, power: f64) -> SampleRecord {
        SampleRecord {
            timestamp: i as i64 * RECORD_INTERVAL_MIN,
            wind_speed: ws,
            blade_angle: 10.0,
            ambient_temp: 15.0,
            power,
            extra: Vec::new(),
        }
    }

    #[test]
    fn negative_wind_speed_is_filled_with_the_neighbor_mean() {
        let records = vec![rec(0, 5.0, 100.0), rec(1, -1.0, 110.0), rec(2, 7.0, 120.0)];
        let (cleaned, report) = clean(&records).unwrap();
        assert_eq!(cleaned.len(), 3);
        assert_eq!(cleaned[1].wind_speed, 6.0);
        assert_eq!(cleaned[1].power, 110.0);
        assert_eq!(report.removed_indices, vec![1]);
        assert_eq!(report.filled_indices, vec![1]);
        assert_eq!(
            report.rules_fired,
            vec![("negative_wind_speed".to_string(), 1)]
        );
    }

    #[test]
    fn all_valid_input_is_returned_unchanged_with_an_empty_report() {
        let records = vec![rec(0, 5.0, 100.0), rec(1, 6.0, 110.0)];
        let (cleaned, report) = clean(&records).unwrap();
        assert_eq!(cleaned, records);
        assert!(report.is_clean());
        assert!(report.rules_fired.is_empty());
    }

    #[test]
    fn invalid_start_uses_the_first_valid_following_record() {
        let records = vec![rec(0, -2.0, 100.0), rec(1, 6.0, 110.0), rec(2, 7.0, 120.0)];
        let (cleaned, report) = clean(&records).unwrap();
        assert_eq!(cleaned[0].wind_speed, 6.0);
        assert_eq!(cleaned[0].power, 110.0);
        assert_eq!(cleaned[0].timestamp, 0);
        assert_eq!(report.removed_indices, vec![0]);
    }

    #[test]
    fn consecutive_invalids_share_the_bounding_valids() {
        let records = vec![
            rec(0, 4.0, 100.0),
            rec(1, -1.0, 110.0),
            rec(2, 5.0, -3.0),
            rec(3, 8.0, 140.0),
        ];
        let (cleaned, _) = clean(&records).unwrap();
        assert_eq!(cleaned[1].wind_speed, 6.0);
        assert_eq!(cleaned[2].wind_speed, 6.0);
        assert_eq!(cleaned[1].power, 120.0);
        assert_eq!(cleaned[2].power, 120.0);
    }

    #[test]
    fn all_invalid_input_is_an_error() {
        let records = vec![rec(0, -5.0, 100.0), rec(1, 6.0, -110.0)];
        assert!(matches!(clean(&records), Err(Error::AllRecordsInvalid)));
    }

    #[test]
    fn non_finite_channels_are_removed_and_filled() {
        let records = vec![
            rec(0, 5.0, 100.0),
            rec(1, f64::NAN, 110.0),
            rec(2, 7.0, 120.0),
        ];
        let (cleaned, report) = clean(&records).unwrap();
        assert_eq!(cleaned[1].wind_speed, 6.0);
        assert_eq!(report.rules_fired, vec![("non_finite".to_string(), 1)]);
    }

    #[test]
    fn clean_is_idempotent() {
        let records = vec![
            rec(0, -1.0, 100.0),
            rec(1, 6.0, 110.0),
            rec(2, 5.0, f64::INFINITY),
            rec(3, 8.0, -140.0),
            rec(4, 9.0, 150.0),
        ];
        let (once, first) = clean(&records).unwrap();
        assert_eq!(first.removed_indices.len(), 3);
        let (twice, second) = clean(&once).unwrap();
        assert!(second.is_clean());
        assert_eq!(once, twice);
    }

    fn paper_style_weights() -> FeatureWeights {
        FeatureWeights {
            weights: vec![
                ("ws".to_string(), 0.052),
                ("machine_temp".to_string(), 0.022),
                ("blade".to_string(), 0.013),
                ("ambient".to_string(), 0.002),
            ],
            threshold: 0.01,
            degenerate_target: false,
        }
    }

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn selection_intersects_forecastable_and_expands_the_blade_angle() {
        let selected = select_features(
            &paper_style_weights(),
            &set(&["ws", "blade", "ambient"]),
            &[],
            &set(&["blade"]),
        )
        .unwrap();
        assert_eq!(selected, vec!["ws", "blade_sin", "blade_cos"]);
    }

    #[test]
    fn forced_include_adds_a_below_threshold_feature_in_weight_order() {
        let selected = select_features(
            &paper_style_weights(),
            &set(&["ws", "blade", "ambient"]),
            &["ambient".to_string()],
            &set(&["blade"]),
        )
        .unwrap();
        assert_eq!(selected, vec!["ws", "blade_sin", "blade_cos", "ambient"]);
    }

    #[test]
    fn nothing_above_threshold_is_an_error() {
        let mut weights = paper_style_weights();
        weights.threshold = 0.1;
        assert!(matches!(
            select_features(&weights, &set(&["ws", "blade", "ambient"]), &[], &set(&[])),
            Err(Error::EmptySelection)
        ));
    }

    #[test]
    fn no_filtering_returns_all_features_weight_descending() {
        let mut weights = paper_style_weights();
        weights.threshold = 0.001;
        let selected = select_features(
            &weights,
            &set(&["ws", "machine_temp", "blade", "ambient"]),
            &[],
            &set(&[]),
        )
        .unwrap();
        assert_eq!(selected, vec!["ws", "machine_temp", "blade", "ambient"]);
    }

    #[test]
    fn selection_is_a_subset_of_the_forecastable_set() {
        let forecastable = set(&["ws"]);
        let selected =
            select_features(&paper_style_weights(), &forecastable, &[], &set(&[])).unwrap();
        assert_eq!(selected, vec!["ws"]);
    }

    #[test]
    fn unknown_forced_feature_is_an_error() {
        let got = select_features(
            &paper_style_weights(),
            &set(&["ws"]),
            &["bogus".to_string()],
            &set(&[]),
        );
        assert!(matches!(got, Err(Error::InvalidConfig(_))));
    }
}
