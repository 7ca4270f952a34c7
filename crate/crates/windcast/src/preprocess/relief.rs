//! Relief feature weighting, regression variant (RReliefF).
//!
//! For each anchor sample the k nearest neighbors contribute, with
//! distance-rank weighting, to the probabilities that the target changes,
//! that a feature changes, and that both change together; the feature
//! weight is assembled from those three accumulators. Features and target
//! are normalized internally with their own min-max so diff terms are
//! dimensionless and the weights are invariant under per-feature affine
//! rescaling.

use crate::error::{Error, Result};
use crate::seeding::{rng_from_seed, sample_distinct};

/// Parameters of the weighting run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliefParams {
    /// Number of anchor samples; `None` uses every sample once, in index
    /// order.
    pub iterations: Option<usize>,
    /// Neighbors per anchor (clamped to the available sample count).
    pub neighbors: usize,
    /// Scale of the exponential distance-rank weight `exp(-(rank/sigma)^2)`.
    pub sigma: f64,
    /// Seed for anchor sampling when `iterations` is set.
    pub seed: u64,
    /// Selection threshold carried into [`FeatureWeights`].
    pub threshold: f64,
}

impl Default for ReliefParams {
    fn default() -> Self {
        Self {
            iterations: None,
            neighbors: 10,
            sigma: 20.0,
            seed: 0,
            threshold: 0.01,
        }
    }
}

/// Feature weights plus the selection threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureWeights {
    /// One `(name, weight)` entry per candidate feature, in input order.
    pub weights: Vec<(String, f64)>,
    pub threshold: f64,
    /// Set when the target was constant (or every pair tied); the weights
    /// are all zero and carry no information.
    pub degenerate_target: bool,
}

impl FeatureWeights {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.weights
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, w)| *w)
    }

    pub fn to_kv_string(&self) -> String {
        let mut w = crate::kv::KvWriter::new();
        w.pair("relief.threshold", self.threshold);
        w.pair("relief.degenerate_target", self.degenerate_target);
        for (name, weight) in &self.weights {
            w.pair(&format!("weights.{name}"), weight);
        }
        w.finish()
    }
}

fn check_samples(rows: &[Vec<f64>], names: &[String], target: &[f64]) -> Result<usize> {
    if rows.len() < 2 {
        return Err(Error::TooFewRecords {
            need: 2,
            got: rows.len(),
        });
    }
    if rows.len() != target.len() {
        return Err(Error::DimensionMismatch {
            expected: rows.len(),
            got: target.len(),
        });
    }
    let cols = rows[0].len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::RaggedMatrix {
                row: i,
                got: row.len(),
                expected: cols,
            });
        }
    }
    if names.len() != cols {
        return Err(Error::DimensionMismatch {
            expected: cols,
            got: names.len(),
        });
    }
    Ok(cols)
}

fn ranges(rows: &[Vec<f64>], cols: usize) -> Vec<(f64, f64)> {
    let mut r = vec![(f64::INFINITY, f64::NEG_INFINITY); cols];
    for row in rows {
        for (range, &v) in r.iter_mut().zip(row) {
            range.0 = range.0.min(v);
            range.1 = range.1.max(v);
        }
    }
    r
}

/// Normalized per-feature difference; a constant feature contributes zero.
fn diff(range: (f64, f64), a: f64, b: f64) -> f64 {
    let (min, max) = range;
    if max > min {
        (a - b).abs() / (max - min)
    } else {
        0.0
    }
}

/// Manhattan distance over normalized features, the sum of per-feature
/// diffs.
fn sample_distance(ranges: &[(f64, f64)], a: &[f64], b: &[f64]) -> f64 {
    ranges
        .iter()
        .zip(a.iter().zip(b))
        .map(|(&range, (&x, &y))| diff(range, x, y))
        .sum()
}

/// Exponential distance-rank weights for ranks `1..=k`, normalized to sum
/// to one.
fn rank_weights(k: usize, sigma: f64) -> Vec<f64> {
    let raw: Vec<f64> = (1..=k)
        .map(|rank| (-((rank as f64 / sigma) * (rank as f64 / sigma))).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Compute RReliefF weights. Deterministic for a fixed seed; weights are in
/// input-feature order.
pub fn relief_weights(
    rows: &[Vec<f64>],
    names: &[String],
    target: &[f64],
    params: &ReliefParams,
) -> Result<FeatureWeights> {
    let cols = check_samples(rows, names, target)?;
    let n = rows.len();

    let feature_ranges = ranges(rows, cols);
    let (t_min, t_max) = target
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
            (lo.min(y), hi.max(y))
        });
    let degenerate = |flag| FeatureWeights {
        weights: names.iter().map(|n| (n.clone(), 0.0)).collect(),
        threshold: params.threshold,
        degenerate_target: flag,
    };
    if !(t_max > t_min) {
        return Ok(degenerate(true));
    }
    let t_range = (t_min, t_max);

    let anchors: Vec<usize> = match params.iterations {
        None => (0..n).collect(),
        Some(m) if m >= n => (0..n).collect(),
        Some(m) => {
            let mut rng = rng_from_seed(params.seed);
            sample_distinct(&mut rng, n, m)
        }
    };
    let k = params.neighbors.min(n - 1).max(1);
    let d_rank = rank_weights(k, params.sigma);

    let mut ndc = 0.0;
    let mut nda = vec![0.0; cols];
    let mut ndcda = vec![0.0; cols];
    for &anchor in &anchors {
        // Neighbors by ascending distance, ties broken by index.
        let mut order: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != anchor)
            .map(|j| (sample_distance(&feature_ranges, &rows[anchor], &rows[j]), j))
            .collect();
        order.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));

        for (rank, &(_, j)) in order.iter().take(k).enumerate() {
            let w = d_rank[rank];
            let dt = diff(t_range, target[anchor], target[j]);
            ndc += dt * w;
            for a in 0..cols {
                let da = diff(feature_ranges[a], rows[anchor][a], rows[j][a]);
                nda[a] += da * w;
                ndcda[a] += dt * da * w;
            }
        }
    }

    let m = anchors.len() as f64;
    if !(ndc > 0.0) || !(m - ndc > 0.0) {
        return Ok(degenerate(true));
    }
    let weights = names
        .iter()
        .enumerate()
        .map(|(a, name)| {
            (
                name.clone(),
                ndcda[a] / ndc - (nda[a] - ndcda[a]) / (m - ndc),
            )
        })
        .collect();
    Ok(FeatureWeights {
        weights,
        threshold: params.threshold,
        degenerate_target: false,
    })
}
