//! Similar-day selection: K-means over day signatures, Pearson similarity
//! to centroids, and intersection of the two chosen clusters.

use crate::dataset::DayUnit;
use crate::error::{Error, Result};
use crate::kv::KvWriter;
use crate::preprocess::{apply_norm, fit_norm};
use crate::seeding::{derive_seed, rng_from_seed, sample_distinct};

/// Lloyd-iteration options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOpts {
    pub max_iter: usize,
    /// Secondary early-out on maximum centroid movement; the primary stop
    /// is assignment stability, which also guarantees the centroid-mean
    /// identity on return.
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for KMeansOpts {
    fn default() -> Self {
        Self {
            max_iter: 300,
            tol: 0.0,
            restarts: 10,
            seed: 0,
        }
    }
}

/// A converged clustering run.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    /// `assignments[i]` is the cluster of input point `i`.
    pub assignments: Vec<usize>,
    pub iterations_run: usize,
    pub inertia: f64,
    pub seed: u64,
}

impl KMeansModel {
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == cluster)
            .map(|(i, _)| i)
            .collect()
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest_centroid(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = squared_distance(point, &centroids[0]);
    for (c, centroid) in centroids.iter().enumerate().skip(1) {
        let d = squared_distance(point, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

/// K-means with seeded random initial centers, restart selection by lowest
/// inertia (ties broken by lowest restart index), and empty-cluster
/// reseeding at the point farthest from its assigned centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, opts: &KMeansOpts) -> Result<KMeansModel> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if k == 0 || k > points.len() {
        return Err(Error::BadClusterCount {
            k,
            points: points.len(),
        });
    }
    let dim = points[0].len();
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::RaggedMatrix {
                row: i,
                got: p.len(),
                expected: dim,
            });
        }
    }

    let restarts = opts.restarts.max(1);
    let mut best: Option<KMeansModel> = None;
    for restart in 0..restarts {
        let seed = derive_seed(opts.seed, restart as u64);
        let model = lloyd_run(points, k, opts, seed)?;
        let better = match &best {
            None => true,
            Some(b) => model.inertia < b.inertia,
        };
        if better {
            best = Some(model);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

fn lloyd_run(points: &[Vec<f64>], k: usize, opts: &KMeansOpts, seed: u64) -> Result<KMeansModel> {
    let mut rng = rng_from_seed(seed);
    let mut centroids: Vec<Vec<f64>> = sample_distinct(&mut rng, points.len(), k)
        .into_iter()
        .map(|i| points[i].clone())
        .collect();

    let mut assignments: Vec<usize> = points
        .iter()
        .map(|p| nearest_centroid(p, &centroids))
        .collect();
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let next_centroids = update_centroids(points, &assignments, &centroids, k);
        let movement = centroids
            .iter()
            .zip(&next_centroids)
            .map(|(a, b)| squared_distance(a, b).sqrt())
            .fold(0.0_f64, f64::max);
        let next_assignments: Vec<usize> = points
            .iter()
            .map(|p| nearest_centroid(p, &next_centroids))
            .collect();
        let stable = next_assignments == assignments;
        centroids = next_centroids;
        assignments = next_assignments;
        if stable || movement < opts.tol {
            break;
        }
    }

    let inertia = points
        .iter()
        .zip(&assignments)
        .map(|(p, &c)| squared_distance(p, &centroids[c]))
        .sum();
    Ok(KMeansModel {
        k,
        centroids,
        assignments,
        iterations_run: iterations,
        inertia,
        seed,
    })
}

/// Means of assigned points; an empty cluster is reseeded at the point
/// farthest from its currently assigned centroid.
fn update_centroids(
    points: &[Vec<f64>],
    assignments: &[usize],
    current: &[Vec<f64>],
    k: usize,
) -> Vec<Vec<f64>> {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(assignments) {
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(p) {
            *s += v;
        }
    }
    let mut next: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut taken: Vec<usize> = Vec::new();
    for c in 0..k {
        if counts[c] == 0 {
            let far = farthest_point(points, assignments, current, &taken);
            taken.push(far);
            next.push(points[far].clone());
        } else {
            next.push(sums[c].iter().map(|s| s / counts[c] as f64).collect());
        }
    }
    next
}

fn farthest_point(
    points: &[Vec<f64>],
    assignments: &[usize],
    centroids: &[Vec<f64>],
    taken: &[usize],
) -> usize {
    let mut best = 0;
    let mut best_d = f64::NEG_INFINITY;
    for (i, p) in points.iter().enumerate() {
        if taken.contains(&i) {
            continue;
        }
        let d = squared_distance(p, &centroids[assignments[i]]);
        if d > best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Pearson correlation coefficient,
/// `(E[XY] - E[X]E[Y]) / (sigma_X sigma_Y)` over population moments.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::PearsonLength);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::ConstantVector);
    }
    Ok(cov / (vx.sqrt() * vy.sqrt()))
}

/// Options for [`select_training_days`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarDayOpts {
    /// Cluster count for both signature spaces.
    pub k: usize,
    pub kmeans: KMeansOpts,
    /// Smallest acceptable training set; a thinner intersection triggers
    /// the ranked-union fallback.
    pub min_days: usize,
}

impl Default for SimilarDayOpts {
    fn default() -> Self {
        Self {
            k: 3,
            kmeans: KMeansOpts::default(),
            min_days: 5,
        }
    }
}

/// The chosen clusters and the resulting training-day set.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarDaySelection {
    pub cluster1_id: usize,
    pub cluster2_id: usize,
    /// Correlation between the reference signature and the chosen centroid;
    /// `None` when the correlation was undefined (constant vector) and the
    /// cluster was chosen by distance instead.
    pub pearson1: Option<f64>,
    pub pearson2: Option<f64>,
    /// Day indices, ascending.
    pub training_days: Vec<usize>,
    pub fallback_used: bool,
}

impl SimilarDaySelection {
    pub fn to_kv_string(&self) -> String {
        let mut w = KvWriter::new();
        w.pair("selection.cluster1_id", self.cluster1_id);
        w.pair("selection.cluster2_id", self.cluster2_id);
        w.pair(
            "selection.pearson1",
            self.pearson1
                .map_or("undefined".to_string(), |p| p.to_string()),
        );
        w.pair(
            "selection.pearson2",
            self.pearson2
                .map_or("undefined".to_string(), |p| p.to_string()),
        );
        w.pair("selection.fallback_used", self.fallback_used);
        w.pair("selection.training_day_count", self.training_days.len());
        w.list("selection.training_days", &self.training_days);
        w.finish()
    }
}

/// Cluster the historical days by S1 and S2 independently, pick the cluster
/// of each space most similar to the reference day by Pearson correlation
/// against the centroid, and intersect the two member sets. If the
/// intersection is thinner than `min_days`, fall back to the union ranked
/// by per-day similarity, truncated to `min_days`.
pub fn select_training_days(
    days: &[DayUnit],
    forecast_ref: &DayUnit,
    opts: &SimilarDayOpts,
) -> Result<SimilarDaySelection> {
    if days.len() < opts.k {
        return Err(Error::BadClusterCount {
            k: opts.k,
            points: days.len(),
        });
    }

    let s1_rows: Vec<Vec<f64>> = days.iter().map(|d| d.s1.to_vec()).collect();
    let s2_rows: Vec<Vec<f64>> = days.iter().map(|d| d.s2.to_vec()).collect();
    let s1_stats = fit_norm(&s1_rows)?;
    let s2_stats = fit_norm(&s2_rows)?;
    let s1_norm = apply_norm(&s1_stats, &s1_rows)?;
    let s2_norm = apply_norm(&s2_stats, &s2_rows)?;
    let ref1 = apply_norm(&s1_stats, &[forecast_ref.s1.to_vec()])?.remove(0);
    let ref2 = apply_norm(&s2_stats, &[forecast_ref.s2.to_vec()])?.remove(0);

    let mut opts1 = opts.kmeans;
    opts1.seed = derive_seed(opts.kmeans.seed, 1);
    let mut opts2 = opts.kmeans;
    opts2.seed = derive_seed(opts.kmeans.seed, 2);
    let model1 = kmeans(&s1_norm, opts.k, &opts1)?;
    let model2 = kmeans(&s2_norm, opts.k, &opts2)?;

    let (cluster1_id, pearson1) = pick_cluster(&model1, &ref1);
    let (cluster2_id, pearson2) = pick_cluster(&model2, &ref2);

    let members1 = model1.members(cluster1_id);
    let members2 = model2.members(cluster2_id);
    let intersection: Vec<usize> = members1
        .iter()
        .copied()
        .filter(|i| members2.contains(i))
        .collect();

    if intersection.len() >= opts.min_days {
        return Ok(SimilarDaySelection {
            cluster1_id,
            cluster2_id,
            pearson1,
            pearson2,
            training_days: intersection,
            fallback_used: false,
        });
    }

    // Ranked-union fallback over the concatenated normalized signature.
    let ref_cat: Vec<f64> = ref1.iter().chain(ref2.iter()).copied().collect();
    let mut union: Vec<usize> = members1;
    for i in members2 {
        if !union.contains(&i) {
            union.push(i);
        }
    }
    let mut ranked: Vec<(usize, f64, f64)> = union
        .into_iter()
        .map(|i| {
            let cat: Vec<f64> = s1_norm[i]
                .iter()
                .chain(s2_norm[i].iter())
                .copied()
                .collect();
            let corr = pearson(&ref_cat, &cat).unwrap_or(f64::NEG_INFINITY);
            let dist = squared_distance(&ref_cat, &cat);
            (i, corr, dist)
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.2.partial_cmp(&b.2).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.0.cmp(&b.0))
    });
    ranked.truncate(opts.min_days);
    let mut training_days: Vec<usize> = ranked.into_iter().map(|(i, _, _)| i).collect();
    training_days.sort_unstable();

    Ok(SimilarDaySelection {
        cluster1_id,
        cluster2_id,
        pearson1,
        pearson2,
        training_days,
        fallback_used: true,
    })
}

/// Most similar non-empty cluster: highest Pearson correlation between the
/// reference signature and the centroid; clusters whose correlation is
/// undefined rank below any defined one and among themselves by centroid
/// distance.
fn pick_cluster(model: &KMeansModel, reference: &[f64]) -> (usize, Option<f64>) {
    let mut best: Option<(usize, Option<f64>, f64)> = None;
    for c in 0..model.k {
        if !model.assignments.contains(&c) {
            continue;
        }
        let corr = pearson(reference, &model.centroids[c]).ok();
        let dist = squared_distance(reference, &model.centroids[c]);
        let better = match &best {
            None => true,
            Some((_, best_corr, best_dist)) => match (corr, best_corr) {
                (Some(a), Some(b)) => a > *b,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => dist < *best_dist,
            },
        };
        if better {
            best = Some((c, corr, dist));
        }
    }
    let (id, corr, _) = best.expect("at least one non-empty cluster");
    (id, corr)
}
