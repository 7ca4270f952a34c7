//! Independent oracles shared by the integration suites. These recompute
//! expected values with plain nested loops and no code shared with the
//! implementations they check.

#![allow(dead_code)]

use rand::Rng;
use windcast::bpnn::{loss, NeuralNet};
use windcast::seeding::rng_from_seed;

/// Exhaustive RReliefF oracle: every sample anchors, every other sample is
/// a neighbor ranked by normalized Manhattan distance with exponential
/// distance-rank weighting.
pub fn brute_force_rrelieff(rows: &[Vec<f64>], target: &[f64], sigma: f64) -> Vec<f64> {
    let n = rows.len();
    let f = rows[0].len();

    let mut fmin = vec![f64::INFINITY; f];
    let mut fmax = vec![f64::NEG_INFINITY; f];
    for row in rows {
        for a in 0..f {
            fmin[a] = fmin[a].min(row[a]);
            fmax[a] = fmax[a].max(row[a]);
        }
    }
    let (tmin, tmax) = target
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
            (lo.min(y), hi.max(y))
        });

    let fdiff = |a: usize, i: usize, j: usize| -> f64 {
        if fmax[a] > fmin[a] {
            (rows[i][a] - rows[j][a]).abs() / (fmax[a] - fmin[a])
        } else {
            0.0
        }
    };
    let tdiff = |i: usize, j: usize| -> f64 { (target[i] - target[j]).abs() / (tmax - tmin) };

    let k = n - 1;
    let mut rank_w: Vec<f64> = (1..=k)
        .map(|r| (-((r as f64 / sigma) * (r as f64 / sigma))).exp())
        .collect();
    let total: f64 = rank_w.iter().sum();
    for w in &mut rank_w {
        *w /= total;
    }

    let mut ndc = 0.0;
    let mut nda = vec![0.0; f];
    let mut ndcda = vec![0.0; f];
    for anchor in 0..n {
        let mut neighbors: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != anchor)
            .map(|j| ((0..f).map(|a| fdiff(a, anchor, j)).sum::<f64>(), j))
            .collect();
        neighbors.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (rank, &(_, j)) in neighbors.iter().enumerate() {
            let w = rank_w[rank];
            let dt = tdiff(anchor, j);
            ndc += dt * w;
            for a in 0..f {
                let da = fdiff(a, anchor, j);
                nda[a] += da * w;
                ndcda[a] += dt * da * w;
            }
        }
    }
    let m = n as f64;
    (0..f)
        .map(|a| ndcda[a] / ndc - (nda[a] - ndcda[a]) / (m - ndc))
        .collect()
}

/// Central finite difference of the batch loss with respect to one
/// parameter, selected by a mutator.
pub fn fd_gradient(
    net: &NeuralNet,
    inputs: &[Vec<f64>],
    targets: &[f64],
    h: f64,
    mutate: impl Fn(&mut NeuralNet, f64),
) -> f64 {
    let mut plus = net.clone();
    mutate(&mut plus, h);
    let mut minus = net.clone();
    mutate(&mut minus, -h);
    (loss(&plus, inputs, targets).unwrap() - loss(&minus, inputs, targets).unwrap()) / (2.0 * h)
}

/// Relative error with a floor that keeps near-zero gradients from
/// amplifying finite-difference noise.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs() + b.abs()).max(1e-6)
}

/// Four unit-square-corner Gaussian blobs, 50 points each, sigma 0.05
/// (5 % of the unit inter-center distance). Returns points and their
/// planted labels, center-major.
pub fn gaussian_blobs(seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let centers = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
    let sigma = 0.05;
    let mut rng = rng_from_seed(seed);
    let mut normal = move || -> f64 {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random::<f64>();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let mut points = Vec::with_capacity(200);
    let mut labels = Vec::with_capacity(200);
    for (label, center) in centers.iter().enumerate() {
        for _ in 0..50 {
            points.push(vec![
                center[0] + sigma * normal(),
                center[1] + sigma * normal(),
            ]);
            labels.push(label);
        }
    }
    (points, labels)
}

/// True when the clustering assignment equals the planted labels up to a
/// relabeling (a bijection between cluster ids and labels).
pub fn partition_matches(assignments: &[usize], labels: &[usize], k: usize) -> bool {
    let mut cluster_to_label = vec![None; k];
    let mut label_taken = vec![false; k];
    for (&c, &l) in assignments.iter().zip(labels) {
        match cluster_to_label[c] {
            None => {
                if label_taken[l] {
                    return false;
                }
                cluster_to_label[c] = Some(l);
                label_taken[l] = true;
            }
            Some(mapped) => {
                if mapped != l {
                    return false;
                }
            }
        }
    }
    true
}

/// Seeded batch for gradient checking: inputs uniform in [0, 1], targets
/// uniform in [0.1, 0.9].
pub fn gradient_batch(seed: u64, n: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = rng_from_seed(seed);
    let inputs = (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    let targets = (0..n).map(|_| 0.1 + 0.8 * rng.random::<f64>()).collect();
    (inputs, targets)
}
