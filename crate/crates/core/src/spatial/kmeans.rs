//! Seeded k-means++ / Lloyd clustering on planar points.
//!
//! Assignment runs in parallel on the current rayon pool; centroid sums are
//! accumulated sequentially in point order, so the result does not depend on
//! the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

pub const DEFAULT_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    /// Cluster index per input point.
    pub assignments: Vec<usize>,
    pub centroids: Vec<Point>,
    /// Sum of squared distances after each Lloyd update, in iteration order.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn dist2(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Nearest centroid; ties go to the lowest index.
fn nearest(p: &Point, centroids: &[Point]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let d = dist2(p, c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

fn objective(points: &[Point], assignments: &[usize], centroids: &[Point]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| dist2(p, &centroids[a]))
        .sum()
}

fn kmeans_plus_plus(points: &[Point], k: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let n = points.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..n)]);
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // Rounding can leave `target` just past the final partial sum.
            chosen.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick];
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(dist2(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn update_centroids(points: &[Point], assignments: &[usize], k: usize) -> (Vec<Point>, Vec<usize>) {
    let mut sums = vec![[0.0f64; 2]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        sums[a][0] += p[0];
        sums[a][1] += p[1];
        counts[a] += 1;
    }
    let centroids = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| {
            if c == 0 {
                [f64::NAN, f64::NAN]
            } else {
                [s[0] / c as f64, s[1] / c as f64]
            }
        })
        .collect();
    (centroids, counts)
}

/// Moves, for each empty cluster, the point farthest from its own centroid
/// into that cluster. Only clusters with at least two members donate.
fn repair_empty(
    points: &[Point],
    assignments: &mut [usize],
    centroids: &mut [Point],
    counts: &mut [usize],
) {
    let k = centroids.len();
    for empty in 0..k {
        if counts[empty] != 0 {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            let a = assignments[i];
            if counts[a] < 2 {
                continue;
            }
            let d = dist2(p, &centroids[a]);
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        let (i, _) = best.expect("at least k points guarantee a donor cluster");
        let donor = assignments[i];
        assignments[i] = empty;
        counts[donor] -= 1;
        counts[empty] = 1;
        centroids[empty] = points[i];
        let (mut sx, mut sy) = (0.0, 0.0);
        for (p, &a) in points.iter().zip(assignments.iter()) {
            if a == donor {
                sx += p[0];
                sy += p[1];
            }
        }
        let c = counts[donor] as f64;
        centroids[donor] = [sx / c, sy / c];
    }
}

/// Clusters `points` into `k` groups.
pub fn kmeans(points: &[Point], k: usize, seed: u64) -> Result<KMeansResult> {
    kmeans_with_limit(points, k, seed, DEFAULT_MAX_ITERATIONS)
}

pub fn kmeans_with_limit(
    points: &[Point],
    k: usize,
    seed: u64,
    max_iterations: usize,
) -> Result<KMeansResult> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if points.len() < k {
        return Err(Error::InvalidArgument(format!(
            "cannot form {k} clusters from {} points",
            points.len()
        )));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite point coordinate".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_plus_plus(points, k, &mut rng);
    let mut assignments: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iterations {
        let next: Vec<usize> = points.par_iter().map(|p| nearest(p, &centroids)).collect();
        if next == assignments {
            converged = true;
            break;
        }
        assignments = next;
        iterations += 1;
        let (mut c, mut counts) = update_centroids(points, &assignments, k);
        repair_empty(points, &mut assignments, &mut c, &mut counts);
        centroids = c;
        history.push(objective(points, &assignments, &centroids));
    }

    Ok(KMeansResult {
        assignments,
        centroids,
        objective_history: history,
        iterations,
        converged,
    })
}
