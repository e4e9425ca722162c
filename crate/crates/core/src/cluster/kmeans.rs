use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{squared_distance, ClusteringResult, RunMeta, TransposedMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
}

impl KMeansConfig {
    pub const DEFAULT_SEED: u64 = 42;
    pub const DEFAULT_RESTARTS: usize = 50;
    pub const DEFAULT_MAX_ITERS: usize = 300;

    pub fn new(k: usize) -> Self {
        Self {
            k,
            seed: Self::DEFAULT_SEED,
            restarts: Self::DEFAULT_RESTARTS,
            max_iters: Self::DEFAULT_MAX_ITERS,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }
}

/// Outcome of a single Lloyd run. Labels are 0-based.
#[derive(Debug, Clone)]
pub struct LloydRun {
    pub labels: Vec<usize>,
    pub wss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

/// Generator for restart `restart`: the master seed with the restart index as
/// stream id, so every restart is reproducible on its own.
pub fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// k-means++ seeding: first center uniform, then proportional to squared
/// distance from the nearest chosen center.
pub fn kmeans_plus_plus<R: Rng + ?Sized>(points: &Array2<f64>, k: usize, rng: &mut R) -> Array2<f64> {
    let p = points.nrows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..p));
    let mut nearest: Vec<f64> = (0..p).map(|j| squared_distance(points.row(j), points.row(chosen[0]))).collect();

    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (j, &d) in nearest.iter().enumerate() {
                if d > 0.0 {
                    acc += d;
                    pick = Some(j);
                    if acc > target {
                        break;
                    }
                }
            }
            pick.expect("positive total implies a positive weight")
        } else {
            // Every point coincides with a center; fall back to an unused index.
            let unused: Vec<usize> = (0..p).filter(|j| !chosen.contains(j)).collect();
            unused[rng.random_range(0..unused.len())]
        };
        chosen.push(next);
        for (j, d) in nearest.iter_mut().enumerate() {
            *d = d.min(squared_distance(points.row(j), points.row(next)));
        }
    }

    let mut centers = Array2::zeros((k, points.ncols()));
    for (c, &j) in chosen.iter().enumerate() {
        centers.row_mut(c).assign(&points.row(j));
    }
    centers
}

fn assign(points: &Array2<f64>, centers: &Array2<f64>, labels: &mut [usize], dist: &mut [f64]) {
    for (j, point) in points.axis_iter(Axis(0)).enumerate() {
        let mut best = (0, f64::INFINITY);
        for (c, center) in centers.axis_iter(Axis(0)).enumerate() {
            let d = squared_distance(point, center);
            if d < best.1 {
                best = (c, d);
            }
        }
        labels[j] = best.0;
        dist[j] = best.1;
    }
}

/// Refills empty clusters: the point farthest from its own center (taken from
/// a cluster with at least two members) moves into the empty cluster, which is
/// re-seeded at that point.
fn repair_empty(points: &Array2<f64>, centers: &mut Array2<f64>, labels: &mut [usize], dist: &mut [f64]) {
    let k = centers.nrows();
    let mut counts = vec![0usize; k];
    for &c in labels.iter() {
        counts[c] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let donor = (0..labels.len())
            .filter(|&j| counts[labels[j]] > 1)
            .fold(None, |best: Option<usize>, j| match best {
                Some(b) if dist[b] >= dist[j] => Some(b),
                _ => Some(j),
            })
            .expect("k <= p leaves a cluster with two members");
        counts[labels[donor]] -= 1;
        counts[empty] = 1;
        labels[donor] = empty;
        dist[donor] = 0.0;
        centers.row_mut(empty).assign(&points.row(donor));
    }
}

fn update(points: &Array2<f64>, labels: &[usize], centers: &mut Array2<f64>) {
    let k = centers.nrows();
    centers.fill(0.0);
    let mut counts = vec![0usize; k];
    for (j, &c) in labels.iter().enumerate() {
        let mut row = centers.row_mut(c);
        row += &points.row(j);
        counts[c] += 1;
    }
    for (c, mut row) in centers.axis_iter_mut(Axis(0)).enumerate() {
        row /= counts[c] as f64;
    }
}

fn total_wss(points: &Array2<f64>, labels: &[usize], centers: &Array2<f64>) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(j, &c)| squared_distance(points.row(j), centers.row(c)))
        .sum()
}

/// Lloyd iterations from k-means++ seeds drawn from `rng`.
///
/// Stops when the assignment no longer changes or after `max_iters` rounds.
/// Requires `1 <= k <= points.nrows()`.
pub fn lloyd<R: Rng + ?Sized>(points: &Array2<f64>, k: usize, max_iters: usize, rng: &mut R) -> LloydRun {
    let p = points.nrows();
    let mut centers = kmeans_plus_plus(points, k, rng);
    let mut labels = vec![usize::MAX; p];
    let mut next = vec![0; p];
    let mut dist = vec![0.0; p];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iters {
        iterations += 1;
        assign(points, &centers, &mut next, &mut dist);
        repair_empty(points, &mut centers, &mut next, &mut dist);
        update(points, &next, &mut centers);
        trace.push(total_wss(points, &next, &centers));
        if next == labels {
            converged = true;
            break;
        }
        labels.copy_from_slice(&next);
    }

    LloydRun {
        wss: *trace.last().expect("at least one iteration"),
        labels: next,
        iterations,
        converged,
        trace,
    }
}

/// Best-of-restarts K-means on the variable rows of `t`.
///
/// Restarts run in parallel; the winner is the lowest WSS, ties going to the
/// lowest restart index, so the result matches a sequential run exactly.
pub fn kmeans_variables(t: &TransposedMatrix, config: &KMeansConfig) -> Result<ClusteringResult> {
    let p = t.n_variables();
    let k = config.k;
    if k < 1 || k > p {
        return Err(Error::InvalidK { k, p });
    }
    if config.restarts < 1 {
        return Err(Error::Config("restarts must be at least 1".into()));
    }
    if config.max_iters < 1 {
        return Err(Error::Config("max_iters must be at least 1".into()));
    }

    let points = t.values();
    let runs: Vec<LloydRun> = (0..config.restarts)
        .into_par_iter()
        .map(|r| lloyd(points, k, config.max_iters, &mut restart_rng(config.seed, r)))
        .collect();
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.wss.total_cmp(&b.wss).then(ia.cmp(ib)))
        .map(|(_, run)| run)
        .expect("restarts >= 1");

    let meta = RunMeta {
        iterations: best.iterations,
        seed: config.seed,
        restarts: config.restarts,
        wss_trace: best.trace,
    };
    Ok(ClusteringResult::from_labels(t, k, &best.labels, meta))
}
