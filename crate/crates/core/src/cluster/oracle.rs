use ndarray::Array2;

use super::{ClusteringResult, RunMeta, TransposedMatrix};
use crate::error::{Error, Result};

pub const ORACLE_MAX_VARIABLES: usize = 12;

/// Globally optimal K-means partition by exhaustive enumeration.
///
/// Walks every partition of the variables into exactly `k` non-empty blocks
/// as restricted growth strings. Refining a block never raises WSS, so this
/// optimum also covers partitions with fewer blocks. Block cost is evaluated
/// from the Gram matrix: `sum_j |z_j|^2 - |sum_j z_j|^2 / m`.
pub fn kmeans_oracle(t: &TransposedMatrix, k: usize) -> Result<ClusteringResult> {
    let p = t.n_variables();
    if p > ORACLE_MAX_VARIABLES {
        return Err(Error::TooLarge {
            p,
            max: ORACLE_MAX_VARIABLES,
        });
    }
    if k < 1 || k > p {
        return Err(Error::InvalidK { k, p });
    }

    let points = t.values();
    let gram: Array2<f64> = points.dot(&points.t());
    let mut search = Search {
        gram: &gram,
        k,
        labels: vec![0; p],
        best_labels: Vec::new(),
        best_wss: f64::INFINITY,
    };
    search.recurse(0, 0);

    let meta = RunMeta {
        iterations: 0,
        seed: 0,
        restarts: 0,
        wss_trace: Vec::new(),
    };
    Ok(ClusteringResult::from_labels(t, k, &search.best_labels, meta))
}

struct Search<'a> {
    gram: &'a Array2<f64>,
    k: usize,
    labels: Vec<usize>,
    best_labels: Vec<usize>,
    best_wss: f64,
}

impl Search<'_> {
    fn recurse(&mut self, index: usize, used: usize) {
        let p = self.labels.len();
        // Not enough variables left to open the remaining blocks.
        if p - index < self.k - used {
            return;
        }
        if index == p {
            let wss = self.cost();
            if wss < self.best_wss {
                self.best_wss = wss;
                self.best_labels = self.labels.clone();
            }
            return;
        }
        let limit = (used + 1).min(self.k);
        for block in 0..limit {
            self.labels[index] = block;
            self.recurse(index + 1, used.max(block + 1));
        }
    }

    fn cost(&self) -> f64 {
        let mut total = 0.0;
        for block in 0..self.k {
            let members: Vec<usize> = (0..self.labels.len()).filter(|&j| self.labels[j] == block).collect();
            let m = members.len() as f64;
            let mut diag = 0.0;
            let mut all = 0.0;
            for &a in &members {
                diag += self.gram[[a, a]];
                for &b in &members {
                    all += self.gram[[a, b]];
                }
            }
            total += diag - all / m;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("x{j}")).collect()
    }

    fn count_partitions(p: usize, k: usize) -> usize {
        fn walk(i: usize, used: usize, p: usize, k: usize) -> usize {
            if i == p {
                return usize::from(used == k);
            }
            (0..(used + 1).min(k)).map(|b| walk(i + 1, used.max(b + 1), p, k)).sum()
        }
        walk(0, 0, p, k)
    }

    #[test]
    fn enumerates_stirling_numbers() {
        // S(4,2) = 7, S(5,3) = 25, S(6,3) = 90.
        assert_eq!(count_partitions(4, 2), 7);
        assert_eq!(count_partitions(5, 3), 25);
        assert_eq!(count_partitions(6, 3), 90);
    }

    #[test]
    fn one_block_and_singletons() {
        let t = TransposedMatrix::new(names(3), array![[0.0, 0.0], [2.0, 0.0], [1.0, 3.0]]);
        let one = kmeans_oracle(&t, 1).unwrap();
        // Mean row (1, 1): distances 2 + 2 + 4.
        assert!((one.wss - 8.0).abs() < 1e-12);
        let all = kmeans_oracle(&t, 3).unwrap();
        assert_eq!(all.wss, 0.0);
    }

    #[test]
    fn two_separated_pairs() {
        let t = TransposedMatrix::new(names(4), array![[0.0], [1.0], [10.0], [11.0]]);
        let r = kmeans_oracle(&t, 2).unwrap();
        assert_eq!(r.labels, vec![1, 1, 2, 2]);
        assert!((r.wss - 1.0).abs() < 1e-12);
    }

    #[test]
    fn size_limits() {
        let t = TransposedMatrix::new(names(13), Array2::zeros((13, 2)));
        assert!(matches!(kmeans_oracle(&t, 2), Err(Error::TooLarge { p: 13, .. })));
        let t = TransposedMatrix::new(names(3), Array2::zeros((3, 2)));
        assert!(matches!(kmeans_oracle(&t, 4), Err(Error::InvalidK { .. })));
    }
}
