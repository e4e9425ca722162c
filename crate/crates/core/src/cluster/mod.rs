//! K-means clustering of variables.
//!
//! The standardized matrix is transposed so each variable becomes a point in
//! n-dimensional observation space, then partitioned with Lloyd's algorithm
//! ([`kmeans_variables`]). [`select_k`] scans a range of cluster counts and
//! [`kmeans_oracle`] finds the exact optimum by enumerating set partitions.

mod kmeans;
mod oracle;
mod select;

use std::io::Write;

use ndarray::{Array2, ArrayView1, Axis};
use serde::Serialize;

use crate::data::StandardizedMatrix;
use crate::error::Result;

pub use kmeans::{kmeans_plus_plus, kmeans_variables, lloyd, restart_rng, KMeansConfig, LloydRun};
pub use oracle::{kmeans_oracle, ORACLE_MAX_VARIABLES};
pub use select::{manual_k_report, mean_silhouette, select_k, KMethod, KSelectionReport};

/// `Z^T`: one row per variable, one column per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct TransposedMatrix {
    row_names: Vec<String>,
    values: Array2<f64>,
}

impl TransposedMatrix {
    pub fn new(row_names: Vec<String>, values: Array2<f64>) -> Self {
        assert_eq!(row_names.len(), values.nrows(), "one name per variable row");
        Self { row_names, values }
    }

    pub fn row_names(&self) -> &[String] {
        &self.row_names
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn n_variables(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_observations(&self) -> usize {
        self.values.ncols()
    }

    /// Transposes back to observations x variables.
    pub fn transpose(&self) -> Array2<f64> {
        self.values.t().to_owned()
    }
}

pub fn transpose(z: &StandardizedMatrix) -> TransposedMatrix {
    TransposedMatrix {
        row_names: z.col_names().to_vec(),
        values: z.values().t().as_standard_layout().into_owned(),
    }
}

/// A partition of the variables into `k` non-empty clusters.
///
/// Cluster ids run `1..=k` and are numbered by first appearance in variable
/// order, so the cluster holding the first variable is always cluster 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteringResult {
    pub k: usize,
    pub variables: Vec<String>,
    /// Cluster id of each variable, aligned with `variables`.
    pub labels: Vec<usize>,
    /// Member names of cluster `id` at index `id - 1`.
    pub clusters: Vec<Vec<String>>,
    /// k x n, row `id - 1` is the centroid of cluster `id`.
    #[serde(serialize_with = "serialize_rows")]
    pub centroids: Array2<f64>,
    pub wss: f64,
    pub wss_per_cluster: Vec<f64>,
    pub iterations: usize,
    pub seed: u64,
    pub restarts: usize,
    /// WSS after each assignment + update step of the winning run.
    pub wss_trace: Vec<f64>,
}

fn serialize_rows<S: serde::Serializer>(m: &Array2<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for row in m.rows() {
        seq.serialize_element(&row.to_vec())?;
    }
    seq.end()
}

pub(crate) struct RunMeta {
    pub iterations: usize,
    pub seed: u64,
    pub restarts: usize,
    pub wss_trace: Vec<f64>,
}

impl ClusteringResult {
    /// Builds a result from 0-based labels that use every id in `0..k`.
    pub(crate) fn from_labels(t: &TransposedMatrix, k: usize, raw: &[usize], meta: RunMeta) -> Self {
        let labels = canonical_labels(raw, k);
        let points = t.values();
        let n = t.n_observations();

        let mut centroids = Array2::<f64>::zeros((k, n));
        let mut counts = vec![0usize; k];
        for (j, &c) in labels.iter().enumerate() {
            let mut row = centroids.row_mut(c);
            row += &points.row(j);
            counts[c] += 1;
        }
        for (c, mut row) in centroids.axis_iter_mut(Axis(0)).enumerate() {
            row /= counts[c] as f64;
        }

        let mut wss_per_cluster = vec![0.0; k];
        for (j, &c) in labels.iter().enumerate() {
            wss_per_cluster[c] += squared_distance(points.row(j), centroids.row(c));
        }
        let wss = wss_per_cluster.iter().sum();

        let mut clusters = vec![Vec::new(); k];
        for (name, &c) in t.row_names().iter().zip(&labels) {
            clusters[c].push(name.clone());
        }

        Self {
            k,
            variables: t.row_names().to_vec(),
            labels: labels.iter().map(|c| c + 1).collect(),
            clusters,
            centroids,
            wss,
            wss_per_cluster,
            iterations: meta.iterations,
            seed: meta.seed,
            restarts: meta.restarts,
            wss_trace: meta.wss_trace,
        }
    }

    pub fn cluster_of(&self, variable: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == variable).map(|j| self.labels[j])
    }

    /// The partition as sorted member lists, sorted, for label-free comparison.
    pub fn partition(&self) -> Vec<Vec<String>> {
        let mut blocks: Vec<Vec<String>> = self
            .clusters
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.sort();
                c
            })
            .collect();
        blocks.sort();
        blocks
    }

    /// `variable,cluster` rows in variable order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["variable", "cluster"])?;
        for (name, id) in self.variables.iter().zip(&self.labels) {
            w.write_record([name.as_str(), &id.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Renumbers labels by order of first appearance.
fn canonical_labels(raw: &[usize], k: usize) -> Vec<usize> {
    let mut map = vec![usize::MAX; k];
    let mut next = 0;
    raw.iter()
        .map(|&c| {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
            map[c]
        })
        .collect()
}

pub(crate) fn squared_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}
