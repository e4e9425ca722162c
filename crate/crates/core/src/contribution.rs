//! Cluster-to-component contribution scores.
//!
//! For cluster `k` and component `j`, `S[k][j]` is the sum of the absolute
//! loadings of the cluster's variables on component `j`, and `P[k][j]` is
//! that sum divided by the column total over all clusters. Columns of `P`
//! sum to one.

use std::io::Write;

use ndarray::Array2;
use serde::Serialize;

use crate::cluster::ClusteringResult;
use crate::error::{Error, Result};
use crate::pca::{abs_loadings, PcaResult};

const DEGENERATE_TOL: f64 = 1e-12;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContributionReport {
    pub cluster_ids: Vec<usize>,
    /// Members of each cluster, aligned with `cluster_ids`.
    pub members: Vec<Vec<String>>,
    pub component_ids: Vec<String>,
    /// K x p, `S[k][j]`.
    pub s_matrix: Vec<Vec<f64>>,
    /// K x p, `P[k][j]`.
    pub p_matrix: Vec<Vec<f64>>,
    pub explained_ratio: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dominance {
    pub cluster_id: usize,
    pub share: f64,
    /// Another cluster has the same share; the lowest id was chosen.
    pub tie: bool,
}

/// Computes `S` from a PCA and a clustering of the same variables.
pub fn cluster_contributions(pca: &PcaResult, clustering: &ClusteringResult) -> Result<ContributionReport> {
    if pca.variables() != clustering.variables.as_slice() {
        return Err(Error::VariableSetMismatch);
    }
    let abs = abs_loadings(pca);
    let labels: Vec<usize> = clustering.labels.iter().map(|id| id - 1).collect();
    let s = contribution_matrix(&abs, &labels, clustering.k);
    let proportions = proportion_matrix(&s)?;

    Ok(ContributionReport {
        cluster_ids: (1..=clustering.k).collect(),
        members: clustering.clusters.clone(),
        component_ids: pca.component_names(),
        s_matrix: rows(&s),
        p_matrix: rows(&proportions),
        explained_ratio: pca.explained_ratio().to_vec(),
    })
}

/// `S[k][j] = sum over variables i in cluster k of |l_ij|`, labels 0-based.
pub fn contribution_matrix(abs_loadings: &Array2<f64>, labels: &[usize], k: usize) -> Array2<f64> {
    let mut s = Array2::zeros((k, abs_loadings.ncols()));
    for (i, &c) in labels.iter().enumerate() {
        let mut row = s.row_mut(c);
        row += &abs_loadings.row(i);
    }
    s
}

/// Normalizes each column of `s` to sum to one.
pub fn proportion_matrix(s: &Array2<f64>) -> Result<Array2<f64>> {
    let mut out = s.clone();
    for (j, mut col) in out.columns_mut().into_iter().enumerate() {
        let total = col.sum();
        if total < DEGENERATE_TOL {
            return Err(Error::DegenerateComponent(j + 1));
        }
        col /= total;
    }
    Ok(out)
}

fn rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Cluster with the largest share of component `component` (1-based).
pub fn dominant_cluster(report: &ContributionReport, component: usize) -> Result<Dominance> {
    let len = report.component_ids.len();
    if component == 0 || component > len {
        return Err(Error::IndexOutOfRange { index: component, len });
    }
    let j = component - 1;
    let mut best = 0;
    for k in 1..report.cluster_ids.len() {
        if report.p_matrix[k][j] > report.p_matrix[best][j] + TIE_TOL {
            best = k;
        }
    }
    let share = report.p_matrix[best][j];
    let tie = (0..report.cluster_ids.len()).any(|k| k != best && (report.p_matrix[k][j] - share).abs() <= TIE_TOL);
    Ok(Dominance {
        cluster_id: report.cluster_ids[best],
        share,
        tie,
    })
}

impl ContributionReport {
    pub fn write_s_csv<W: Write>(&self, out: W) -> Result<()> {
        self.write_matrix_csv(out, &self.s_matrix)
    }

    pub fn write_p_csv<W: Write>(&self, out: W) -> Result<()> {
        self.write_matrix_csv(out, &self.p_matrix)
    }

    /// `cluster,members,PC1..PCp`, members separated by `;`.
    fn write_matrix_csv<W: Write>(&self, out: W, matrix: &[Vec<f64>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["cluster".to_owned(), "members".to_owned()];
        header.extend(self.component_ids.iter().cloned());
        w.write_record(&header)?;
        for ((id, members), row) in self.cluster_ids.iter().zip(&self.members).zip(matrix) {
            let mut record = vec![id.to_string(), members.join(";")];
            record.extend(row.iter().map(|v| format!("{v:.6}")));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Plain-text table at 3 decimals.
    pub fn format_table(&self, matrix: &[Vec<f64>]) -> String {
        let mut out = format!("{:<8}", "cluster");
        for c in &self.component_ids {
            out.push_str(&format!("{c:>8}"));
        }
        out.push_str("  members\n");
        for ((id, members), row) in self.cluster_ids.iter().zip(&self.members).zip(matrix) {
            out.push_str(&format!("{id:<8}"));
            for v in row {
                out.push_str(&format!("{v:>8.3}"));
            }
            out.push_str(&format!("  {}\n", members.join(", ")));
        }
        out
    }
}
