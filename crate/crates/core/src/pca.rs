//! Correlation PCA of a standardized matrix.

use std::cmp::Ordering;
use std::io::Write;

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::data::StandardizedMatrix;
use crate::eigen::{jacobi_eigen, DEFAULT_MAX_SWEEPS, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};

/// Eigenvalues closer than this are treated as a tie when ordering components.
const EIGEN_TIE_TOL: f64 = 1e-12;
const SIGN_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct PcaResult {
    variables: Vec<String>,
    /// p x p, column k is component k.
    loadings: Array2<f64>,
    eigenvalues: Vec<f64>,
    explained_ratio: Vec<f64>,
    /// n x p, `Y = Z L`.
    scores: Array2<f64>,
}

impl PcaResult {
    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn loadings(&self) -> &Array2<f64> {
        &self.loadings
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn explained_ratio(&self) -> &[f64] {
        &self.explained_ratio
    }

    pub fn scores(&self) -> &Array2<f64> {
        &self.scores
    }

    pub fn n_components(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn component_names(&self) -> Vec<String> {
        component_names(self.n_components())
    }

    /// Assembles a result from externally computed loadings, applying the same
    /// ordering and sign normalization as [`fit_pca`]. Scores are computed from `z`.
    pub fn from_parts(z: &StandardizedMatrix, loadings: Array2<f64>, eigenvalues: Vec<f64>) -> Result<Self> {
        let p = z.n_cols();
        if loadings.dim() != (p, p) {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: loadings.ncols(),
            });
        }
        if eigenvalues.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: eigenvalues.len(),
            });
        }
        Ok(assemble(z, loadings, eigenvalues))
    }

    /// Loadings as CSV: one row per variable, columns `PC1..PCp`, 6 decimals.
    pub fn write_loadings_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["variable".to_owned()];
        header.extend(self.component_names());
        w.write_record(&header)?;
        for (name, row) in self.variables.iter().zip(self.loadings.rows()) {
            let mut record = vec![name.clone()];
            record.extend(row.iter().map(|v| format!("{v:.6}")));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_eigenvalues_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["component", "eigenvalue", "explained_ratio", "explained_pct"])?;
        for (k, name) in self.component_names().into_iter().enumerate() {
            w.write_record([
                name,
                format!("{:.6}", self.eigenvalues[k]),
                format!("{:.6}", self.explained_ratio[k]),
                format!("{:.6}", 100.0 * self.explained_ratio[k]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `{loadings, eigenvalues, explained_ratio}` at full precision.
    pub fn to_json(&self) -> PcaJson {
        PcaJson {
            variables: self.variables.clone(),
            components: self.component_names(),
            loadings: self.loadings.rows().into_iter().map(|r| r.to_vec()).collect(),
            eigenvalues: self.eigenvalues.clone(),
            explained_ratio: self.explained_ratio.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PcaJson {
    pub variables: Vec<String>,
    pub components: Vec<String>,
    /// Row-major, one row per variable.
    pub loadings: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub explained_ratio: Vec<f64>,
}

pub fn component_names(p: usize) -> Vec<String> {
    (1..=p).map(|k| format!("PC{k}")).collect()
}

/// Sample correlation matrix `Z^T Z / (n - 1)` of standardized data.
pub fn correlation_matrix(z: &StandardizedMatrix) -> Array2<f64> {
    let values = z.values();
    let n = values.nrows() as f64;
    values.t().dot(values) / (n - 1.0)
}

/// Eigen-decomposes the correlation matrix of `z`.
///
/// All p components are kept, ordered by descending eigenvalue. Each loading
/// column is signed so its largest-magnitude entry is positive. Columns of
/// (numerically) equal eigenvalues are ordered by comparing their entries;
/// only the spanned subspace is well defined in that case.
pub fn fit_pca(z: &StandardizedMatrix) -> Result<PcaResult> {
    let r = correlation_matrix(z);
    let eig = jacobi_eigen(&r, DEFAULT_TOLERANCE, DEFAULT_MAX_SWEEPS)?;
    Ok(assemble(z, eig.vectors, eig.values))
}

fn assemble(z: &StandardizedMatrix, vectors: Array2<f64>, values: Vec<f64>) -> PcaResult {
    let p = values.len();
    let mut columns: Vec<(f64, Vec<f64>)> = (0..p)
        .map(|k| {
            let mut col = vectors.column(k).to_vec();
            normalize_sign(&mut col);
            (values[k].max(0.0), col)
        })
        .collect();

    columns.sort_by(|a, b| b.0.total_cmp(&a.0));
    // Reorder runs of tied eigenvalues by their (sign-normalized) entries.
    let mut start = 0;
    while start < p {
        let mut end = start + 1;
        while end < p && (columns[end - 1].0 - columns[end].0).abs() <= EIGEN_TIE_TOL {
            end += 1;
        }
        columns[start..end].sort_by(|a, b| compare_desc(&a.1, &b.1));
        start = end;
    }

    let mut loadings = Array2::zeros((p, p));
    for (k, (_, col)) in columns.iter().enumerate() {
        loadings.column_mut(k).assign(&Array1::from(col.clone()));
    }
    let eigenvalues: Vec<f64> = columns.iter().map(|c| c.0).collect();
    let total: f64 = eigenvalues.iter().sum();
    let explained_ratio = eigenvalues.iter().map(|v| v / total).collect();
    let scores = z.values().dot(&loadings);

    PcaResult {
        variables: z.col_names().to_vec(),
        loadings,
        eigenvalues,
        explained_ratio,
        scores,
    }
}

/// Flips `col` so its largest-magnitude entry (first one, on ties) is positive.
fn normalize_sign(col: &mut [f64]) {
    let max_abs = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if let Some(pivot) = col.iter().find(|v| v.abs() >= max_abs - SIGN_TIE_TOL) {
        if *pivot < 0.0 {
            col.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

fn compare_desc(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > SIGN_TIE_TOL {
            return y.total_cmp(x);
        }
    }
    Ordering::Equal
}

/// Entrywise `|l_jk|`.
pub fn abs_loadings(pca: &PcaResult) -> Array2<f64> {
    pca.loadings().mapv(f64::abs)
}

/// Percentage of total variance captured by component `k` (1-based).
pub fn explained_variance_pct(pca: &PcaResult, k: usize) -> Result<f64> {
    let len = pca.n_components();
    if k == 0 || k > len {
        return Err(Error::IndexOutOfRange { index: k, len });
    }
    Ok(100.0 * pca.explained_ratio()[k - 1])
}
