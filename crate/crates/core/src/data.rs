//! Tabular ingestion, column statistics and z-score standardization.
//!
//! A [`DataTable`] holds the raw observations (rows) by variables (columns).
//! [`column_stats`] computes per-variable means and sample standard
//! deviations (n - 1 denominator) and [`standardize`] turns the table into a
//! [`StandardizedMatrix`] whose columns have mean 0 and standard deviation 1.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO_VARIANCE_TOL: f64 = 1e-12;
const MISSING_TOKENS: &[&str] = &["", "NA", "NaN", "nan", "N/A", "null", "NULL"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NaPolicy {
    /// Any missing cell is a parse error.
    #[default]
    Strict,
    /// Rows containing a missing cell are removed.
    DropRows,
}

impl FromStr for NaPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(NaPolicy::Strict),
            "drop-rows" | "drop_rows" => Ok(NaPolicy::DropRows),
            other => Err(Error::Config(format!("unknown NA policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    /// Column 0 holds row labels rather than a variable.
    pub row_names: bool,
    pub na_policy: NaPolicy,
    /// Keep only these variables, in this order. `None` keeps every column.
    pub columns: Option<Vec<String>>,
}

/// Raw input: `n` named observations by `p` named variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    row_names: Vec<String>,
    col_names: Vec<String>,
    values: Array2<f64>,
}

impl DataTable {
    pub fn new(row_names: Vec<String>, col_names: Vec<String>, values: Array2<f64>) -> Result<Self> {
        let (n, p) = values.dim();
        if row_names.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: row_names.len(),
            });
        }
        if col_names.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: col_names.len(),
            });
        }
        if n < 2 || p < 2 {
            return Err(Error::EmptyDataset { rows: n, cols: p });
        }
        ensure_unique("row", &row_names)?;
        ensure_unique("column", &col_names)?;
        for ((i, j), v) in values.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: i + 2,
                    column: col_names[j].clone(),
                    value: v.to_string(),
                });
            }
        }
        Ok(Self {
            row_names,
            col_names,
            values,
        })
    }

    /// Builds a table with rows labelled `1..=n`.
    pub fn from_matrix(col_names: Vec<String>, values: Array2<f64>) -> Result<Self> {
        let row_names = (1..=values.nrows()).map(|i| i.to_string()).collect();
        Self::new(row_names, col_names, values)
    }

    pub fn row_names(&self) -> &[String] {
        &self.row_names
    }

    pub fn col_names(&self) -> &[String] {
        &self.col_names
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }
}

fn ensure_unique(kind: &'static str, names: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(names.len());
    for name in names {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateName { kind, name: name.clone() });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub means: Vec<f64>,
    pub std_devs: Vec<f64>,
}

/// Z-scored data. Columns have sample mean 0 and sample standard deviation 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedMatrix {
    col_names: Vec<String>,
    values: Array2<f64>,
    stats: ColumnStats,
}

impl StandardizedMatrix {
    pub fn col_names(&self) -> &[String] {
        &self.col_names
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn stats(&self) -> &ColumnStats {
        &self.stats
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    /// Maps z-scores back to the original scale (`z * sigma + mu`).
    pub fn unstandardize(&self) -> Array2<f64> {
        let mut out = self.values.clone();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (mu, sigma) = (self.stats.means[j], self.stats.std_devs[j]);
            col.mapv_inplace(|z| z * sigma + mu);
        }
        out
    }
}

/// Reads a CSV file. See [`load_csv_reader`] for the accepted format.
pub fn load_csv(path: impl AsRef<Path>, options: &IngestOptions) -> Result<DataTable> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let file = std::fs::File::open(path)?;
    load_csv_reader(file, options)
}

/// Parses RFC-4180 CSV with a mandatory header row.
///
/// Missing tokens (empty, `NA`, `NaN`, `N/A`, `null`) are rejected under
/// [`NaPolicy::Strict`] and drop their row under [`NaPolicy::DropRows`].
/// Any other non-numeric or non-finite cell is a parse error under both
/// policies. Only the selected columns are parsed, so unrelated text
/// columns may be present when `options.columns` is set.
pub fn load_csv_reader<R: Read>(reader: R, options: &IngestOptions) -> Result<DataTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();

    let first_var = usize::from(options.row_names);
    let available = header.get(first_var..).unwrap_or(&[]);
    let selected: Vec<usize> = match &options.columns {
        Some(wanted) => wanted
            .iter()
            .map(|name| {
                available
                    .iter()
                    .position(|h| h == name)
                    .map(|pos| pos + first_var)
                    .ok_or_else(|| Error::ColumnNotFound(name.clone()))
            })
            .collect::<Result<_>>()?,
        None => (first_var..header.len()).collect(),
    };
    let col_names: Vec<String> = selected.iter().map(|&c| header[c].clone()).collect();

    let mut row_names = Vec::new();
    let mut cells = Vec::new();
    'records: for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let line = idx + 2;
        let mut row = Vec::with_capacity(selected.len());
        for &c in &selected {
            let raw = record.get(c).unwrap_or("");
            if MISSING_TOKENS.contains(&raw) {
                match options.na_policy {
                    NaPolicy::DropRows => continue 'records,
                    NaPolicy::Strict => {
                        return Err(Error::Parse {
                            line,
                            column: header[c].clone(),
                            value: raw.to_owned(),
                        })
                    }
                }
            }
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(v),
                _ => {
                    return Err(Error::Parse {
                        line,
                        column: header[c].clone(),
                        value: raw.to_owned(),
                    })
                }
            }
        }
        let name = if options.row_names {
            record.get(0).unwrap_or("").to_owned()
        } else {
            (idx + 1).to_string()
        };
        row_names.push(name);
        cells.extend(row);
    }

    let (n, p) = (row_names.len(), col_names.len());
    if n < 2 || p < 2 {
        return Err(Error::EmptyDataset { rows: n, cols: p });
    }
    let values = Array2::from_shape_vec((n, p), cells).expect("row lengths checked during parsing");
    DataTable::new(row_names, col_names, values)
}

/// Column means and sample standard deviations (n - 1 denominator).
pub fn column_stats(table: &DataTable) -> Result<ColumnStats> {
    let x = table.values();
    let n = x.nrows() as f64;
    let mut means = Vec::with_capacity(x.ncols());
    let mut std_devs = Vec::with_capacity(x.ncols());
    for (j, col) in x.axis_iter(Axis(1)).enumerate() {
        let mu = col.sum() / n;
        let ss: f64 = col.iter().map(|v| (v - mu).powi(2)).sum();
        let sigma = (ss / (n - 1.0)).sqrt();
        if sigma <= ZERO_VARIANCE_TOL * mu.abs().max(1.0) {
            return Err(Error::ZeroVariance(table.col_names()[j].clone()));
        }
        means.push(mu);
        std_devs.push(sigma);
    }
    Ok(ColumnStats { means, std_devs })
}

/// `z_ij = (x_ij - mu_j) / sigma_j`.
pub fn standardize(table: &DataTable, stats: &ColumnStats) -> Result<StandardizedMatrix> {
    let p = table.n_cols();
    for len in [stats.means.len(), stats.std_devs.len()] {
        if len != p {
            return Err(Error::DimensionMismatch { expected: p, actual: len });
        }
    }
    let mu = Array1::from(stats.means.clone());
    let sigma = Array1::from(stats.std_devs.clone());
    let values = (table.values() - &mu) / &sigma;
    Ok(StandardizedMatrix {
        col_names: table.col_names().to_vec(),
        values,
        stats: stats.clone(),
    })
}

/// [`column_stats`] followed by [`standardize`].
pub fn standardize_table(table: &DataTable) -> Result<StandardizedMatrix> {
    let stats = column_stats(table)?;
    standardize(table, &stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinDataset {
    /// Violent crime rates by US state, 1973 (50 x 4).
    UsArrests,
    /// Iris flower measurements without the species label (150 x 4).
    IrisFeatures,
}

impl BuiltinDataset {
    pub const ALL: [BuiltinDataset; 2] = [BuiltinDataset::UsArrests, BuiltinDataset::IrisFeatures];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinDataset::UsArrests => "usarrests",
            BuiltinDataset::IrisFeatures => "iris_features",
        }
    }
}

impl fmt::Display for BuiltinDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinDataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "usarrests" => Ok(BuiltinDataset::UsArrests),
            "iris" | "iris_features" | "iris-features" => Ok(BuiltinDataset::IrisFeatures),
            _ => Err(Error::UnknownDataset(s.to_owned())),
        }
    }
}

const USARRESTS_CSV: &str = include_str!("../data/usarrests.csv");
const IRIS_CSV: &str = include_str!("../data/iris.csv");

pub fn builtin_dataset(dataset: BuiltinDataset) -> DataTable {
    let (text, row_names) = match dataset {
        BuiltinDataset::UsArrests => (USARRESTS_CSV, true),
        BuiltinDataset::IrisFeatures => (IRIS_CSV, false),
    };
    let options = IngestOptions {
        row_names,
        ..Default::default()
    };
    load_csv_reader(text.as_bytes(), &options).expect("bundled dataset is well formed")
}

/// Looks a bundled dataset up by name.
pub fn builtin_dataset_by_name(name: &str) -> Result<DataTable> {
    name.parse().map(builtin_dataset)
}
