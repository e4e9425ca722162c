//! Variable clustering with K-means on the transposed standardized data
//! matrix, tied back to PCA through loading-based contribution scores.
//!
//! The pipeline standardizes a table, fits a correlation PCA, clusters the
//! variables (rows of `Z^T`), and reports for every cluster and component
//! the summed absolute loadings `S` and their per-component shares `P`.

pub mod cluster;
pub mod contribution;
pub mod data;
pub mod eigen;
pub mod error;
pub mod pca;
pub mod pipeline;
pub mod plot;

pub use cluster::{
    kmeans_oracle, kmeans_variables, select_k, transpose, ClusteringResult, KMeansConfig, KMethod, KSelectionReport, TransposedMatrix,
};
pub use contribution::{cluster_contributions, dominant_cluster, ContributionReport, Dominance};
pub use data::{
    builtin_dataset, column_stats, load_csv, standardize, standardize_table, BuiltinDataset, ColumnStats, DataTable, IngestOptions,
    NaPolicy, StandardizedMatrix,
};
pub use error::{Error, Result};
pub use pca::{abs_loadings, explained_variance_pct, fit_pca, PcaResult};
pub use pipeline::{run_pipeline, InputSource, KChoice, RunConfig, RunSummary};
pub use plot::{render_contributions, render_scree};
