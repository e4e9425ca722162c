//! End-to-end run: scale, PCA, transpose, choose K, cluster, score, write.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cluster::{
    kmeans_variables, manual_k_report, select_k, transpose, ClusteringResult, KMeansConfig, KMethod, KSelectionReport, TransposedMatrix,
};
use crate::contribution::{cluster_contributions, dominant_cluster, ContributionReport, Dominance};
use crate::data::{
    builtin_dataset, column_stats, load_csv, standardize, BuiltinDataset, DataTable, IngestOptions, NaPolicy, StandardizedMatrix,
};
use crate::error::Error;
use crate::pca::{fit_pca, PcaJson, PcaResult};
use crate::plot::{render_contributions, render_scree};

/// Upper end of the default K scan.
pub const DEFAULT_K_MAX: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSource {
    Builtin(BuiltinDataset),
    Csv(PathBuf),
}

impl fmt::Display for InputSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSource::Builtin(d) => write!(f, "builtin:{d}"),
            InputSource::Csv(path) => write!(f, "{}", path.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KChoice {
    Manual(usize),
    /// Scan `k_min..=k_max`; `None` bounds default to `1` and `min(p, 10)`.
    Select {
        k_min: Option<usize>,
        k_max: Option<usize>,
        method: KMethod,
    },
}

impl Default for KChoice {
    fn default() -> Self {
        KChoice::Select {
            k_min: None,
            k_max: None,
            method: KMethod::Elbow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Self {
            csv: true,
            json: true,
            svg: true,
        }
    }
}

impl std::str::FromStr for Formats {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let mut f = Formats {
            csv: false,
            json: false,
            svg: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "csv" => f.csv = true,
                "json" => f.json = true,
                "svg" => f.svg = true,
                other => return Err(Error::Config(format!("unknown output format {other:?}"))),
            }
        }
        if !(f.csv || f.json || f.svg) {
            return Err(Error::Config("no output formats selected".into()));
        }
        Ok(f)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: InputSource,
    pub ingest: IngestOptions,
    pub k: KChoice,
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    pub output_dir: PathBuf,
    pub formats: Formats,
    pub force: bool,
}

impl RunConfig {
    pub fn new(input: InputSource, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            input,
            ingest: IngestOptions::default(),
            k: KChoice::default(),
            seed: KMeansConfig::DEFAULT_SEED,
            restarts: KMeansConfig::DEFAULT_RESTARTS,
            max_iters: KMeansConfig::DEFAULT_MAX_ITERS,
            output_dir: output_dir.into(),
            formats: Formats::default(),
            force: false,
        }
    }

    fn kmeans_base(&self) -> KMeansConfig {
        KMeansConfig::new(1)
            .seed(self.seed)
            .restarts(self.restarts)
            .max_iters(self.max_iters)
    }
}

/// Pipeline failure with the dataset and step it happened in.
#[derive(Debug)]
pub struct PipelineError {
    pub dataset: String,
    pub step: &'static str,
    pub source: Error,
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        self.source.exit_code()
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.dataset, self.step, self.source)
    }
}

impl std::error::Error for PipelineError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

struct Ctx {
    dataset: String,
}

impl Ctx {
    fn at<T>(&self, step: &'static str, r: Result<T, Error>) -> Result<T, PipelineError> {
        r.map_err(|source| PipelineError {
            dataset: self.dataset.clone(),
            step,
            source,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetInfo {
    pub source: String,
    pub n: usize,
    pub p: usize,
    pub variables: Vec<String>,
    pub na_policy: NaPolicy,
    pub means: Vec<f64>,
    pub std_devs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PcaSection {
    #[serde(flatten)]
    pub result: PcaJson,
    pub explained_pct: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterEntry {
    pub id: usize,
    pub members: Vec<String>,
    pub wss: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusteringSection {
    pub k: usize,
    pub method: KMethod,
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    pub iterations: usize,
    pub wss: f64,
    pub assignment: BTreeMap<String, usize>,
    pub clusters: Vec<ClusterEntry>,
    pub k_selection: KSelectionReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct DominantEntry {
    pub component: String,
    #[serde(flatten)]
    pub dominance: Dominance,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContributionSection {
    #[serde(flatten)]
    pub report: ContributionReport,
    pub dominant: Vec<DominantEntry>,
}

/// Everything a run produced; serialized as `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub dataset: DatasetInfo,
    pub pca: PcaSection,
    pub clustering: ClusteringSection,
    pub contributions: ContributionSection,
    /// File names relative to the output directory, in write order.
    pub files: Vec<String>,
}

impl RunSummary {
    pub fn explained_pct(&self) -> &[f64] {
        &self.pca.explained_pct
    }

    pub fn paths(&self, output_dir: &Path) -> Vec<PathBuf> {
        self.files.iter().map(|f| output_dir.join(f)).collect()
    }
}

/// In-memory products of the analysis, before anything is written.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub table: DataTable,
    pub standardized: StandardizedMatrix,
    pub pca: PcaResult,
    pub transposed: TransposedMatrix,
    pub selection: KSelectionReport,
    pub clustering: ClusteringResult,
    pub contributions: ContributionReport,
}

fn load(config: &RunConfig) -> Result<DataTable, Error> {
    match &config.input {
        InputSource::Builtin(d) => {
            let table = builtin_dataset(*d);
            match &config.ingest.columns {
                Some(cols) => select_columns(&table, cols),
                None => Ok(table),
            }
        }
        InputSource::Csv(path) => load_csv(path, &config.ingest),
    }
}

fn select_columns(table: &DataTable, cols: &[String]) -> Result<DataTable, Error> {
    let idx: Vec<usize> = cols
        .iter()
        .map(|c| {
            table
                .col_names()
                .iter()
                .position(|n| n == c)
                .ok_or_else(|| Error::ColumnNotFound(c.clone()))
        })
        .collect::<Result<_, _>>()?;
    let values = table.values().select(ndarray::Axis(1), &idx);
    DataTable::new(table.row_names().to_vec(), cols.to_vec(), values)
}

fn prepare(config: &RunConfig, ctx: &Ctx) -> Result<(DataTable, StandardizedMatrix, PcaResult, TransposedMatrix), PipelineError> {
    let table = ctx.at("load", load(config))?;
    let stats = ctx.at("standardize", column_stats(&table))?;
    let z = ctx.at("standardize", standardize(&table, &stats))?;
    let pca = ctx.at("pca", fit_pca(&z))?;
    let t = transpose(&z);
    Ok((table, z, pca, t))
}

fn k_range(choice: KChoice, p: usize) -> (usize, usize, KMethod) {
    match choice {
        KChoice::Select { k_min, k_max, method } => (k_min.unwrap_or(1), k_max.unwrap_or(p.min(DEFAULT_K_MAX)), method),
        KChoice::Manual(_) => (1, p.min(DEFAULT_K_MAX), KMethod::Manual),
    }
}

/// Runs every analysis step without touching the filesystem.
pub fn analyze(config: &RunConfig) -> Result<Analysis, PipelineError> {
    let ctx = Ctx {
        dataset: config.input.to_string(),
    };
    let (table, standardized, pca, transposed) = prepare(config, &ctx)?;
    let base = config.kmeans_base();
    let p = transposed.n_variables();

    let selection = match config.k {
        KChoice::Manual(k) => {
            let (lo, hi, _) = k_range(config.k, p);
            ctx.at("select_k", manual_k_report(&transposed, lo, hi, k, &base))?
        }
        choice => {
            let (lo, hi, method) = k_range(choice, p);
            ctx.at("select_k", select_k(&transposed, lo, hi, method, &base))?
        }
    };
    let clustering = ctx.at(
        "kmeans",
        kmeans_variables(
            &transposed,
            &KMeansConfig {
                k: selection.suggested_k,
                ..base
            },
        ),
    )?;
    let contributions = ctx.at("contributions", cluster_contributions(&pca, &clustering))?;

    Ok(Analysis {
        table,
        standardized,
        pca,
        transposed,
        selection,
        clustering,
        contributions,
    })
}

struct Output<'a> {
    dir: &'a Path,
    force: bool,
    files: Vec<String>,
}

impl<'a> Output<'a> {
    fn new(dir: &'a Path, force: bool, planned: &[&str]) -> Result<Self, Error> {
        if !force {
            for name in planned {
                let path = dir.join(name);
                if path.exists() {
                    return Err(Error::OutputExists(path));
                }
            }
        }
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir,
            force,
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, f: impl FnOnce(BufWriter<fs::File>) -> Result<(), Error>) -> Result<(), Error> {
        let path = self.dir.join(name);
        if !self.force && path.exists() {
            return Err(Error::OutputExists(path));
        }
        f(BufWriter::new(fs::File::create(&path)?))?;
        self.files.push(name.to_owned());
        Ok(())
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<(), Error> {
        self.write(name, |mut w| {
            use std::io::Write;
            w.write_all(text.as_bytes())?;
            w.flush()?;
            Ok(())
        })
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Error> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Csv,
    Json,
    Svg,
}

fn planned_files(formats: Formats, names: &[(&'static str, Kind)]) -> Vec<&'static str> {
    names
        .iter()
        .filter(|(_, kind)| match kind {
            Kind::Csv => formats.csv,
            Kind::Json => formats.json,
            Kind::Svg => formats.svg,
        })
        .map(|(n, _)| *n)
        .collect()
}

const ANALYZE_FILES: &[(&str, Kind)] = &[
    ("loadings.csv", Kind::Csv),
    ("eigenvalues.csv", Kind::Csv),
    ("clusters.csv", Kind::Csv),
    ("kselection.csv", Kind::Csv),
    ("contributions.csv", Kind::Csv),
    ("proportions.csv", Kind::Csv),
    ("scree.svg", Kind::Svg),
    ("contributions.svg", Kind::Svg),
    ("summary.json", Kind::Json),
];

fn summarize(config: &RunConfig, a: &Analysis) -> RunSummary {
    let c = &a.clustering;
    let dominant = (1..=a.pca.n_components())
        .map(|j| DominantEntry {
            component: format!("PC{j}"),
            dominance: dominant_cluster(&a.contributions, j).expect("component index in range"),
        })
        .collect();
    RunSummary {
        dataset: DatasetInfo {
            source: config.input.to_string(),
            n: a.table.n_rows(),
            p: a.table.n_cols(),
            variables: a.table.col_names().to_vec(),
            na_policy: config.ingest.na_policy,
            means: a.standardized.stats().means.clone(),
            std_devs: a.standardized.stats().std_devs.clone(),
        },
        pca: PcaSection {
            result: a.pca.to_json(),
            explained_pct: a.pca.explained_ratio().iter().map(|r| 100.0 * r).collect(),
        },
        clustering: ClusteringSection {
            k: c.k,
            method: a.selection.method,
            seed: c.seed,
            restarts: c.restarts,
            max_iters: config.max_iters,
            iterations: c.iterations,
            wss: c.wss,
            assignment: c.variables.iter().cloned().zip(c.labels.iter().copied()).collect(),
            clusters: c
                .clusters
                .iter()
                .enumerate()
                .map(|(i, members)| ClusterEntry {
                    id: i + 1,
                    members: members.clone(),
                    wss: c.wss_per_cluster[i],
                })
                .collect(),
            k_selection: a.selection.clone(),
        },
        contributions: ContributionSection {
            report: a.contributions.clone(),
            dominant,
        },
        files: Vec::new(),
    }
}

/// Full analysis plus report files in `config.output_dir`.
pub fn run_pipeline(config: &RunConfig) -> Result<RunSummary, PipelineError> {
    let analysis = analyze(config)?;
    let mut summary = summarize(config, &analysis);
    let ctx = Ctx {
        dataset: config.input.to_string(),
    };
    ctx.at("write", write_analyze(config, &analysis, &mut summary))?;
    Ok(summary)
}

fn write_analyze(config: &RunConfig, a: &Analysis, summary: &mut RunSummary) -> Result<(), Error> {
    let planned = planned_files(config.formats, ANALYZE_FILES);
    let mut out = Output::new(&config.output_dir, config.force, &planned)?;
    if config.formats.csv {
        out.write("loadings.csv", |w| a.pca.write_loadings_csv(w))?;
        out.write("eigenvalues.csv", |w| a.pca.write_eigenvalues_csv(w))?;
        out.write("clusters.csv", |w| a.clustering.write_csv(w))?;
        out.write("kselection.csv", |w| a.selection.write_csv(w))?;
        out.write("contributions.csv", |w| a.contributions.write_s_csv(w))?;
        out.write("proportions.csv", |w| a.contributions.write_p_csv(w))?;
    }
    if config.formats.svg {
        out.write_text("scree.svg", &render_scree(&a.pca))?;
        out.write_text("contributions.svg", &render_contributions(&a.contributions))?;
    }
    if config.formats.json {
        summary.files = out.files.clone();
        summary.files.push("summary.json".into());
        out.write_json("summary.json", summary)?;
    }
    summary.files = out.files;
    Ok(())
}

/// PCA only: loadings, eigenvalues, `pca.json`, scree plot. Returns the files written.
pub fn run_pca(config: &RunConfig) -> Result<(PcaResult, Vec<String>), PipelineError> {
    let ctx = Ctx {
        dataset: config.input.to_string(),
    };
    let (_, _, pca, _) = prepare(config, &ctx)?;
    let files = ctx.at("write", {
        let planned = planned_files(
            config.formats,
            &[
                ("loadings.csv", Kind::Csv),
                ("eigenvalues.csv", Kind::Csv),
                ("pca.json", Kind::Json),
                ("scree.svg", Kind::Svg),
            ],
        );
        (|| {
            let mut out = Output::new(&config.output_dir, config.force, &planned)?;
            if config.formats.csv {
                out.write("loadings.csv", |w| pca.write_loadings_csv(w))?;
                out.write("eigenvalues.csv", |w| pca.write_eigenvalues_csv(w))?;
            }
            if config.formats.json {
                out.write_json("pca.json", &pca.to_json())?;
            }
            if config.formats.svg {
                out.write_text("scree.svg", &render_scree(&pca))?;
            }
            Ok(out.files)
        })()
    })?;
    Ok((pca, files))
}

/// K-selection curve only. A manual `k` is rejected here.
pub fn run_selectk(config: &RunConfig) -> Result<(KSelectionReport, Vec<String>), PipelineError> {
    let ctx = Ctx {
        dataset: config.input.to_string(),
    };
    if let KChoice::Manual(_) = config.k {
        return Err(PipelineError {
            dataset: ctx.dataset,
            step: "select_k",
            source: Error::Config("selectk takes --k-range, not --k".into()),
        });
    }
    let (_, _, _, t) = prepare(config, &ctx)?;
    let (lo, hi, method) = k_range(config.k, t.n_variables());
    let report = ctx.at("select_k", select_k(&t, lo, hi, method, &config.kmeans_base()))?;
    let files = ctx.at("write", {
        let planned = planned_files(config.formats, &[("kselection.csv", Kind::Csv), ("kselection.json", Kind::Json)]);
        (|| {
            let mut out = Output::new(&config.output_dir, config.force, &planned)?;
            if config.formats.csv {
                out.write("kselection.csv", |w| report.write_csv(w))?;
            }
            if config.formats.json {
                out.write_json("kselection.json", &report)?;
            }
            Ok(out.files)
        })()
    })?;
    Ok((report, files))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_parse() {
        let f: Formats = "csv,svg".parse().unwrap();
        assert_eq!(
            f,
            Formats {
                csv: true,
                json: false,
                svg: true
            }
        );
        assert!("csv,pdf".parse::<Formats>().is_err());
        assert!("".parse::<Formats>().is_err());
    }

    #[test]
    fn default_range_caps_at_ten() {
        assert_eq!(k_range(KChoice::default(), 4), (1, 4, KMethod::Elbow));
        assert_eq!(k_range(KChoice::default(), 30), (1, 10, KMethod::Elbow));
        assert_eq!(k_range(KChoice::Manual(3), 30).2, KMethod::Manual);
    }

    #[test]
    fn builtin_column_subset() {
        let mut cfg = RunConfig::new(InputSource::Builtin(BuiltinDataset::UsArrests), "unused");
        cfg.ingest.columns = Some(vec!["Rape".into(), "Murder".into()]);
        let t = load(&cfg).unwrap();
        assert_eq!(t.col_names(), ["Rape", "Murder"]);
        assert_eq!(t.values()[[0, 1]], 13.2);
        cfg.ingest.columns = Some(vec!["Nope".into()]);
        assert!(matches!(load(&cfg), Err(Error::ColumnNotFound(_))));
    }

    #[test]
    fn errors_carry_step_context() {
        let cfg = RunConfig::new(InputSource::Csv("/no/such/file.csv".into()), "unused");
        let err = analyze(&cfg).unwrap_err();
        assert_eq!(err.step, "load");
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("/no/such/file.csv"));
    }
}
