use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use varclust::cluster::KMethod;
use varclust::data::{BuiltinDataset, IngestOptions, NaPolicy};
use varclust::pipeline::{run_pca, run_pipeline, run_selectk, Formats, InputSource, KChoice, PipelineError, RunConfig};
use varclust::Error;

#[derive(Debug, Parser)]
#[command(
    name = "varclust",
    version,
    about = "Cluster variables with K-means on transposed data and relate the clusters to PCA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full pipeline: PCA, K selection, clustering, contribution tables, figures.
    Analyze(CommonArgs),
    /// K-selection curve (WSS and silhouette per K) only.
    Selectk(CommonArgs),
    /// Loadings and eigenvalues only.
    Pca(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// CSV file with a header row.
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    input: Option<PathBuf>,
    /// Bundled dataset: usarrests or iris_features.
    #[arg(long)]
    builtin: Option<String>,
    /// Fixed number of clusters.
    #[arg(long, conflicts_with = "k_range")]
    k: Option<usize>,
    /// Candidate range for K selection, MIN:MAX.
    #[arg(long, value_name = "MIN:MAX")]
    k_range: Option<String>,
    #[arg(long, default_value = "elbow", value_parser = ["elbow", "silhouette"])]
    k_method: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    #[arg(long, default_value_t = 300)]
    max_iters: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value = "csv,json,svg")]
    formats: String,
    /// First CSV column holds row labels.
    #[arg(long)]
    rownames: bool,
    #[arg(long, default_value = "strict", value_parser = ["strict", "drop-rows"])]
    na_policy: String,
    /// Comma-separated list of variables to keep.
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<String>>,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

fn parse_range(s: &str) -> Result<(usize, usize), Error> {
    let bad = || Error::Config(format!("--k-range expects MIN:MAX, got {s:?}"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

impl CommonArgs {
    fn into_config(self) -> Result<RunConfig, Error> {
        let input = match (self.input, self.builtin) {
            (Some(path), None) => InputSource::Csv(path),
            (None, Some(name)) => InputSource::Builtin(name.parse::<BuiltinDataset>()?),
            _ => return Err(Error::Config("give exactly one of --input or --builtin".into())),
        };
        let method: KMethod = self.k_method.parse()?;
        let k = match (self.k, self.k_range) {
            (Some(k), None) => KChoice::Manual(k),
            (None, Some(range)) => {
                let (lo, hi) = parse_range(&range)?;
                KChoice::Select {
                    k_min: Some(lo),
                    k_max: Some(hi),
                    method,
                }
            }
            (None, None) => KChoice::Select {
                k_min: None,
                k_max: None,
                method,
            },
            (Some(_), Some(_)) => return Err(Error::Config("--k and --k-range are mutually exclusive".into())),
        };
        let na_policy: NaPolicy = self.na_policy.parse()?;
        Ok(RunConfig {
            input,
            ingest: IngestOptions {
                row_names: self.rownames,
                na_policy,
                columns: self.columns,
            },
            k,
            seed: self.seed,
            restarts: self.restarts,
            max_iters: self.max_iters,
            output_dir: self.out,
            formats: self.formats.parse::<Formats>()?,
            force: self.force,
        })
    }
}

fn fail(message: impl std::fmt::Display, code: i32) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code as u8)
}

fn print_files(dir: &std::path::Path, files: &[String]) {
    println!("\nwrote {} file(s) to {}:", files.len(), dir.display());
    for f in files {
        println!("  {f}");
    }
}

fn analyze(config: &RunConfig) -> Result<(), PipelineError> {
    let summary = run_pipeline(config)?;
    println!(
        "dataset {}: n = {}, p = {}",
        summary.dataset.source, summary.dataset.n, summary.dataset.p
    );
    println!("\nexplained variance:");
    for (name, pct) in summary.pca.result.components.iter().zip(summary.explained_pct()) {
        println!("  {name:<6}{pct:>8.3} %");
    }
    let c = &summary.clustering;
    println!("\nK = {} ({}), WSS = {:.3}", c.k, c.method, c.wss);
    for entry in &c.clusters {
        println!("  cluster {}: {}", entry.id, entry.members.join(", "));
    }
    let report = &summary.contributions.report;
    println!("\ncontributions S:\n{}", report.format_table(&report.s_matrix));
    println!("proportions P:\n{}", report.format_table(&report.p_matrix));
    println!("dominant cluster per component:");
    for d in &summary.contributions.dominant {
        let tie = if d.dominance.tie { " (tie)" } else { "" };
        println!(
            "  {:<6}cluster {} ({:.3}){}",
            d.component, d.dominance.cluster_id, d.dominance.share, tie
        );
    }
    print_files(&config.output_dir, &summary.files);
    Ok(())
}

fn selectk(config: &RunConfig) -> Result<(), PipelineError> {
    let (report, files) = run_selectk(config)?;
    println!("{:>4}{:>14}{:>12}", "k", "wss", "silhouette");
    for ((k, w), s) in report.candidate_ks.iter().zip(&report.wss_curve).zip(&report.silhouette_curve) {
        let s = s.map(|s| format!("{s:.3}")).unwrap_or_else(|| "-".into());
        println!("{k:>4}{w:>14.3}{s:>12}");
    }
    println!("suggested K = {} ({})", report.suggested_k, report.method);
    print_files(&config.output_dir, &files);
    Ok(())
}

fn pca(config: &RunConfig) -> Result<(), PipelineError> {
    let (pca, files) = run_pca(config)?;
    print!("{:<16}", "variable");
    for c in pca.component_names() {
        print!("{c:>8}");
    }
    println!();
    for (name, row) in pca.variables().iter().zip(pca.loadings().rows()) {
        print!("{name:<16}");
        for v in row {
            print!("{v:>8.3}");
        }
        println!();
    }
    print!("{:<16}", "explained %");
    for r in pca.explained_ratio() {
        print!("{:>8.3}", 100.0 * r);
    }
    println!();
    print_files(&config.output_dir, &files);
    Ok(())
}

type Handler = fn(&RunConfig) -> Result<(), PipelineError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (run, args): (Handler, CommonArgs) = match cli.command {
        Command::Analyze(a) => (analyze, a),
        Command::Selectk(a) => (selectk, a),
        Command::Pca(a) => (pca, a),
    };
    let config = match args.into_config() {
        Ok(c) => c,
        Err(e) => return fail(&e, e.exit_code()),
    };
    match run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e, e.exit_code()),
    }
}
