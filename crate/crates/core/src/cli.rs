//! Command-line interface.
//!
//! Settings resolve in the order: command-line flag, then the TOML file
//! given by `--config`, then built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::baselines::{BottomUpConfig, MajorityConfig};
use crate::bench::{bench_corpus, format_bench, linear_fit, run_bench};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalMode};
use crate::exec::{with_workers, Execution};
use crate::io::{
    clustering_from_rows, clustering_rows, format_report, generate_synthetic, read_clustering,
    read_corpus, read_edges, write_clustering, write_report, write_synthetic, write_trace,
    SyntheticConfig,
};
use crate::knn::{build_graph, load_graph_for_corpus, Backend, HnswParams, IndexConfig};
use crate::model::{Corpus, Thresholds};
use crate::pipeline::{best_row, link, sweep, Algorithm, LinkConfig, SweepParam};

/// Exit code for invalid invocations and configuration (also used by clap).
pub const EXIT_USAGE: i32 = 2;
/// Exit code for malformed or inconsistent input data.
pub const EXIT_DATA: i32 = 3;
/// Exit code for any other failure.
pub const EXIT_RUNTIME: i32 = 4;

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_) => EXIT_USAGE,
        e if e.is_data_error() => EXIT_DATA,
        _ => EXIT_RUNTIME,
    }
}

#[derive(Debug, Parser)]
#[command(name = "nil-linker", version, about = "NIL-aware entity linking")]
pub struct Cli {
    /// TOML file with default settings.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for graph construction and conflict resolution.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic corpus (mentions, entities, withheld NIL entities).
    Generate(GenerateArgs),
    /// Link a corpus and write the clustering.
    Link(LinkArgs),
    /// Score a clustering against the corpus gold labels.
    Eval(EvalArgs),
    /// Grid search over thresholds, reporting micro F1 per point.
    Sweep(SweepArgs),
    /// Time the pipeline on nested samples of a synthetic corpus.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KnnBackend {
    Exact,
    Hnsw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Full,
    Pca,
}

impl From<ModeArg> for EvalMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => EvalMode::Full,
            ModeArg::Pca => EvalMode::Pca,
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct SyntheticArgs {
    #[arg(long)]
    pub n_entities: Option<usize>,
    #[arg(long)]
    pub nil_fraction: Option<f64>,
    #[arg(long)]
    pub mean_mentions: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub noise_sigma: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct LinkerArgs {
    #[arg(long, value_enum)]
    pub algorithm: Option<Algorithm>,
    #[arg(long)]
    pub tau_m: Option<f64>,
    #[arg(long)]
    pub tau_e: Option<f64>,
    #[arg(long)]
    pub tau_a: Option<f64>,
    /// Edge threshold of the bottom-up linker.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub majority_threshold: Option<f64>,
    /// Neighbours retrieved per mention, for mentions and entities alike.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub knn: Option<KnnBackend>,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long)]
    pub mentions: PathBuf,
    #[arg(long)]
    pub entities: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub synthetic: SyntheticArgs,
}

#[derive(Debug, Args)]
pub struct LinkArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Precomputed affinity edges; bypasses the embeddings.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Clustering output file.
    #[arg(long)]
    pub out: PathBuf,
    /// Resolution trace output file (top-down linker only).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Print each mention's resolution path to stderr.
    #[arg(long)]
    pub verbose_trace: bool,
    #[command(flatten)]
    pub linker: LinkerArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub clustering: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Also write the report as key=value lines.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[command(flatten)]
    pub linker: LinkerArgs,
    /// Values for tau_m (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub grid_tau_m: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub grid_tau_e: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub grid_tau_a: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub grid_tau: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub grid_majority_threshold: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Mention sample sizes (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000")]
    pub sizes: Vec<usize>,
    /// Runs per size; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[command(flatten)]
    pub synthetic: SyntheticArgs,
    #[command(flatten)]
    pub linker: LinkerArgs,
    /// Also write the timing table here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub algorithm: Option<Algorithm>,
    pub tau_m: Option<f64>,
    pub tau_e: Option<f64>,
    pub tau_a: Option<f64>,
    pub tau: Option<f64>,
    pub majority_threshold: Option<f64>,
    pub k: Option<usize>,
    pub knn: Option<KnnBackend>,
    pub mode: Option<ModeArg>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub n_entities: Option<usize>,
    pub nil_fraction: Option<f64>,
    pub mean_mentions: Option<f64>,
    pub dim: Option<usize>,
    pub noise_sigma: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Resolves linker settings; `default_knn` applies when neither the flag nor
/// the file names a backend.
pub fn link_config(
    args: &LinkerArgs,
    file: &FileConfig,
    seed: u64,
    default_knn: KnnBackend,
) -> Result<LinkConfig> {
    let algorithm = args.algorithm.or(file.algorithm).unwrap_or_default();
    let tau_m = args.tau_m.or(file.tau_m);
    let tau_e = args.tau_e.or(file.tau_e);
    let base = Thresholds::default();
    let thresholds = Thresholds {
        tau_m: tau_m.unwrap_or(base.tau_m),
        tau_e: tau_e.unwrap_or(base.tau_e),
        tau_a: args.tau_a.or(file.tau_a).unwrap_or(base.tau_a),
    };
    let maj = MajorityConfig::default();
    let majority = MajorityConfig {
        tau_m: tau_m.unwrap_or(maj.tau_m),
        tau_e: tau_e.unwrap_or(maj.tau_e),
        majority_threshold: args
            .majority_threshold
            .or(file.majority_threshold)
            .unwrap_or(maj.majority_threshold),
    };
    let bottom_up = BottomUpConfig {
        tau: args.tau.or(file.tau).unwrap_or(BottomUpConfig::default().tau),
    };
    let k = args.k.or(file.k).unwrap_or(IndexConfig::default().k);
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let backend = match args.knn.or(file.knn).unwrap_or(default_knn) {
        KnnBackend::Exact => Backend::Exact,
        KnnBackend::Hnsw => Backend::Hnsw(HnswParams {
            seed,
            ..HnswParams::default()
        }),
    };
    match algorithm {
        Algorithm::TopDown => thresholds.validate()?,
        Algorithm::Majority => majority.validate()?,
        Algorithm::BottomUp => crate::model::check_unit("tau", bottom_up.tau)?,
        Algorithm::ExactMatch => {}
    }
    Ok(LinkConfig {
        algorithm,
        thresholds,
        majority,
        bottom_up,
        index: IndexConfig {
            k,
            backend,
            execution: Execution::Parallel,
        },
    })
}

pub fn synthetic_config(args: &SyntheticArgs, file: &FileConfig, seed: u64) -> SyntheticConfig {
    let d = SyntheticConfig::default();
    SyntheticConfig {
        n_entities: args.n_entities.or(file.n_entities).unwrap_or(d.n_entities),
        nil_fraction: args.nil_fraction.or(file.nil_fraction).unwrap_or(d.nil_fraction),
        mean_mentions: args.mean_mentions.or(file.mean_mentions).unwrap_or(d.mean_mentions),
        dim: args.dim.or(file.dim).unwrap_or(d.dim),
        noise_sigma: args.noise_sigma.or(file.noise_sigma).unwrap_or(d.noise_sigma),
        seed,
    }
}

const DEFAULT_SEED: u64 = 42;

/// Runs a parsed command line, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn std::io::Write) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let seed = cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let workers = cli.workers.or(file.workers);
    let mut buffer = Vec::new();
    with_workers(workers, || dispatch(&cli.command, &file, seed, &mut buffer))??;
    out.write_all(&buffer)
        .map_err(|e| Error::io("<stdout>", e))
}

fn dispatch(command: &Command, file: &FileConfig, seed: u64, out: &mut Vec<u8>) -> Result<()> {
    use std::io::Write;
    let mut say = |text: String| {
        let _ = out.write_all(text.as_bytes());
    };
    match command {
        Command::Generate(args) => {
            let cfg = synthetic_config(&args.synthetic, file, seed);
            let synthetic = generate_synthetic(&cfg)?;
            write_synthetic(&args.out, &synthetic)?;
            say(format!(
                "mentions={}\nentities={}\nnil_entities={}\n",
                synthetic.mentions.len(),
                synthetic.entities.len(),
                synthetic.nil_entities.len()
            ));
        }
        Command::Link(args) => {
            let corpus = read_corpus(&args.corpus.mentions, &args.corpus.entities)?;
            let config = link_config(&args.linker, file, seed, KnnBackend::Exact)?;
            let edges = args.edges.as_deref().map(read_edges).transpose()?;
            let output = link(&corpus, &config, edges.as_deref())?;
            let rows = clustering_rows(
                &output.clustering,
                &corpus.mention_ids(),
                &corpus.entity_ids(),
                output.trace.as_ref(),
            );
            write_clustering(&args.out, &rows)?;
            if let (Some(trace), Some(graph)) = (&output.trace, &output.graph) {
                let records: Vec<_> = trace.entries.iter().map(|r| r.to_record(graph)).collect();
                if let Some(path) = &args.trace {
                    write_trace(path, &records)?;
                }
                if args.verbose_trace {
                    for r in &records {
                        eprintln!(
                            "{} -> {} phi*={} path={}",
                            r.mention,
                            r.entity.as_deref().unwrap_or("NIL"),
                            r.phi_star,
                            r.path.join(" > ")
                        );
                    }
                }
            }
            let t = output.timings;
            say(format!(
                "algorithm={}\nclusters={}\nlinked_entities={}\ntime.graph_s={:.6}\ntime.clustering_s={:.6}\ntime.resolution_s={:.6}\ntime.total_s={:.6}\n",
                config.algorithm.name(),
                output.clustering.len(),
                output.clustering.linked_entity_count(),
                t.graph.as_secs_f64(),
                t.clustering.as_secs_f64(),
                t.resolution.as_secs_f64(),
                t.total.as_secs_f64(),
            ));
        }
        Command::Eval(args) => {
            let corpus = read_corpus(&args.corpus.mentions, &args.corpus.entities)?;
            let mode = args.mode.or(file.mode).map_or(EvalMode::Full, EvalMode::from);
            let rows = read_clustering(&args.clustering)?;
            let clustering =
                clustering_from_rows(&rows, &corpus.mention_ids(), &corpus.entity_ids())?;
            let report = evaluate(&corpus, &clustering, mode)?;
            if let Some(path) = &args.report {
                write_report(path, &report)?;
            }
            say(format!("{report}"));
            say(format_report(&report));
        }
        Command::Sweep(args) => {
            let corpus = read_corpus(&args.corpus.mentions, &args.corpus.entities)?;
            let config = link_config(&args.linker, file, seed, KnnBackend::Exact)?;
            let mode = args.mode.or(file.mode).map_or(EvalMode::Full, EvalMode::from);
            let graph = sweep_graph(&corpus, &config, args.edges.as_deref())?;
            let grid = sweep_grid(args, config.algorithm)?;
            let rows = sweep(&corpus, graph.as_ref(), &config, &grid, mode)?;
            let names: Vec<&str> = grid.iter().map(|(p, _)| p.name()).collect();
            let mut table = names.join("\t");
            if !table.is_empty() {
                table.push('\t');
            }
            table.push_str("micro_f1\tknown_f1\tnil_f1\n");
            for row in &rows {
                for (_, v) in &row.values {
                    table.push_str(&format!("{v}\t"));
                }
                let nil = row.report.nil.map_or("-".to_owned(), |s| format!("{:.4}", s.f1));
                table.push_str(&format!(
                    "{:.4}\t{:.4}\t{nil}\n",
                    row.report.micro.f1, row.report.known.f1
                ));
            }
            say(table);
            if let Some(best) = best_row(&rows) {
                let point: Vec<String> = rows[best]
                    .values
                    .iter()
                    .map(|(p, v)| format!("{}={v}", p.name()))
                    .collect();
                say(format!(
                    "best: {} micro_f1={:.4}\n",
                    point.join(" "),
                    rows[best].report.micro.f1
                ));
            }
        }
        Command::Bench(args) => {
            let synthetic = synthetic_config(&args.synthetic, file, seed);
            let config = link_config(&args.linker, file, seed, KnnBackend::Hnsw)?;
            let max = args.sizes.iter().copied().max().unwrap_or(0);
            if max == 0 {
                return Err(Error::Config("--sizes must list positive sizes".into()));
            }
            let corpus = bench_corpus(max, &synthetic)?;
            let rows = run_bench(&corpus, &args.sizes, &config, args.repeats, seed)?;
            let mut text = format_bench(&rows);
            if rows.len() >= 2 {
                let xs: Vec<f64> = rows.iter().map(|r| r.mentions as f64).collect();
                let ys: Vec<f64> = rows.iter().map(|r| r.total_secs).collect();
                let fit = linear_fit(&xs, &ys);
                text.push_str(&format!(
                    "fit.slope_s_per_mention={:e}\nfit.r_squared={:.4}\n",
                    fit.slope, fit.r_squared
                ));
            }
            if let Some(path) = &args.out {
                crate::io::write_text(path, &text)?;
            }
            say(text);
        }
    }
    Ok(())
}

fn sweep_graph(
    corpus: &Corpus,
    config: &LinkConfig,
    edges: Option<&Path>,
) -> Result<Option<crate::graph::AffinityGraph>> {
    if !config.algorithm.needs_graph() {
        return Ok(None);
    }
    Ok(Some(match edges {
        Some(path) => load_graph_for_corpus(corpus, &read_edges(path)?, config.index.k)?,
        None => build_graph(corpus, &config.index)?,
    }))
}

fn sweep_grid(args: &SweepArgs, algorithm: Algorithm) -> Result<Vec<(SweepParam, Vec<f64>)>> {
    let given = [
        (SweepParam::TauM, &args.grid_tau_m),
        (SweepParam::TauE, &args.grid_tau_e),
        (SweepParam::TauA, &args.grid_tau_a),
        (SweepParam::Tau, &args.grid_tau),
        (SweepParam::MajorityThreshold, &args.grid_majority_threshold),
    ];
    let allowed = SweepParam::for_algorithm(algorithm);
    let mut grid = Vec::new();
    for (param, values) in given {
        if values.is_empty() {
            continue;
        }
        if !allowed.contains(&param) {
            return Err(Error::Config(format!(
                "{} does not apply to {}",
                param.name(),
                algorithm.name()
            )));
        }
        grid.push((param, values.clone()));
    }
    Ok(grid)
}
