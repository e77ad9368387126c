use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use pbsearch::commands::{self, EngineArgs, EvaluateOptions, QueryArgs, Region};
use pbsearch::service::{self, AppState};
use pbsearch_core::evaluation::{PlantedParams, MAX_K};
use pbsearch_core::RingMeasure;
use pbsearch_core::SimilarityConfig;

#[derive(Parser)]
#[command(name = "pbsearch", version, about = "Profile-based sub-image search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a visual codebook on the raw keypoint files of a manifest.
    BuildCodebook {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Quantize a raw keypoint file into visual words.
    Quantize {
        #[arg(long)]
        codebook: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Build a profile index from the images of a manifest.
    BuildIndex {
        #[arg(long)]
        manifest: PathBuf,
        /// Codebook for raw keypoint files.
        #[arg(long)]
        codebook: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Rank indexed images against a query keypoint file.
    Query {
        #[arg(long, env = "PBSEARCH_INDEX")]
        index: PathBuf,
        #[arg(long)]
        query: PathBuf,
        #[arg(long, short, default_value_t = 10)]
        k: usize,
        /// Keep only query keypoints inside x0,y0,x1,y1.
        #[arg(long)]
        region: Option<Region>,
        /// Codebook for a raw query file.
        #[arg(long)]
        codebook: Option<PathBuf>,
        /// Expected n0 of the index.
        #[arg(long, env = "PBSEARCH_N0")]
        n0: Option<usize>,
        #[arg(long, env = "PBSEARCH_LAMBDA", default_value_t = 1.0 / 3.0)]
        lambda: f64,
        #[arg(long, env = "PBSEARCH_MEASURE", default_value = "jaccard")]
        measure: RingMeasure,
    },
    /// Compare profile search with bag-of-words baselines on synthetic data.
    Evaluate {
        #[arg(long, short, default_value = "evaluation")]
        out: PathBuf,
        #[arg(long, default_value_t = 52)]
        queries: usize,
        #[arg(long, default_value_t = 1000)]
        images: usize,
        /// Trials per scenario.
        #[arg(long)]
        trials: Option<usize>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Serve an index over HTTP.
    Serve {
        #[arg(long, env = "PBSEARCH_INDEX")]
        index: PathBuf,
        #[arg(long, env = "PBSEARCH_BIND", default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        #[arg(long, env = "PBSEARCH_LAMBDA", default_value_t = 1.0 / 3.0)]
        lambda: f64,
        #[arg(long, env = "PBSEARCH_MEASURE", default_value = "jaccard")]
        measure: RingMeasure,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BuildCodebook { manifest, out, engine } => {
            let s = commands::build_codebook(&manifest, &out, &engine.config()?)?;
            println!("scatter {}", s.scatter);
            println!("restart {} (seed {})", s.restart, s.seed);
            println!("wrote {} centers of dimension {} to {}", s.k, s.dim, out.display());
        }
        Command::Quantize { codebook, input, out } => {
            let image = commands::quantize(&codebook, &input, &out)?;
            println!("wrote {} keypoints to {}", image.len(), out.display());
        }
        Command::BuildIndex { manifest, codebook, out, engine } => {
            let s = commands::build_index(&manifest, codebook.as_deref(), &out, &engine.config()?)?;
            println!("indexed {} images, {} profiles, codebook size {}", s.images, s.profiles, s.codebook_size);
        }
        Command::Query { index, query, k, region, codebook, n0, lambda, measure } => {
            let hits = commands::query(&QueryArgs {
                index: &index,
                query: &query,
                k,
                region,
                codebook: codebook.as_deref(),
                n0,
                similarity: SimilarityConfig::new(lambda, measure)?,
            })?;
            print!("{}", commands::format_hits(&hits));
        }
        Command::Evaluate { out, queries, images, trials, engine } => {
            let defaults = EvaluateOptions::default();
            let options = EvaluateOptions {
                params: PlantedParams { queries, images, ..PlantedParams::default() },
                scatter_trials: trials.unwrap_or(defaults.scatter_trials),
                small_query_trials: trials.unwrap_or(defaults.small_query_trials),
                occlusion_trials: trials.unwrap_or(defaults.occlusion_trials),
                ..defaults
            };
            let summary = commands::evaluate(&engine.config()?, &options, &out)?;
            print!("{}", summary.report.to_table());
            println!("{}", commands::headline(&summary.report, MAX_K));
            print!("{}", summary.scenario_text());
            println!("reports written to {}", out.display());
        }
        Command::Serve { index, bind, lambda, measure } => {
            let index = commands::open_index(&index, None)?;
            let state = AppState::new(index, SimilarityConfig::new(lambda, measure)?);
            tokio::runtime::Runtime::new()?.block_on(service::serve(state, bind))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
