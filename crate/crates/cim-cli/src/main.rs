//! `cim`: influence-maximization toolkit.
//!
//! Subcommands: `stats`, `scores`, `partition`, `select`, `bench`.
//! Exit codes: 0 success, 1 runtime failure (including any failed bench
//! row), 2 configuration error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use community_im::{
    cdd_all, detect_communities, diffusion_degree_all, parse_partition_path, write_partition,
    Algorithm, ModularityParams, Partition, PipelineConfig, WeightedDigraph,
};

use cim_cli::dataset::Fetcher;
use cim_cli::experiment::{
    graph_stats, load_graph, run_experiments, ExperimentConfig, WeightChoice,
};

#[derive(Parser)]
#[command(name = "cim", version, about = "Influence maximization toolkit")]
struct Cli {
    /// Dataset cache directory (default: $CIM_CACHE_DIR, then ~/.cache/cim)
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Never touch the network; use cached datasets only
    #[arg(long, global = true)]
    offline: bool,

    /// Master RNG seed; all randomness derives from it
    #[arg(long, global = true, default_value_t = 42)]
    rng_seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Node count, edge count, average degree, and partition modularity
    Stats {
        /// Graph file, dataset name (deezer|dblp|amazon), or URL
        #[arg(long)]
        graph: String,
        /// Edge-weight model: wc, tv, or explicit
        #[arg(long, default_value = "wc")]
        weights: String,
        /// Modularity resolution used for detection
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
    /// Dump per-node diffusion degree and CDD as CSV `node,dd,cdd`
    Scores {
        #[arg(long)]
        graph: String,
        #[arg(long, default_value = "wc")]
        weights: String,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Reuse a cached partition instead of detecting one
        #[arg(long)]
        partition_in: Option<PathBuf>,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detect communities and write `node_label community_id` lines
    Partition {
        #[arg(long)]
        graph: String,
        #[arg(long, default_value = "wc")]
        weights: String,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long)]
        partition_out: PathBuf,
    },
    /// Select a seed set with one algorithm at one budget
    Select {
        #[arg(long)]
        graph: String,
        #[arg(long, default_value = "wc")]
        weights: String,
        /// degree | celf | community-im | community-im-pp
        #[arg(long)]
        algo: String,
        #[arg(long)]
        budget: usize,
        /// Cascade samples per marginal-gain estimate during selection
        #[arg(long, default_value_t = 1_000)]
        samples_select: usize,
        /// Cascade samples for the final influence estimate
        #[arg(long, default_value_t = 10_000)]
        samples_eval: usize,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long)]
        partition_in: Option<PathBuf>,
        /// Write seed labels here instead of stdout
        #[arg(long)]
        seeds_out: Option<PathBuf>,
    },
    /// Run an algorithm/budget grid and stream results to CSV
    Bench {
        #[arg(long)]
        graph: String,
        #[arg(long, default_value = "wc")]
        weights: String,
        /// Comma-separated algorithms (default: all four)
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "degree,celf,community-im,community-im-pp"
        )]
        algos: Vec<String>,
        /// Comma-separated strictly increasing budgets
        #[arg(long, value_delimiter = ',', required = true)]
        budgets: Vec<usize>,
        #[arg(long, default_value_t = 1_000)]
        samples_select: usize,
        #[arg(long, default_value_t = 10_000)]
        samples_eval: usize,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long)]
        partition_in: Option<PathBuf>,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
        /// Zero the runtime column so reruns are byte-identical
        #[arg(long)]
        no_timing: bool,
    },
}

fn default_cache_dir() -> PathBuf {
    if let Ok(dir) = std::env::var("CIM_CACHE_DIR") {
        return PathBuf::from(dir);
    }
    if let Ok(home) = std::env::var("HOME") {
        return PathBuf::from(home).join(".cache").join("cim");
    }
    PathBuf::from(".cim-cache")
}

const EXIT_OK: i32 = 0;
const EXIT_RUN_FAILURE: i32 = 1;
const EXIT_CONFIG: i32 = 2;

fn config_error(msg: impl std::fmt::Display) -> i32 {
    eprintln!("config error: {msg}");
    EXIT_CONFIG
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            EXIT_RUN_FAILURE
        }
    };
    std::process::exit(code);
}

fn parse_weights(s: &str) -> Result<WeightChoice, String> {
    WeightChoice::parse(s).ok_or_else(|| format!("unknown weight model {s:?} (wc|tv|explicit)"))
}

fn parse_algos(names: &[String]) -> Result<Vec<Algorithm>, String> {
    names
        .iter()
        .map(|s| Algorithm::parse(s).ok_or_else(|| format!("unknown algorithm {s:?}")))
        .collect()
}

fn load_partition_arg(g: &WeightedDigraph, path: &Option<PathBuf>) -> Result<Option<Partition>> {
    match path {
        None => Ok(None),
        Some(p) => Ok(Some(
            parse_partition_path(g, p).with_context(|| format!("reading {}", p.display()))?,
        )),
    }
}

fn run(cli: Cli) -> Result<i32> {
    let cache_dir = cli.cache_dir.clone().unwrap_or_else(default_cache_dir);
    let fetcher = Fetcher::new(cache_dir, cli.offline);
    let rng_seed = cli.rng_seed;

    match cli.command {
        Command::Stats {
            graph,
            weights,
            gamma,
        } => {
            let weights = match parse_weights(&weights) {
                Ok(w) => w,
                Err(e) => return Ok(config_error(e)),
            };
            if ModularityParams::new(gamma).is_err() {
                return Ok(config_error(format!("invalid gamma {gamma}")));
            }
            let g = load_graph(&fetcher, &graph, weights, rng_seed)?;
            let stats = graph_stats(&g, gamma, rng_seed)?;
            println!("{}", serde_json::to_string_pretty(&stats)?);
            Ok(EXIT_OK)
        }

        Command::Scores {
            graph,
            weights,
            gamma,
            partition_in,
            out,
        } => {
            let weights = match parse_weights(&weights) {
                Ok(w) => w,
                Err(e) => return Ok(config_error(e)),
            };
            let params = match ModularityParams::new(gamma) {
                Ok(p) => p,
                Err(e) => return Ok(config_error(e)),
            };
            let g = load_graph(&fetcher, &graph, weights, rng_seed)?;
            let part = match load_partition_arg(&g, &partition_in)? {
                Some(p) => p,
                None => detect_communities(&g, params, rng_seed)?,
            };
            let dd = diffusion_degree_all(&g);
            let cdd = cdd_all(&g, &part)?;
            let mut sink: Box<dyn Write> = match &out {
                Some(p) => Box::new(BufWriter::new(File::create(p)?)),
                None => Box::new(std::io::stdout().lock()),
            };
            writeln!(sink, "node,dd,cdd")?;
            for v in 0..g.node_count() as u32 {
                writeln!(
                    sink,
                    "{},{:.6},{:.6}",
                    g.external_id(v),
                    dd[v as usize],
                    cdd[v as usize]
                )?;
            }
            sink.flush()?;
            Ok(EXIT_OK)
        }

        Command::Partition {
            graph,
            weights,
            gamma,
            partition_out,
        } => {
            let weights = match parse_weights(&weights) {
                Ok(w) => w,
                Err(e) => return Ok(config_error(e)),
            };
            let params = match ModularityParams::new(gamma) {
                Ok(p) => p,
                Err(e) => return Ok(config_error(e)),
            };
            let g = load_graph(&fetcher, &graph, weights, rng_seed)?;
            let part = detect_communities(&g, params, rng_seed)?;
            let file = File::create(&partition_out)
                .with_context(|| format!("creating {}", partition_out.display()))?;
            write_partition(&g, &part, BufWriter::new(file))?;
            println!(
                "{}",
                serde_json::json!({
                    "communities": part.community_count(),
                    "normalized_modularity": community_im::normalized_modularity(&g, &part)?,
                })
            );
            Ok(EXIT_OK)
        }

        Command::Select {
            graph,
            weights,
            algo,
            budget,
            samples_select,
            samples_eval,
            gamma,
            partition_in,
            seeds_out,
        } => {
            let weights = match parse_weights(&weights) {
                Ok(w) => w,
                Err(e) => return Ok(config_error(e)),
            };
            let algo = match Algorithm::parse(&algo) {
                Some(a) => a,
                None => return Ok(config_error(format!("unknown algorithm {algo:?}"))),
            };
            if budget == 0 {
                return Ok(config_error("budget must be positive"));
            }
            if ModularityParams::new(gamma).is_err() {
                return Ok(config_error(format!("invalid gamma {gamma}")));
            }
            let g = load_graph(&fetcher, &graph, weights, rng_seed)?;
            let partition = load_partition_arg(&g, &partition_in)?;
            let cfg = PipelineConfig {
                gamma,
                samples_select,
                samples_eval,
                seed: rng_seed,
            };
            let outcome = community_im::run_pipeline(&g, algo, budget, &cfg, partition.as_ref())?;
            let labels: Vec<u64> = outcome.seeds.iter().map(|&v| g.external_id(v)).collect();
            match &seeds_out {
                Some(p) => {
                    let mut f = BufWriter::new(File::create(p)?);
                    for l in &labels {
                        writeln!(f, "{l}")?;
                    }
                    f.flush()?;
                }
                None => {
                    for l in &labels {
                        println!("{l}");
                    }
                }
            }
            println!(
                "{}",
                serde_json::json!({
                    "algo": algo.name(),
                    "k": labels.len(),
                    "influence_mean": outcome.estimate.mean,
                    "ci95": outcome.estimate.ci95_halfwidth,
                    "seconds": outcome.selection_seconds,
                })
            );
            Ok(EXIT_OK)
        }

        Command::Bench {
            graph,
            weights,
            algos,
            budgets,
            samples_select,
            samples_eval,
            gamma,
            partition_in,
            out,
            no_timing,
        } => {
            let weights = match parse_weights(&weights) {
                Ok(w) => w,
                Err(e) => return Ok(config_error(e)),
            };
            let algorithms = match parse_algos(&algos) {
                Ok(a) => a,
                Err(e) => return Ok(config_error(e)),
            };
            if ModularityParams::new(gamma).is_err() {
                return Ok(config_error(format!("invalid gamma {gamma}")));
            }
            let g = load_graph(&fetcher, &graph, weights, rng_seed)?;
            let partition = load_partition_arg(&g, &partition_in)?;
            let cfg = ExperimentConfig {
                network: graph.clone(),
                weights,
                algorithms,
                budgets,
                pipeline: PipelineConfig {
                    gamma,
                    samples_select,
                    samples_eval,
                    seed: rng_seed,
                },
                partition,
                out_path: out.clone(),
                no_timing,
            };
            if let Err(e) = cfg.validate() {
                return Ok(config_error(e));
            }
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            let report = run_experiments(&g, &cfg, BufWriter::new(file))?;
            eprintln!(
                "wrote {} rows to {} ({} failures)",
                report.rows.len(),
                out.display(),
                report.failures.len()
            );
            Ok(if report.failures.is_empty() {
                EXIT_OK
            } else {
                EXIT_RUN_FAILURE
            })
        }
    }
}
