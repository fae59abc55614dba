//! Batch experiment harness: graph loading under a weight model, stats,
//! and the bench loop that emits one CSV row per (algorithm, budget).
//!
//! Rows are written incrementally so an interrupted run still leaves a
//! usable file. Selection work is shared across budgets: greedy schedules
//! and progressive allocations are nested, so each algorithm runs once at
//! the largest budget and smaller budgets read prefixes, with selection
//! time recorded at each checkpoint.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use community_im::{
    detect_communities, normalized_modularity, Algorithm, EdgeWeightModel, ModularityParams,
    Partition, PipelineConfig, WeightedDigraph,
};

use crate::dataset::Fetcher;

/// Weight model choice as spelled on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightChoice {
    Wc,
    Tv,
    Explicit,
}

impl WeightChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "wc" => Some(WeightChoice::Wc),
            "tv" => Some(WeightChoice::Tv),
            "explicit" => Some(WeightChoice::Explicit),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            WeightChoice::Wc => "wc",
            WeightChoice::Tv => "tv",
            WeightChoice::Explicit => "explicit",
        }
    }
}

impl fmt::Display for WeightChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Resolve `source` through the fetcher and parse it under the chosen
/// weight model. `wc`/`tv` expect an undirected SNAP list; `explicit`
/// expects a directed `u v p` list.
pub fn load_graph(
    fetcher: &Fetcher,
    source: &str,
    weights: WeightChoice,
    rng_seed: u64,
) -> Result<WeightedDigraph> {
    let path = fetcher.resolve(source)?;
    let g = match weights {
        WeightChoice::Explicit => community_im::parse_weighted_edge_list_path(&path)
            .with_context(|| format!("parsing {}", path.display()))?,
        _ => {
            let g = community_im::parse_edge_list_path(&path)
                .with_context(|| format!("parsing {}", path.display()))?;
            let model = match weights {
                WeightChoice::Wc => EdgeWeightModel::WeightedCascade,
                WeightChoice::Tv => EdgeWeightModel::Trivalency { seed: rng_seed },
                WeightChoice::Explicit => unreachable!(),
            };
            model.assign(g)
        }
    };
    Ok(g)
}

/// Structural summary of a graph, as reported by `stats`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub avg_degree: f64,
    pub normalized_modularity: f64,
    pub communities: usize,
}

/// Node count, undirected edge count, average degree (2m/n), and the
/// normalized modularity of a freshly detected partition.
pub fn graph_stats(g: &WeightedDigraph, gamma: f64, seed: u64) -> Result<GraphStats> {
    let nodes = g.node_count();
    let edges = g.undirected_edge_count();
    let part = detect_communities(g, ModularityParams::new(gamma)?, seed)?;
    Ok(GraphStats {
        nodes,
        edges,
        avg_degree: 2.0 * edges as f64 / nodes as f64,
        normalized_modularity: normalized_modularity(g, &part)?,
        communities: part.community_count(),
    })
}

/// One bench result. Floats are already quantized to the four decimals
/// the CSV carries, so writing and re-reading a row is lossless.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub network: String,
    pub weight_model: String,
    pub algorithm: String,
    pub budget: usize,
    pub influence_mean: f64,
    pub ci95: f64,
    pub runtime_seconds: f64,
    pub seed_count_actual: usize,
}

pub const CSV_HEADER: &str =
    "network,weight_model,algorithm,budget,influence_mean,ci95,runtime_seconds,seed_count_actual";

fn quantize4(x: f64) -> f64 {
    format!("{x:.4}").parse().expect("fixed-format float")
}

impl ResultRow {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        network: &str,
        weight_model: &str,
        algorithm: &str,
        budget: usize,
        influence_mean: f64,
        ci95: f64,
        runtime_seconds: f64,
        seed_count_actual: usize,
    ) -> Self {
        ResultRow {
            network: network.to_string(),
            weight_model: weight_model.to_string(),
            algorithm: algorithm.to_string(),
            budget,
            influence_mean: quantize4(influence_mean),
            ci95: quantize4(ci95),
            runtime_seconds: quantize4(runtime_seconds),
            seed_count_actual,
        }
    }

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:.4},{:.4},{:.4},{}",
            self.network,
            self.weight_model,
            self.algorithm,
            self.budget,
            self.influence_mean,
            self.ci95,
            self.runtime_seconds,
            self.seed_count_actual
        )
    }

    pub fn parse_csv_line(line: &str) -> Result<Self> {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 8 {
            bail!("expected 8 columns, got {}", cols.len());
        }
        Ok(ResultRow {
            network: cols[0].to_string(),
            weight_model: cols[1].to_string(),
            algorithm: cols[2].to_string(),
            budget: cols[3].parse()?,
            influence_mean: cols[4].parse()?,
            ci95: cols[5].parse()?,
            runtime_seconds: cols[6].parse()?,
            seed_count_actual: cols[7].parse()?,
        })
    }
}

/// Full bench description. `no_timing` zeroes the runtime column so two
/// runs of the same config produce byte-identical files.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub network: String,
    pub weights: WeightChoice,
    pub algorithms: Vec<Algorithm>,
    pub budgets: Vec<usize>,
    pub pipeline: PipelineConfig,
    pub partition: Option<Partition>,
    pub out_path: PathBuf,
    pub no_timing: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            bail!("algorithm list is empty");
        }
        if self.budgets.is_empty() {
            bail!("budget list is empty");
        }
        if self.budgets[0] == 0 {
            bail!("budgets must be positive");
        }
        if !self.budgets.windows(2).all(|w| w[0] < w[1]) {
            bail!("budgets must be strictly increasing");
        }
        if self.pipeline.samples_select == 0 || self.pipeline.samples_eval == 0 {
            bail!("sample counts must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Default)]
pub struct RunReport {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<String>,
}

/// Run every (algorithm, budget) cell, streaming rows to `out` as they
/// finish. A failing algorithm is reported and skipped; the run goes on.
pub fn run_experiments<W: Write>(
    g: &WeightedDigraph,
    cfg: &ExperimentConfig,
    mut out: W,
) -> Result<RunReport> {
    cfg.validate()?;
    let mut report = RunReport::default();
    writeln!(out, "{CSV_HEADER}")?;
    out.flush()?;

    for &algo in &cfg.algorithms {
        let outcomes = community_im::run_pipeline_budgets(
            g,
            algo,
            &cfg.budgets,
            &cfg.pipeline,
            cfg.partition.as_ref(),
        );
        match outcomes {
            Err(err) => {
                for &k in &cfg.budgets {
                    report
                        .failures
                        .push(format!("{} at budget {k}: {err}", algo.name()));
                }
                eprintln!("error: {} failed: {err}", algo.name());
            }
            Ok(outcomes) => {
                for o in outcomes {
                    let row = ResultRow::new(
                        &cfg.network,
                        cfg.weights.label(),
                        algo.name(),
                        o.requested_budget,
                        o.estimate.mean,
                        o.estimate.ci95_halfwidth,
                        if cfg.no_timing {
                            0.0
                        } else {
                            o.selection_seconds
                        },
                        o.seeds.len(),
                    );
                    writeln!(out, "{}", row.to_csv_line())?;
                    out.flush()?;
                    report.rows.push(row);
                }
            }
        }
    }
    Ok(report)
}
