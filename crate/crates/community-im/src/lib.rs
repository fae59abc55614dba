//! Influence maximization under the independent cascade model.
//!
//! The crate provides the pieces of a community-aware seed-selection
//! pipeline and the pipeline itself:
//!
//! - [`graph`]: directed graphs with per-edge activation probabilities,
//!   SNAP edge-list ingestion, and the weighted-cascade / trivalency
//!   weight models.
//! - [`community`]: modularity with a resolution parameter, Leiden-style
//!   detection (local moving + refinement + aggregation), and partition
//!   file I/O.
//! - [`diffusion`]: cascade simulation, Monte Carlo influence estimation
//!   with reproducible parallel streams, the within-community weighted
//!   estimator, and an exact enumeration oracle for small graphs.
//! - [`heuristics`]: diffusion degree, community-based diffusion degree,
//!   and the high-degree baseline.
//! - [`seeding`]: CELF, lazy per-community candidate schedules,
//!   progressive budgeting, and the end-to-end pipelines.
//!
//! Everything stochastic takes an explicit 64-bit seed and is
//! deterministic in it, independent of thread count.

pub mod community;
pub mod diffusion;
pub mod error;
pub mod graph;
pub mod heuristics;
pub mod rng;
pub mod seeding;

pub use community::{
    detect_communities, modularity, normalized_modularity, parse_partition, parse_partition_path,
    write_partition, ModularityParams, Partition,
};
pub use diffusion::{
    estimate_influence, estimate_influence_in_community, exact_influence, simulate_cascade,
    CascadeResult, InfluenceEstimate,
};
pub use error::{Error, Result};
pub use graph::{
    assign_weights_tv, assign_weights_wc, parse_edge_list, parse_edge_list_path,
    parse_weighted_edge_list, parse_weighted_edge_list_path, write_weighted_edge_list,
    EdgeWeightModel, NodeId, WeightedDigraph,
};
pub use heuristics::{
    cdd, cdd_all, degree_seeds, diffusion_degree, diffusion_degree_all, rank_nodes, NodeScore,
};
pub use seeding::{
    celf, community_candidates, progressive_budget, run_pipeline, run_pipeline_budgets, Algorithm,
    BudgetAllocation, CandidateHeuristic, PipelineConfig, PipelineOutcome, SeedSchedule,
};
