//! Directed graph model, edge-list ingestion, and activation-probability
//! assignment.
//!
//! Graphs are stored in CSR form over dense node indices `0..n`, with the
//! original file labels kept in a side table. Undirected inputs (the SNAP
//! edge-list format) are doubled into two directed edges; self-loops and
//! duplicate ordered pairs are dropped. A graph is immutable once built:
//! weight assignment consumes the graph and returns a new one.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

pub type NodeId = u32;

/// Edge-weight (activation probability) assignment scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeWeightModel {
    /// Every edge into `v` gets `1 / in_degree(v)`.
    WeightedCascade,
    /// Every directed edge gets a probability drawn uniformly from
    /// `{0.1, 0.01, 0.001}`. The seed makes the assignment reproducible.
    Trivalency { seed: u64 },
    /// Probabilities were supplied by the input file; leave them alone.
    Explicit,
}

impl EdgeWeightModel {
    pub fn assign(self, g: WeightedDigraph) -> WeightedDigraph {
        match self {
            EdgeWeightModel::WeightedCascade => assign_weights_wc(g),
            EdgeWeightModel::Trivalency { seed } => assign_weights_tv(g, seed),
            EdgeWeightModel::Explicit => g,
        }
    }
}

/// Directed graph with a probability per edge, in CSR layout.
#[derive(Clone, Debug)]
pub struct WeightedDigraph {
    external_ids: Vec<u64>,
    label_index: HashMap<u64, NodeId>,
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
    out_probs: Vec<f64>,
    in_degree: Vec<u32>,
}

impl WeightedDigraph {
    /// Build from directed edges over dense indices. Edges are sorted by
    /// (source, target) and deduplicated; callers must have removed
    /// self-loops already.
    fn from_directed_edges(
        external_ids: Vec<u64>,
        mut edges: Vec<(NodeId, NodeId)>,
        probs: Option<Vec<f64>>,
    ) -> Self {
        let n = external_ids.len();
        debug_assert!(edges.iter().all(|&(u, v)| u != v));

        let probs = match probs {
            None => {
                edges.sort_unstable();
                edges.dedup();
                None
            }
            Some(p) => {
                // keep probabilities aligned while sorting
                let mut paired: Vec<((NodeId, NodeId), f64)> =
                    edges.iter().copied().zip(p).collect();
                paired.sort_unstable_by_key(|&(edge, _)| edge);
                edges = paired.iter().map(|e| e.0).collect();
                Some(paired.into_iter().map(|e| e.1).collect())
            }
        };

        let mut out_offsets = vec![0usize; n + 1];
        for &(u, _) in &edges {
            out_offsets[u as usize + 1] += 1;
        }
        for i in 1..=n {
            out_offsets[i] += out_offsets[i - 1];
        }
        let out_targets: Vec<NodeId> = edges.iter().map(|&(_, v)| v).collect();
        let out_probs = probs.unwrap_or_else(|| vec![0.0; out_targets.len()]);

        let mut in_degree = vec![0u32; n];
        for &v in &out_targets {
            in_degree[v as usize] += 1;
        }

        let label_index = external_ids
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i as NodeId))
            .collect();

        WeightedDigraph {
            external_ids,
            label_index,
            out_offsets,
            out_targets,
            out_probs,
            in_degree,
        }
    }

    pub fn node_count(&self) -> usize {
        self.external_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.external_ids.is_empty()
    }

    /// Number of directed edges.
    pub fn directed_edge_count(&self) -> usize {
        self.out_targets.len()
    }

    /// Number of unordered node pairs connected by at least one directed
    /// edge. For doubled undirected inputs this is half the directed count.
    pub fn undirected_edge_count(&self) -> usize {
        let mut count = 0usize;
        for u in 0..self.node_count() as NodeId {
            for &v in self.out_targets_of(u) {
                if u < v || !self.has_edge(v, u) {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.out_targets_of(u).binary_search(&v).is_ok()
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_offsets[v as usize + 1] - self.out_offsets[v as usize]
    }

    pub fn in_degree(&self, v: NodeId) -> u32 {
        self.in_degree[v as usize]
    }

    pub fn out_targets_of(&self, v: NodeId) -> &[NodeId] {
        &self.out_targets[self.out_offsets[v as usize]..self.out_offsets[v as usize + 1]]
    }

    pub fn out_probs_of(&self, v: NodeId) -> &[f64] {
        &self.out_probs[self.out_offsets[v as usize]..self.out_offsets[v as usize + 1]]
    }

    /// Out-edges of `v` as (target, probability) pairs, in ascending target
    /// order.
    pub fn out_edges(&self, v: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.out_targets_of(v)
            .iter()
            .copied()
            .zip(self.out_probs_of(v).iter().copied())
    }

    pub fn external_id(&self, v: NodeId) -> u64 {
        self.external_ids[v as usize]
    }

    pub fn node_by_label(&self, label: u64) -> Option<NodeId> {
        self.label_index.get(&label).copied()
    }

    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if (v as usize) < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange(v))
        }
    }

    /// All nodes `u != v` reachable from `v` by a directed path of length
    /// one or two, in ascending order.
    pub fn two_hop_neighbors(&self, v: NodeId) -> Result<Vec<NodeId>> {
        self.check_node(v)?;
        let mut seen = vec![false; self.node_count()];
        let mut out = Vec::new();
        for &w in self.out_targets_of(v) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                out.push(w);
            }
            for &u in self.out_targets_of(w) {
                if u != v && !seen[u as usize] {
                    seen[u as usize] = true;
                    out.push(u);
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Unordered node pairs `{u, v}` joined by at least one directed edge.
    /// This is the unit-weight undirected view used for modularity.
    pub fn undirected_unit_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut pairs = Vec::with_capacity(self.directed_edge_count() / 2 + 1);
        for u in 0..self.node_count() as NodeId {
            for &v in self.out_targets_of(u) {
                if u < v || !self.has_edge(v, u) {
                    pairs.push((u.min(v), u.max(v)));
                }
            }
        }
        pairs
    }

    /// Subgraph induced by `members` (edges with both endpoints inside).
    /// Returns the subgraph plus the map from subgraph index to parent
    /// index. `members` must be sorted and duplicate-free; external labels
    /// are carried over.
    pub fn induced_subgraph(&self, members: &[NodeId]) -> (WeightedDigraph, Vec<NodeId>) {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        let mut to_sub = vec![NodeId::MAX; self.node_count()];
        for (sub, &parent) in members.iter().enumerate() {
            to_sub[parent as usize] = sub as NodeId;
        }
        let external_ids: Vec<u64> = members.iter().map(|&p| self.external_id(p)).collect();
        let mut edges = Vec::new();
        let mut probs = Vec::new();
        for &parent in members {
            let su = to_sub[parent as usize];
            for (v, p) in self.out_edges(parent) {
                let sv = to_sub[v as usize];
                if sv != NodeId::MAX {
                    edges.push((su, sv));
                    probs.push(p);
                }
            }
        }
        (
            WeightedDigraph::from_directed_edges(external_ids, edges, Some(probs)),
            members.to_vec(),
        )
    }

    /// Verify structural invariants; used by tests and debug builds.
    pub fn validate(&self) -> Result<()> {
        for u in 0..self.node_count() as NodeId {
            let ts = self.out_targets_of(u);
            for (i, &v) in ts.iter().enumerate() {
                if v == u {
                    return Err(Error::InvalidInput(format!("self-loop at node {u}")));
                }
                self.check_node(v)?;
                if i > 0 && ts[i - 1] >= v {
                    return Err(Error::InvalidInput(format!(
                        "duplicate or unsorted adjacency at node {u}"
                    )));
                }
            }
        }
        for (i, &p) in self.out_probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidInput(format!(
                    "probability {p} out of range at edge {i}"
                )));
            }
        }
        let mut indeg = vec![0u32; self.node_count()];
        for &v in &self.out_targets {
            indeg[v as usize] += 1;
        }
        if indeg != self.in_degree {
            return Err(Error::InvalidInput("in-degree table inconsistent".into()));
        }
        Ok(())
    }
}

fn parse_label(token: &str, line: usize) -> Result<u64> {
    token.parse::<u64>().map_err(|_| Error::Parse {
        line,
        msg: format!("expected integer node label, got {token:?}"),
    })
}

/// Parse a SNAP-style undirected edge list: whitespace-separated integer
/// pairs, one edge per line, `#` comment lines. Each undirected edge
/// {u, v} becomes the two directed edges (u, v) and (v, u); self-loops
/// and duplicates are dropped. Dense indices follow first appearance in
/// the file. All probabilities are left at zero.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<WeightedDigraph> {
    let mut labels: Vec<u64> = Vec::new();
    let mut index: HashMap<u64, NodeId> = HashMap::new();
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();

    let intern = |label: u64, labels: &mut Vec<u64>, index: &mut HashMap<u64, NodeId>| {
        *index.entry(label).or_insert_with(|| {
            labels.push(label);
            (labels.len() - 1) as NodeId
        })
    };

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "expected exactly two node labels".into(),
                })
            }
        };
        let u = parse_label(a, lineno)?;
        let v = parse_label(b, lineno)?;
        let ui = intern(u, &mut labels, &mut index);
        let vi = intern(v, &mut labels, &mut index);
        if ui == vi {
            continue; // self-loops cannot affect a cascade
        }
        edges.push((ui, vi));
        edges.push((vi, ui));
    }

    Ok(WeightedDigraph::from_directed_edges(labels, edges, None))
}

/// Parse a directed weighted edge list: `u v p` per line, `#` comments.
/// Unlike the SNAP parser this format is strict: self-loops, duplicate
/// ordered pairs, and probabilities outside [0, 1] are errors.
pub fn parse_weighted_edge_list<R: BufRead>(reader: R) -> Result<WeightedDigraph> {
    let mut labels: Vec<u64> = Vec::new();
    let mut index: HashMap<u64, NodeId> = HashMap::new();
    let mut seen: HashMap<(NodeId, NodeId), usize> = HashMap::new();
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    let mut probs: Vec<f64> = Vec::new();

    let intern = |label: u64, labels: &mut Vec<u64>, index: &mut HashMap<u64, NodeId>| {
        *index.entry(label).or_insert_with(|| {
            labels.push(label);
            (labels.len() - 1) as NodeId
        })
    };

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (a, b, c) = match (tokens.next(), tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), Some(c), None) => (a, b, c),
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "expected `source target probability`".into(),
                })
            }
        };
        let u = parse_label(a, lineno)?;
        let v = parse_label(b, lineno)?;
        let p: f64 = c.parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("expected probability, got {c:?}"),
        })?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("probability {p} outside [0, 1]"),
            });
        }
        let ui = intern(u, &mut labels, &mut index);
        let vi = intern(v, &mut labels, &mut index);
        if ui == vi {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("self-loop at label {u}"),
            });
        }
        if let Some(first) = seen.insert((ui, vi), lineno) {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("duplicate edge {u} -> {v} (first at line {first})"),
            });
        }
        edges.push((ui, vi));
        probs.push(p);
    }

    Ok(WeightedDigraph::from_directed_edges(
        labels,
        edges,
        Some(probs),
    ))
}

pub fn parse_edge_list_path<P: AsRef<Path>>(path: P) -> Result<WeightedDigraph> {
    let file = std::fs::File::open(path)?;
    parse_edge_list(std::io::BufReader::new(file))
}

pub fn parse_weighted_edge_list_path<P: AsRef<Path>>(path: P) -> Result<WeightedDigraph> {
    let file = std::fs::File::open(path)?;
    parse_weighted_edge_list(std::io::BufReader::new(file))
}

/// Write one `u v p` line per directed edge, using external labels.
/// Probabilities are printed in scientific notation with ten significant
/// digits. The format has no way to express an isolated node, so nodes
/// without any edge do not survive a write/parse round trip.
pub fn write_weighted_edge_list<W: Write>(g: &WeightedDigraph, mut writer: W) -> Result<()> {
    for u in 0..g.node_count() as NodeId {
        for (v, p) in g.out_edges(u) {
            writeln!(
                writer,
                "{} {} {:.9e}",
                g.external_id(u),
                g.external_id(v),
                p
            )?;
        }
    }
    Ok(())
}

/// Weighted-cascade assignment: every edge (u, v) gets `1 / in_degree(v)`.
pub fn assign_weights_wc(mut g: WeightedDigraph) -> WeightedDigraph {
    for i in 0..g.out_targets.len() {
        let v = g.out_targets[i];
        g.out_probs[i] = 1.0 / g.in_degree[v as usize] as f64;
    }
    g
}

/// Trivalency assignment: edge `i` (in CSR order) draws uniformly from
/// `{0.1, 0.01, 0.001}` on its own RNG stream, so the result depends only
/// on `(graph, seed)`.
pub fn assign_weights_tv(mut g: WeightedDigraph, seed: u64) -> WeightedDigraph {
    const LEVELS: [f64; 3] = [0.1, 0.01, 0.001];
    for i in 0..g.out_probs.len() {
        let mut rng = rng::tv_stream(seed, i as u64);
        g.out_probs[i] = LEVELS[rng.gen_range(0..3) as usize];
    }
    g
}
