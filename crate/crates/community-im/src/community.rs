//! Hard partitioning by modularity maximization, modularity scoring, and
//! partition file I/O.
//!
//! Detection runs Louvain-style local moving plus graph aggregation, with
//! a refinement pass between the two that splits internally disconnected
//! communities. The refinement gives the guarantee that every returned
//! community is connected; splitting a disconnected community never
//! lowers modularity. The objective during detection is
//! `sum_i (m_i - gamma * K_i^2 / (4m))` over the unit-weight undirected
//! view of the graph: activation probabilities are diffusion parameters,
//! not topology, so they carry no weight here.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedDigraph};
use crate::rng;

/// Gains below this end a local-moving pass.
const MIN_PASS_GAIN: f64 = 1e-9;
/// Upper bound on aggregation levels.
const MAX_LEVELS: usize = 100;

/// Modularity resolution. Values above one favor smaller communities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModularityParams {
    gamma: f64,
}

impl ModularityParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma.is_finite() && gamma > 0.0 {
            Ok(ModularityParams { gamma })
        } else {
            Err(Error::BadResolution(gamma))
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl Default for ModularityParams {
    fn default() -> Self {
        ModularityParams { gamma: 1.0 }
    }
}

/// Hard assignment of every node to exactly one community, with community
/// ids contiguous in `0..community_count` and every community nonempty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<u32>,
    community_count: usize,
}

impl Partition {
    /// Validate an assignment: ids must be contiguous from zero with no
    /// empty community.
    pub fn from_assignment(assignment: Vec<u32>) -> Result<Self> {
        let count = match assignment.iter().max() {
            Some(&max) => max as usize + 1,
            None => 0,
        };
        let mut seen = vec![false; count];
        for &c in &assignment {
            seen[c as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidInput(format!(
                "community ids not contiguous: id {missing} is empty"
            )));
        }
        Ok(Partition {
            assignment,
            community_count: count,
        })
    }

    /// Renumber arbitrary ids to contiguous ids in order of first
    /// appearance by node index.
    pub fn normalize(raw: &[u32]) -> Self {
        let mut remap: HashMap<u32, u32> = HashMap::new();
        let mut assignment = Vec::with_capacity(raw.len());
        for &c in raw {
            let next = remap.len() as u32;
            let id = *remap.entry(c).or_insert(next);
            assignment.push(id);
        }
        Partition {
            assignment,
            community_count: remap.len(),
        }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            assignment: (0..n as u32).collect(),
            community_count: n,
        }
    }

    pub fn single_block(n: usize) -> Self {
        Partition {
            assignment: vec![0; n],
            community_count: if n == 0 { 0 } else { 1 },
        }
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn community_count(&self) -> usize {
        self.community_count
    }

    pub fn community_of(&self, v: NodeId) -> u32 {
        self.assignment[v as usize]
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    /// Member lists per community, each in ascending node order.
    pub fn members(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.community_count];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c as usize].push(v as NodeId);
        }
        out
    }

    pub fn check_community(&self, c: u32) -> Result<()> {
        if (c as usize) < self.community_count {
            Ok(())
        } else {
            Err(Error::CommunityOutOfRange(c))
        }
    }

    pub fn check_covers(&self, g: &WeightedDigraph) -> Result<()> {
        if self.assignment.len() != g.node_count() {
            return Err(Error::InvalidInput(format!(
                "partition covers {} nodes, graph has {}",
                self.assignment.len(),
                g.node_count()
            )));
        }
        Ok(())
    }
}

/// Undirected unit-weight multigraph used during detection. Aggregation
/// introduces weighted edges and self-loops.
struct LevelGraph {
    adj: Vec<Vec<(u32, f64)>>,
    self_loop: Vec<f64>,
    degree: Vec<f64>,
    total_weight: f64,
}

impl LevelGraph {
    fn from_digraph(g: &WeightedDigraph) -> Self {
        let n = g.node_count();
        let mut adj = vec![Vec::new(); n];
        let pairs = g.undirected_unit_edges();
        for &(u, v) in &pairs {
            adj[u as usize].push((v, 1.0));
            adj[v as usize].push((u, 1.0));
        }
        for row in &mut adj {
            row.sort_unstable_by_key(|&(v, _)| v);
        }
        let degree: Vec<f64> = adj.iter().map(|row| row.len() as f64).collect();
        LevelGraph {
            adj,
            self_loop: vec![0.0; n],
            degree,
            total_weight: pairs.len() as f64,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Collapse communities into super-nodes. `comm` must be contiguous.
    fn aggregate(&self, comm: &[u32], count: usize) -> LevelGraph {
        let mut self_loop = vec![0.0; count];
        let mut degree = vec![0.0; count];
        let mut cross: Vec<(u32, u32, f64)> = Vec::new();
        for u in 0..self.len() {
            let cu = comm[u];
            self_loop[cu as usize] += self.self_loop[u];
            degree[cu as usize] += self.degree[u];
            for &(v, w) in &self.adj[u] {
                let cv = comm[v as usize];
                if cu == cv {
                    if u <= v as usize {
                        self_loop[cu as usize] += w;
                    }
                } else {
                    cross.push((cu, cv, w));
                }
            }
        }
        cross.sort_unstable_by_key(|&(cu, cv, _)| (cu, cv));
        let mut adj = vec![Vec::new(); count];
        for &(cu, cv, w) in &cross {
            match adj[cu as usize].last_mut() {
                Some(&mut (last, ref mut acc)) if last == cv => *acc += w,
                _ => adj[cu as usize].push((cv, w)),
            }
        }
        LevelGraph {
            adj,
            self_loop,
            degree,
            total_weight: self.total_weight,
        }
    }
}

/// Gain, in unnormalized modularity units, of moving `v` (degree `k_v`,
/// currently removed from every community) into a community whose degree
/// sum is `big_k` and to which `v` has edge weight `w_to`.
fn insertion_score(w_to: f64, k_v: f64, big_k: f64, gamma: f64, m: f64) -> f64 {
    w_to - gamma * k_v * big_k / (2.0 * m)
}

/// One full node sweep in `order`; returns total gain. `comm_degree`
/// tracks the degree sum of each community and is kept up to date.
fn local_move_pass(
    level: &LevelGraph,
    comm: &mut [u32],
    comm_degree: &mut [f64],
    order: &[u32],
    gamma: f64,
    w_to_buf: &mut [f64],
) -> f64 {
    let m = level.total_weight;
    let mut pass_gain = 0.0;
    let mut candidates: Vec<u32> = Vec::new();

    for &v in order {
        let v = v as usize;
        let current = comm[v];
        let k_v = level.degree[v];
        comm_degree[current as usize] -= k_v;

        candidates.clear();
        for &(u, w) in &level.adj[v] {
            let c = comm[u as usize];
            if w_to_buf[c as usize] == 0.0 {
                candidates.push(c);
            }
            w_to_buf[c as usize] += w;
        }
        candidates.sort_unstable();

        let stay = insertion_score(
            w_to_buf[current as usize],
            k_v,
            comm_degree[current as usize],
            gamma,
            m,
        );
        let mut best_comm = current;
        let mut best_score = stay;
        for &c in &candidates {
            if c == current {
                continue;
            }
            let score =
                insertion_score(w_to_buf[c as usize], k_v, comm_degree[c as usize], gamma, m);
            if score > best_score {
                best_score = score;
                best_comm = c;
            }
        }

        for &c in &candidates {
            w_to_buf[c as usize] = 0.0;
        }
        // current may have no neighbors in it; make sure it's cleared too
        w_to_buf[current as usize] = 0.0;

        comm[v] = best_comm;
        comm_degree[best_comm as usize] += k_v;
        pass_gain += best_score - stay;
    }
    pass_gain
}

/// Split every community into its connected components (intra-community
/// edges only) and renumber contiguously. Never decreases modularity.
fn split_disconnected(level: &LevelGraph, comm: &[u32]) -> (Vec<u32>, usize) {
    let n = level.len();
    let mut out = vec![u32::MAX; n];
    let mut next = 0u32;
    let mut queue = Vec::new();
    for start in 0..n {
        if out[start] != u32::MAX {
            continue;
        }
        let home = comm[start];
        out[start] = next;
        queue.push(start);
        while let Some(u) = queue.pop() {
            for &(v, _) in &level.adj[u] {
                let v = v as usize;
                if comm[v] == home && out[v] == u32::MAX {
                    out[v] = next;
                    queue.push(v);
                }
            }
        }
        next += 1;
    }
    (out, next as usize)
}

/// Unnormalized modularity of a `LevelGraph` under `comm`; detection-side
/// counterpart of [`modularity`], used to verify move deltas.
#[cfg(test)]
fn level_modularity(level: &LevelGraph, comm: &[u32], gamma: f64) -> f64 {
    let count = comm.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut internal = vec![0.0; count];
    let mut degree = vec![0.0; count];
    for u in 0..level.len() {
        let cu = comm[u] as usize;
        internal[cu] += level.self_loop[u];
        degree[cu] += level.degree[u];
        for &(v, w) in &level.adj[u] {
            if comm[v as usize] as usize == cu && u <= v as usize {
                internal[cu] += w;
            }
        }
    }
    let m = level.total_weight;
    (0..count)
        .map(|c| internal[c] - gamma * degree[c] * degree[c] / (4.0 * m))
        .sum()
}

/// Modularity of `part` under resolution `params.gamma()`:
/// `sum_i (m_i - gamma * K_i^2 / (4m))` on the unit-weight undirected
/// view, where `m_i` counts internal edges, `K_i` sums member degrees,
/// and `m` counts all edges.
pub fn modularity(g: &WeightedDigraph, part: &Partition, params: ModularityParams) -> Result<f64> {
    part.check_covers(g)?;
    let pairs = g.undirected_unit_edges();
    let m = pairs.len() as f64;
    if pairs.is_empty() {
        return Err(Error::ModularityUndefined);
    }
    let gamma = params.gamma();
    let c = part.community_count();
    let mut internal = vec![0.0; c];
    let mut degree = vec![0.0; c];
    for &(u, v) in &pairs {
        let cu = part.community_of(u);
        let cv = part.community_of(v);
        degree[cu as usize] += 1.0;
        degree[cv as usize] += 1.0;
        if cu == cv {
            internal[cu as usize] += 1.0;
        }
    }
    Ok((0..c)
        .map(|i| internal[i] - gamma * degree[i] * degree[i] / (4.0 * m))
        .sum())
}

/// `modularity` at resolution one, divided by the total edge count;
/// lands in [-0.5, 1] and is the conventional reported score.
pub fn normalized_modularity(g: &WeightedDigraph, part: &Partition) -> Result<f64> {
    let m = g.undirected_edge_count() as f64;
    if m == 0.0 {
        return Err(Error::ModularityUndefined);
    }
    Ok(modularity(g, part, ModularityParams::default())? / m)
}

/// Detect communities by local moving + aggregation, with a refinement
/// pass that splits internally disconnected communities before each
/// aggregation. Deterministic in `(g, params, seed)`; every community in
/// the result is internally connected.
pub fn detect_communities(
    g: &WeightedDigraph,
    params: ModularityParams,
    seed: u64,
) -> Result<Partition> {
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let gamma = params.gamma();
    let mut rng = ChaCha8Rng::seed_from_u64(rng::derive_seed(seed, rng::DOMAIN_PARTITION));

    let n = g.node_count();
    let mut level = LevelGraph::from_digraph(g);
    // composition map: original node -> node of the current level
    let mut node_to_super: Vec<u32> = (0..n as u32).collect();

    // no edges: nothing to optimize, every node is its own community
    if level.total_weight == 0.0 {
        return Ok(Partition::singletons(n));
    }

    for _ in 0..MAX_LEVELS {
        let ln = level.len();
        // visit order is drawn once per level and reused across passes
        let mut order: Vec<u32> = (0..ln as u32).collect();
        order.shuffle(&mut rng);

        let mut comm: Vec<u32> = (0..ln as u32).collect();
        let mut comm_degree = level.degree.clone();
        let mut w_to_buf = vec![0.0; ln];
        loop {
            let gain = local_move_pass(
                &level,
                &mut comm,
                &mut comm_degree,
                &order,
                gamma,
                &mut w_to_buf,
            );
            if gain < MIN_PASS_GAIN {
                break;
            }
        }

        let (refined, count) = split_disconnected(&level, &comm);
        if count == ln {
            break; // nothing merged at this level
        }
        for s in node_to_super.iter_mut() {
            *s = refined[*s as usize];
        }
        level = level.aggregate(&refined, count);
    }

    Ok(Partition::normalize(&node_to_super))
}

/// Write `node_label community_id` lines, one per node in dense order.
pub fn write_partition<W: Write>(
    g: &WeightedDigraph,
    part: &Partition,
    mut writer: W,
) -> Result<()> {
    part.check_covers(g)?;
    for v in 0..g.node_count() as NodeId {
        writeln!(writer, "{} {}", g.external_id(v), part.community_of(v))?;
    }
    Ok(())
}

/// Parse a partition file against `g`. Every node must appear exactly
/// once, labels must exist in the graph, and ids must be contiguous.
pub fn parse_partition<R: BufRead>(g: &WeightedDigraph, reader: R) -> Result<Partition> {
    let mut assignment: Vec<Option<u32>> = vec![None; g.node_count()];
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
                    msg: "expected `node_label community_id`".into(),
                })
            }
        };
        let label: u64 = a.parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("expected integer node label, got {a:?}"),
        })?;
        let comm: u32 = b.parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("expected integer community id, got {b:?}"),
        })?;
        let node = g.node_by_label(label).ok_or(Error::UnknownLabel(label))?;
        if assignment[node as usize].is_some() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("node {label} assigned twice"),
            });
        }
        assignment[node as usize] = Some(comm);
    }
    let assignment: Vec<u32> = assignment
        .into_iter()
        .enumerate()
        .map(|(v, c)| {
            c.ok_or_else(|| {
                Error::InvalidInput(format!(
                    "node {} missing from partition file",
                    g.external_id(v as NodeId)
                ))
            })
        })
        .collect::<Result<_>>()?;
    Partition::from_assignment(assignment)
}

pub fn parse_partition_path<P: AsRef<std::path::Path>>(
    g: &WeightedDigraph,
    path: P,
) -> Result<Partition> {
    let file = std::fs::File::open(path)?;
    parse_partition(g, std::io::BufReader::new(file))
}
