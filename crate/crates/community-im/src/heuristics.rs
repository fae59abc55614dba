//! Closed-form node scores: diffusion degree, community-based diffusion
//! degree, and the plain degree baseline.
//!
//! The diffusion degree of `v` sums, over every node `u` within two hops,
//! the probability that at least one length-≤2 path from `v` to `u` is
//! fully live. Paths of length at most two to a fixed target are pairwise
//! edge-disjoint, so the failure probabilities multiply exactly. The
//! community-based variant keeps the same sum but only counts targets
//! outside `v`'s community; intermediate nodes are unrestricted.

use rayon::prelude::*;

use crate::community::Partition;
use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedDigraph};

/// A scored node, as emitted by the `scores` CSV dump.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeScore {
    pub node: NodeId,
    pub score: f64,
}

/// Per-target survival products for one source node. `one_minus[u]` holds
/// the probability that no enumerated path to `u` is live.
struct TwoHopAccumulator {
    one_minus: Vec<f64>,
    touched: Vec<NodeId>,
    seen: Vec<bool>,
}

impl TwoHopAccumulator {
    fn new(n: usize) -> Self {
        TwoHopAccumulator {
            one_minus: vec![1.0; n],
            touched: Vec::new(),
            seen: vec![false; n],
        }
    }

    #[inline]
    fn multiply(&mut self, target: NodeId, miss: f64) {
        if !self.seen[target as usize] {
            self.seen[target as usize] = true;
            self.touched.push(target);
        }
        self.one_minus[target as usize] *= miss;
    }

    fn accumulate(&mut self, g: &WeightedDigraph, v: NodeId) {
        for (w, p1) in g.out_edges(v) {
            self.multiply(w, 1.0 - p1);
            for (u, p2) in g.out_edges(w) {
                if u != v {
                    self.multiply(u, 1.0 - p1 * p2);
                }
            }
        }
    }

    fn drain_sum(&mut self, mut keep: impl FnMut(NodeId) -> bool) -> f64 {
        let mut total = 0.0;
        for &u in &self.touched {
            if keep(u) {
                total += 1.0 - self.one_minus[u as usize];
            }
            self.one_minus[u as usize] = 1.0;
            self.seen[u as usize] = false;
        }
        self.touched.clear();
        total
    }
}

/// Expected number of two-hop neighbors activated by seeding `v` alone,
/// restricted to paths of length at most two.
pub fn diffusion_degree(g: &WeightedDigraph, v: NodeId) -> Result<f64> {
    g.check_node(v)?;
    let mut acc = TwoHopAccumulator::new(g.node_count());
    acc.accumulate(g, v);
    Ok(acc.drain_sum(|_| true))
}

/// Diffusion degree of `v` counting only targets outside `v`'s community.
pub fn cdd(g: &WeightedDigraph, part: &Partition, v: NodeId) -> Result<f64> {
    g.check_node(v)?;
    part.check_covers(g)?;
    let home = part.community_of(v);
    let mut acc = TwoHopAccumulator::new(g.node_count());
    acc.accumulate(g, v);
    Ok(acc.drain_sum(|u| part.community_of(u) != home))
}

/// Diffusion degree of every node, scored in parallel.
pub fn diffusion_degree_all(g: &WeightedDigraph) -> Vec<f64> {
    score_all(g, |acc, _v| acc.drain_sum(|_| true))
}

/// CDD of every node under `part`, scored in parallel.
pub fn cdd_all(g: &WeightedDigraph, part: &Partition) -> Result<Vec<f64>> {
    part.check_covers(g)?;
    Ok(score_all(g, |acc, v| {
        let home = part.community_of(v);
        acc.drain_sum(|u| part.community_of(u) != home)
    }))
}

fn score_all(
    g: &WeightedDigraph,
    finish: impl Fn(&mut TwoHopAccumulator, NodeId) -> f64 + Sync,
) -> Vec<f64> {
    let n = g.node_count();
    let mut scores = vec![0.0; n];
    (0..n as NodeId)
        .into_par_iter()
        .map_init(
            || TwoHopAccumulator::new(n),
            |acc, v| {
                acc.accumulate(g, v);
                finish(acc, v)
            },
        )
        .collect_into_vec(&mut scores);
    scores
}

/// Pair every node with its score and sort best-first, ties broken by
/// ascending node index.
pub fn rank_nodes(scores: &[f64]) -> Vec<NodeScore> {
    let mut ranked: Vec<NodeScore> = scores
        .iter()
        .enumerate()
        .map(|(v, &score)| NodeScore {
            node: v as NodeId,
            score,
        })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.node.cmp(&b.node)));
    ranked
}

/// The `k` nodes of highest out-degree, descending, ties broken by
/// ascending node index.
pub fn degree_seeds(g: &WeightedDigraph, k: usize) -> Result<Vec<NodeId>> {
    if k == 0 {
        return Err(Error::ZeroBudget);
    }
    if k > g.node_count() {
        return Err(Error::BudgetTooLarge {
            k,
            n: g.node_count(),
        });
    }
    let mut order: Vec<NodeId> = (0..g.node_count() as NodeId).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.out_degree(v)), v));
    order.truncate(k);
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_edge_list, parse_weighted_edge_list};
    use std::io::Cursor;

    fn graph(text: &str) -> WeightedDigraph {
        parse_weighted_edge_list(Cursor::new(text)).unwrap()
    }

    #[test]
    fn dd_of_isolated_node_is_zero() {
        let g = graph("0 1 0.5");
        assert_eq!(diffusion_degree(&g, 1).unwrap(), 0.0);
    }

    #[test]
    fn dd_on_half_path() {
        let g = graph("0 1 0.5\n1 2 0.5");
        let dd = diffusion_degree(&g, 0).unwrap();
        assert!((dd - 0.75).abs() < 1e-12);
    }

    #[test]
    fn dd_on_half_triangle() {
        let g = graph("0 1 0.5\n0 2 0.5\n1 0 0.5\n1 2 0.5\n2 0 0.5\n2 1 0.5");
        for v in 0..3 {
            let dd = diffusion_degree(&g, v).unwrap();
            assert!((dd - 1.25).abs() < 1e-12, "dd({v}) = {dd}");
        }
    }

    #[test]
    fn cdd_vanishes_when_two_hop_set_is_internal() {
        let g = graph("0 1 0.5\n1 0 0.5");
        let part = Partition::single_block(2);
        assert_eq!(cdd(&g, &part, 0).unwrap(), 0.0);
    }

    #[test]
    fn cdd_single_path_products() {
        // communities {a, b} and {c}; a -> b 0.5, b -> c 0.4
        let g = graph("0 1 0.5\n1 2 0.4");
        let part = Partition::from_assignment(vec![0, 0, 1]).unwrap();
        assert!((cdd(&g, &part, 1).unwrap() - 0.4).abs() < 1e-12);
        assert!((cdd(&g, &part, 0).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn cdd_equals_dd_under_singleton_partition() {
        let g = graph("0 1 0.3\n1 2 0.7\n2 0 0.2\n0 2 0.9\n2 3 0.5");
        let part = Partition::singletons(g.node_count());
        for v in 0..g.node_count() as NodeId {
            let a = cdd(&g, &part, v).unwrap();
            let b = diffusion_degree(&g, v).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn cdd_bounded_by_dd_and_two_hop_count() {
        let g = graph("0 1 0.8\n1 2 0.6\n0 2 0.1\n2 3 0.9\n3 0 0.4");
        let part = Partition::from_assignment(vec![0, 0, 1, 1]).unwrap();
        for v in 0..g.node_count() as NodeId {
            let c = cdd(&g, &part, v).unwrap();
            let d = diffusion_degree(&g, v).unwrap();
            let n2 = g.two_hop_neighbors(v).unwrap().len() as f64;
            assert!(0.0 <= c && c <= d + 1e-15 && d <= n2 + 1e-15);
        }
    }

    #[test]
    fn bulk_scores_match_single_node_scores() {
        let g = graph("0 1 0.8\n1 2 0.6\n0 2 0.1\n2 3 0.9\n3 0 0.4");
        let part = Partition::from_assignment(vec![0, 0, 1, 1]).unwrap();
        let dd = diffusion_degree_all(&g);
        let cd = cdd_all(&g, &part).unwrap();
        for v in 0..g.node_count() as NodeId {
            assert_eq!(
                dd[v as usize].to_bits(),
                diffusion_degree(&g, v).unwrap().to_bits()
            );
            assert_eq!(
                cd[v as usize].to_bits(),
                cdd(&g, &part, v).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn degree_seeds_picks_star_center() {
        let g = parse_edge_list(Cursor::new("0 1\n0 2\n0 3\n0 4\n0 5")).unwrap();
        assert_eq!(degree_seeds(&g, 1).unwrap(), vec![0]);
    }

    #[test]
    fn degree_seeds_breaks_ties_by_index() {
        // 4-cycle, every node has out-degree 2
        let g = parse_edge_list(Cursor::new("0 1\n1 2\n2 3\n3 0")).unwrap();
        assert_eq!(degree_seeds(&g, 2).unwrap(), vec![0, 1]);
    }

    #[test]
    fn degree_seeds_on_doubled_path_picks_middle() {
        let g = parse_edge_list(Cursor::new("0 1\n1 2")).unwrap();
        assert_eq!(degree_seeds(&g, 1).unwrap(), vec![1]);
    }

    #[test]
    fn degree_seeds_validates_budget() {
        let g = parse_edge_list(Cursor::new("0 1")).unwrap();
        assert!(degree_seeds(&g, 0).is_err());
        assert!(degree_seeds(&g, 3).is_err());
    }

    #[test]
    fn rank_nodes_sorts_descending_with_index_ties() {
        let ranked = rank_nodes(&[0.5, 2.0, 0.5, 1.0]);
        let order: Vec<NodeId> = ranked.iter().map(|s| s.node).collect();
        assert_eq!(order, vec![1, 3, 0, 2]);
        assert_eq!(ranked[0].score, 2.0);
    }
}
