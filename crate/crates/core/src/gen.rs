//! Graph generators.
//!
//! All randomized generators draw from [`Rng`], which is ChaCha8 seeded through
//! `seed_from_u64`; outputs for a given seed are stable across platforms.

use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DelayGraph, NodeId};

/// The crate-wide seeded generator.
pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unit-delay cycle `0 - 1 - ... - (n-1) - 0`.
pub fn ring(n: usize) -> Result<DelayGraph> {
    if n < 3 {
        return Err(Error::param(format!("ring needs at least 3 nodes, got {n}")));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    DelayGraph::unit(n, &edges)
}

/// Path with the given delays in order.
pub fn path(delays: &[f64]) -> Result<DelayGraph> {
    let edges: Vec<_> = (1..delays.len()).map(|i| (i - 1, i)).collect();
    DelayGraph::new(delays.to_vec(), &edges)
}

/// Unit-delay star: center 0 and `leaves` leaves.
pub fn star(leaves: usize) -> Result<DelayGraph> {
    let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
    DelayGraph::unit(leaves + 1, &edges)
}

pub fn complete(n: usize) -> Result<DelayGraph> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    DelayGraph::unit(n, &edges)
}

/// `K_{a,b}` with sides `0..a` and `a..a+b`.
pub fn complete_bipartite(a: usize, b: usize) -> Result<DelayGraph> {
    let mut edges = Vec::new();
    for u in 0..a {
        for v in a..a + b {
            edges.push((u, v));
        }
    }
    DelayGraph::unit(a + b, &edges)
}

/// Uniform random recursive tree: node `i` attaches to a uniform earlier node.
pub fn random_tree(n: usize, rng: &mut Rng) -> Result<DelayGraph> {
    let edges: Vec<_> = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
    DelayGraph::unit(n, &edges)
}

/// Random spanning tree plus each remaining pair independently with
/// probability `extra`.
pub fn random_connected(n: usize, extra: f64, rng: &mut Rng) -> Result<DelayGraph> {
    if !(0.0..=1.0).contains(&extra) {
        return Err(Error::param(format!("edge probability {extra} outside [0, 1]")));
    }
    let mut order: Vec<NodeId> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: Vec<_> = (1..n).map(|i| (order[rng.random_range(0..i)], order[i])).collect();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(extra) {
                edges.push((u, v));
            }
        }
    }
    DelayGraph::unit(n, &edges)
}

/// Barabási–Albert preferential attachment parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaSpec {
    pub n: usize,
    pub edges_per_node: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Seed clique on `edges_per_node + 1` nodes, then each arriving node links to
/// `edges_per_node` distinct existing nodes drawn proportionally to degree.
/// Unit delays.
pub fn generate_ba(spec: &BaSpec) -> Result<DelayGraph> {
    let BaSpec { n, edges_per_node: m, seed } = *spec;
    if m < 1 || m >= n {
        return Err(Error::param(format!(
            "Barabási–Albert needs 1 <= edges_per_node < n, got edges_per_node={m}, n={n}"
        )));
    }
    let mut rng = rng(seed);
    let mut edges = Vec::with_capacity(m * (m + 1) / 2 + (n - m - 1) * m);
    // Every edge endpoint once: sampling an entry is degree-proportional.
    let mut endpoints: Vec<NodeId> = Vec::with_capacity(2 * edges.capacity());
    for u in 0..=m {
        for v in u + 1..=m {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut targets: Vec<NodeId> = Vec::with_capacity(m);
    for new in m + 1..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, new));
            endpoints.push(t);
            endpoints.push(new);
        }
    }
    DelayGraph::unit(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ba_small_is_complete() {
        let g = generate_ba(&BaSpec { n: 4, edges_per_node: 3, seed: 1 }).unwrap();
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn ba_edge_count_and_determinism() {
        let spec = BaSpec { n: 2000, edges_per_node: 5, seed: 9 };
        let a = generate_ba(&spec).unwrap();
        assert_eq!(a.edge_count(), 15 + 1994 * 5);
        let b = generate_ba(&spec).unwrap();
        assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
    }

    #[test]
    fn ba_max_degree_grows_with_n() {
        let max_deg = |n| {
            let g = generate_ba(&BaSpec { n, edges_per_node: 3, seed: 5 }).unwrap();
            (0..n).map(|v| g.degree(v)).max().unwrap()
        };
        let (a, b, c) = (max_deg(100), max_deg(400), max_deg(1600));
        assert!(a < b && b < c, "{a} {b} {c}");
    }

    #[test]
    fn ba_rejects_bad_parameters() {
        assert!(generate_ba(&BaSpec { n: 5, edges_per_node: 0, seed: 0 }).is_err());
        assert!(generate_ba(&BaSpec { n: 5, edges_per_node: 5, seed: 0 }).is_err());
    }

    #[test]
    fn random_generators_are_connected_and_sized() {
        let mut r = rng(3);
        for n in [2, 5, 17] {
            assert_eq!(random_tree(n, &mut r).unwrap().edge_count(), n - 1);
            assert_eq!(random_connected(n, 0.2, &mut r).unwrap().node_count(), n);
        }
        assert_eq!(complete_bipartite(2, 3).unwrap().edge_count(), 6);
        assert_eq!(complete(5).unwrap().edge_count(), 10);
    }
}
