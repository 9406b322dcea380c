//! Node-weighted undirected graphs and their shortest-path delays.
//!
//! A path pays the delay of every vertex it visits except its destination, so
//! `d(s, t)` includes `l(s)` and excludes `l(t)`, and `d(s, s) = 0`. Shortest
//! paths are computed by giving every directed traversal `u -> v` the weight
//! `l(u)` and running an ordinary nonnegative-weight search.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense 0-based node index.
pub type NodeId = usize;

/// Immutable, connected, simple undirected graph with a delay per node.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayGraph {
    adjacency: Vec<Vec<NodeId>>,
    delays: Vec<f64>,
    labels: Vec<String>,
    edge_count: usize,
    uniform: bool,
    binary: bool,
}

impl DelayGraph {
    /// Builds a graph whose node labels are the decimal node ids.
    pub fn new(delays: Vec<f64>, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let labels = (0..delays.len()).map(|v| v.to_string()).collect();
        Self::with_labels(labels, delays, edges)
    }

    /// Builds a unit-delay graph on `n` nodes.
    pub fn unit(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        Self::new(vec![1.0; n], edges)
    }

    /// Builds a graph with explicit labels. Parallel edges are merged; self-loops,
    /// nonpositive delays and disconnected inputs are rejected.
    pub fn with_labels(labels: Vec<String>, delays: Vec<f64>, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        for (v, &d) in delays.iter().enumerate() {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidDelay { node: v, delay: d });
            }
        }
        Self::build(labels, delays, edges)
    }

    fn build(labels: Vec<String>, delays: Vec<f64>, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let n = delays.len();
        if n < 2 {
            return Err(Error::TooFewNodes(n));
        }
        if labels.len() != n {
            return Err(Error::param(format!("{} labels given for {} nodes", labels.len(), n)));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(Error::InvalidNode { node, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut edge_count = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        let graph = DelayGraph {
            adjacency,
            uniform: delays.iter().all(|&d| d == 1.0),
            binary: delays.iter().all(|&d| d == 1.0 || d == 0.0),
            delays,
            labels,
            edge_count: edge_count / 2,
        };
        let components = graph.component_count();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(graph)
    }

    /// Same topology and labels with new delays.
    pub fn with_delays(&self, delays: Vec<f64>) -> Result<Self> {
        if delays.len() != self.node_count() {
            return Err(Error::param(format!("{} delays given for {} nodes", delays.len(), self.node_count())));
        }
        for (v, &d) in delays.iter().enumerate() {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidDelay { node: v, delay: d });
            }
        }
        Ok(DelayGraph {
            adjacency: self.adjacency.clone(),
            uniform: delays.iter().all(|&d| d == 1.0),
            binary: delays.iter().all(|&d| d == 1.0 || d == 0.0),
            delays,
            labels: self.labels.clone(),
            edge_count: self.edge_count,
        })
    }

    /// Materializes an upgrade state: every upgraded node gets delay 0.
    ///
    /// This is the only way to obtain a graph with zero delays; see
    /// [`collapse_zero_delay`] to remove them again.
    pub fn with_upgrades_applied(&self, st: &UpgradeState) -> Result<Self> {
        st.check_against(self)?;
        let delays: Vec<f64> =
            (0..self.node_count()).map(|v| if st.contains(v) { 0.0 } else { self.delays[v] }).collect();
        Ok(DelayGraph {
            adjacency: self.adjacency.clone(),
            uniform: delays.iter().all(|&d| d == 1.0),
            binary: delays.iter().all(|&d| d == 1.0 || d == 0.0),
            delays,
            labels: self.labels.clone(),
            edge_count: self.edge_count,
        })
    }

    pub fn node_count(&self) -> usize {
        self.delays.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v].len()
    }

    pub fn delay(&self, v: NodeId) -> f64 {
        self.delays[v]
    }

    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Node id for an external label.
    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.labels.iter().position(|l| l == label)
    }

    /// True iff every delay equals 1.
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Undirected edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if v < self.node_count() {
            Ok(())
        } else {
            Err(Error::InvalidNode { node: v, n: self.node_count() })
        }
    }

    fn component_count(&self) -> usize {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut components = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &w in &self.adjacency[u] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        components
    }
}

/// The target set `T`: nodes whose delay has been reset to zero.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UpgradeState {
    upgraded: Vec<NodeId>,
    zeroed: Vec<bool>,
}

impl UpgradeState {
    pub fn empty(n: usize) -> Self {
        UpgradeState { upgraded: Vec::new(), zeroed: vec![false; n] }
    }

    pub fn from_nodes(n: usize, nodes: &[NodeId]) -> Result<Self> {
        let mut st = Self::empty(n);
        for &v in nodes {
            st.upgrade(v)?;
        }
        Ok(st)
    }

    /// Adds `v` to the target set.
    pub fn upgrade(&mut self, v: NodeId) -> Result<()> {
        let n = self.zeroed.len();
        match self.zeroed.get_mut(v) {
            None => Err(Error::InvalidNode { node: v, n }),
            Some(true) => Err(Error::AlreadyUpgraded(v)),
            Some(z) => {
                *z = true;
                self.upgraded.push(v);
                Ok(())
            }
        }
    }

    /// Returns a copy with `v` added.
    pub fn with(&self, v: NodeId) -> Result<Self> {
        let mut next = self.clone();
        next.upgrade(v)?;
        Ok(next)
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.zeroed.get(v).copied().unwrap_or(false)
    }

    /// Upgraded nodes in insertion order.
    pub fn upgraded(&self) -> &[NodeId] {
        &self.upgraded
    }

    pub fn zeroed(&self) -> &[bool] {
        &self.zeroed
    }

    pub fn len(&self) -> usize {
        self.upgraded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upgraded.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.zeroed.len()
    }

    pub(crate) fn check_against(&self, g: &DelayGraph) -> Result<()> {
        if self.zeroed.len() != g.node_count() {
            return Err(Error::param(format!(
                "upgrade state sized for {} nodes used with a {}-node graph",
                self.zeroed.len(),
                g.node_count()
            )));
        }
        Ok(())
    }
}

/// Delay of `v` after upgrades: 0 if upgraded, else `l(v)`.
pub fn effective_delay(g: &DelayGraph, st: &UpgradeState, v: NodeId) -> Result<f64> {
    g.check_node(v)?;
    st.check_against(g)?;
    Ok(eff(g, st.zeroed(), v))
}

#[inline]
pub(crate) fn eff(g: &DelayGraph, zeroed: &[bool], v: NodeId) -> f64 {
    if zeroed[v] {
        0.0
    } else {
        g.delays[v]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `dist[t] = d(root, t)`.
    FromRoot,
    /// `dist[s] = d(s, root)`.
    ToRoot,
}

/// Single-source (or single-target) delays under a fixed upgrade state.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    root: NodeId,
    direction: Direction,
    dist: Vec<f64>,
}

impl DistanceField {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn get(&self, v: NodeId) -> f64 {
        self.dist[v]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.dist
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.dist
    }
}

/// Shortest-path delays from (or to) `root` under `st`.
pub fn sssp(g: &DelayGraph, st: &UpgradeState, root: NodeId, direction: Direction) -> Result<DistanceField> {
    g.check_node(root)?;
    st.check_against(g)?;
    let dist = match direction {
        Direction::FromRoot => distances_from(g, st.zeroed(), root),
        Direction::ToRoot => distances_to(g, st.zeroed(), root),
    };
    Ok(DistanceField { root, direction, dist })
}

/// `d(root, t)` for every `t`.
pub(crate) fn distances_from(g: &DelayGraph, zeroed: &[bool], root: NodeId) -> Vec<f64> {
    if g.binary {
        hops_from(g, zeroed, root).into_iter().map(f64::from).collect()
    } else {
        dijkstra(g, zeroed, root)
    }
}

/// `d(s, root)` for every `s`. The vertex set of a path and its reversal agree,
/// so `d(s, root) = d(root, s) - l(root) + l(s)` for `s != root`.
pub(crate) fn distances_to(g: &DelayGraph, zeroed: &[bool], root: NodeId) -> Vec<f64> {
    let mut dist = distances_from(g, zeroed, root);
    let root_delay = eff(g, zeroed, root);
    for (s, d) in dist.iter_mut().enumerate() {
        if s != root {
            *d = *d - root_delay + eff(g, zeroed, s);
        }
    }
    dist
}

#[derive(Clone, Copy)]
struct HeapEntry {
    dist: f64,
    node: NodeId,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    // Reversed so that BinaryHeap pops the smallest distance, then the lowest id.
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

fn dijkstra(g: &DelayGraph, zeroed: &[bool], root: NodeId) -> Vec<f64> {
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::with_capacity(n);
    dist[root] = 0.0;
    heap.push(HeapEntry { dist: 0.0, node: root });
    while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        let next = d + eff(g, zeroed, u);
        for &v in &g.adjacency[u] {
            if next < dist[v] {
                dist[v] = next;
                heap.push(HeapEntry { dist: next, node: v });
            }
        }
    }
    dist
}

/// 0-1 BFS for graphs whose effective delays are all 0 or 1.
pub(crate) fn hops_from(g: &DelayGraph, zeroed: &[bool], root: NodeId) -> Vec<u32> {
    let n = g.node_count();
    let mut dist = vec![u32::MAX; n];
    let mut done = vec![false; n];
    let mut queue = VecDeque::with_capacity(n);
    dist[root] = 0;
    queue.push_back(root);
    while let Some(u) = queue.pop_front() {
        if done[u] {
            continue;
        }
        done[u] = true;
        let free = zeroed[u] || g.delays[u] == 0.0;
        let next = if free { dist[u] } else { dist[u] + 1 };
        for &v in &g.adjacency[u] {
            if next < dist[v] {
                dist[v] = next;
                if free {
                    queue.push_front(v);
                } else {
                    queue.push_back(v);
                }
            }
        }
    }
    dist
}

/// Sum of `d(s, t | st)` over all ordered pairs.
pub fn spd(g: &DelayGraph, st: &UpgradeState) -> Result<f64> {
    st.check_against(g)?;
    let zeroed = st.zeroed();
    let rows: Vec<f64> =
        (0..g.node_count()).into_par_iter().map(|s| distances_from(g, zeroed, s).iter().sum()).collect();
    Ok(rows.iter().sum())
}

/// Summary statistics of a graph with no upgrades.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub diameter: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub spd: f64,
}

pub fn graph_stats(g: &DelayGraph) -> GraphStats {
    let zeroed = vec![false; g.node_count()];
    let rows: Vec<(f64, f64)> = (0..g.node_count())
        .into_par_iter()
        .map(|s| {
            let dist = distances_from(g, &zeroed, s);
            let max = dist.iter().copied().fold(0.0, f64::max);
            (max, dist.iter().sum())
        })
        .collect();
    GraphStats {
        diameter: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        spd: rows.iter().map(|r| r.1).sum(),
        l_min: g.delays.iter().copied().fold(f64::INFINITY, f64::min),
        l_max: g.delays.iter().copied().fold(0.0, f64::max),
    }
}

/// Members and sorted boundary of one zero-delay cluster.
pub(crate) type Cluster = (Vec<NodeId>, Vec<NodeId>);

/// Connected components of the zero-delay nodes, each with its sorted boundary
/// of positive-delay neighbors.
pub(crate) fn zero_clusters(g: &DelayGraph, is_zero: impl Fn(NodeId) -> bool) -> (Vec<Option<usize>>, Vec<Cluster>) {
    let n = g.node_count();
    let mut cluster_of = vec![None; n];
    let mut clusters = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if !is_zero(start) || cluster_of[start].is_some() {
            continue;
        }
        let id = clusters.len();
        let mut members = Vec::new();
        let mut boundary = Vec::new();
        cluster_of[start] = Some(id);
        stack.push(start);
        while let Some(u) = stack.pop() {
            members.push(u);
            for &w in &g.adjacency[u] {
                if is_zero(w) {
                    if cluster_of[w].is_none() {
                        cluster_of[w] = Some(id);
                        stack.push(w);
                    }
                } else {
                    boundary.push(w);
                }
            }
        }
        members.sort_unstable();
        boundary.sort_unstable();
        boundary.dedup();
        clusters.push((members, boundary));
    }
    (cluster_of, clusters)
}

/// Removes every zero-delay node and joins the neighbors it used to connect.
///
/// Each connected cluster of zero-delay nodes is replaced by a clique on its
/// positive-delay boundary, which preserves `d(u, w)` between surviving nodes.
pub fn collapse_zero_delay(g: &DelayGraph) -> Result<DelayGraph> {
    let n = g.node_count();
    let (cluster_of, clusters) = zero_clusters(g, |v| g.delays[v] == 0.0);
    if clusters.is_empty() {
        return Ok(g.clone());
    }
    let mut new_id = vec![usize::MAX; n];
    let mut labels = Vec::new();
    let mut delays = Vec::new();
    for v in 0..n {
        if cluster_of[v].is_none() {
            new_id[v] = delays.len();
            labels.push(g.labels[v].clone());
            delays.push(g.delays[v]);
        }
    }
    if delays.len() < 2 {
        return Err(Error::TooFewNodes(delays.len()));
    }
    let mut edges: Vec<(NodeId, NodeId)> = g
        .edges()
        .filter(|&(u, v)| cluster_of[u].is_none() && cluster_of[v].is_none())
        .map(|(u, v)| (new_id[u], new_id[v]))
        .collect();
    for (_, boundary) in &clusters {
        for (i, &a) in boundary.iter().enumerate() {
            for &b in &boundary[i + 1..] {
                edges.push((new_id[a], new_id[b]));
            }
        }
    }
    DelayGraph::with_labels(labels, delays, &edges)
}

/// Dense `n x n` matrix of `d(s, t | T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// All-pairs delays via `n` single-source runs.
    pub fn compute(g: &DelayGraph, st: &UpgradeState) -> Result<Self> {
        st.check_against(g)?;
        let n = g.node_count();
        let zeroed = st.zeroed();
        let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| distances_from(g, zeroed, s)).collect();
        Ok(DistanceMatrix { n, data: rows.concat() })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, s: NodeId, t: NodeId) -> f64 {
        self.data[s * self.n + t]
    }

    pub fn row(&self, s: NodeId) -> &[f64] {
        &self.data[s * self.n..(s + 1) * self.n]
    }

    /// Sum over all entries, i.e. the SPD of the state the matrix was built for.
    pub fn total(&self) -> f64 {
        (0..self.n).map(|s| self.row(s).iter().sum::<f64>()).sum()
    }

    /// Reduction in total delay if `v`, currently paying `delay`, were zeroed.
    ///
    /// A new shortest `s -> t` path either avoids `v` or splits at `v`, so
    /// `d'(s, t) = min(d(s, t), d(s, v) + d(v, t) - l(v))` for `t != v`, while
    /// `d(s, v)` is unchanged because it never pays `l(v)`.
    pub fn reduction_if_zeroed(&self, v: NodeId, delay: f64) -> f64 {
        let n = self.n;
        let from_v = self.row(v);
        let mut total = 0.0;
        for s in 0..n {
            let row = self.row(s);
            let via = row[v] - delay;
            let mut acc = 0.0;
            for t in 0..n {
                let gain = row[t] - (via + from_v[t]);
                if gain > 0.0 && t != v {
                    acc += gain;
                }
            }
            total += acc;
        }
        total
    }

    /// Applies the single-node zeroing update in place.
    pub fn commit_upgrade(&mut self, v: NodeId, delay: f64) {
        let n = self.n;
        let from_v: Vec<f64> = self.row(v).to_vec();
        for s in 0..n {
            let via = self.data[s * n + v] - delay;
            let row = &mut self.data[s * n..(s + 1) * n];
            for t in 0..n {
                let candidate = via + from_v[t];
                if candidate < row[t] && t != v {
                    row[t] = candidate;
                }
            }
        }
    }
}
