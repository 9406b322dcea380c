//! Path counting with sampling for the uniform delay model.
//!
//! With unit delays, zeroing `v` removes exactly 1 from `d(v, t)` for every
//! `t` and exactly 1 from every pair that has `v` on some shortest path, so
//! `RS(v | T) = zeta(v) + (n - 1)`. Ranking candidates by sampled
//! shortest-path membership is therefore ranking by reduction.
//!
//! Upgraded nodes are removed from an edited view of the graph in which each
//! connected cluster of zero-delay nodes is replaced by a clique on its
//! boundary (the cluster's gateways). Hop counts in that view equal delays in
//! the original graph, and BFS on it finds shortest-path members.

use std::collections::VecDeque;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{argmax, check_budget, LedgerStep, ReductionLedger};
use crate::graph::{distances_from, spd, zero_clusters, DelayGraph, DistanceMatrix, NodeId, UpgradeState};
use crate::sampling::{iteration_seed, pairs_for, PairSample, SamplingConfig};

const UNREACHED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
struct Cluster {
    members: Vec<NodeId>,
    gateways: Vec<NodeId>,
}

/// Uniform-model graph with upgraded nodes deleted and their clusters'
/// boundaries joined.
///
/// The clique edges are kept implicit: a node adjacent to a cluster reaches
/// every gateway of that cluster in one hop.
#[derive(Debug, Clone)]
pub struct EditedGraph<'g> {
    base: &'g DelayGraph,
    alive: Vec<bool>,
    cluster_of: Vec<Option<usize>>,
    clusters: Vec<Cluster>,
}

impl<'g> EditedGraph<'g> {
    pub fn new(base: &'g DelayGraph, st: &UpgradeState) -> Result<Self> {
        if !base.is_uniform() {
            return Err(Error::NonUniform);
        }
        st.check_against(base)?;
        let mut eg = EditedGraph { base, alive: Vec::new(), cluster_of: Vec::new(), clusters: Vec::new() };
        eg.rebuild(st);
        Ok(eg)
    }

    /// Re-derives deleted nodes, clusters and gateway lists from `st`.
    pub fn apply(&mut self, st: &UpgradeState) -> Result<()> {
        st.check_against(self.base)?;
        self.rebuild(st);
        Ok(())
    }

    fn rebuild(&mut self, st: &UpgradeState) {
        let (cluster_of, clusters) = zero_clusters(self.base, |v| st.contains(v));
        self.alive = st.zeroed().iter().map(|&z| !z).collect();
        self.cluster_of = cluster_of;
        self.clusters = clusters.into_iter().map(|(members, gateways)| Cluster { members, gateways }).collect();
    }

    pub fn base(&self) -> &DelayGraph {
        self.base
    }

    pub fn is_alive(&self, v: NodeId) -> bool {
        self.alive[v]
    }

    /// Gateway list of an upgraded node: the delay-1 nodes bordering its
    /// zero-delay cluster. Empty for alive nodes.
    pub fn gateways(&self, v: NodeId) -> &[NodeId] {
        match self.cluster_of[v] {
            Some(c) => &self.clusters[c].gateways,
            None => &[],
        }
    }

    /// Upgraded nodes sharing `v`'s zero-delay cluster.
    pub fn cluster_members(&self, v: NodeId) -> &[NodeId] {
        match self.cluster_of[v] {
            Some(c) => &self.clusters[c].members,
            None => &[],
        }
    }

    /// Neighbors of an alive node in the edited view, sorted.
    pub fn neighbors(&self, u: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        for &w in self.base.neighbors(u) {
            match self.cluster_of[w] {
                None => out.push(w),
                Some(c) => out.extend(self.clusters[c].gateways.iter().filter(|&&x| x != u)),
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Multi-source BFS levels over alive nodes; `u32::MAX` where unreached
    /// and for deleted nodes.
    pub fn hop_levels(&self, sources: &[NodeId]) -> Vec<u32> {
        let n = self.base.node_count();
        let mut level = vec![UNREACHED; n];
        let mut expanded = vec![false; self.clusters.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if self.alive[s] && level[s] == UNREACHED {
                level[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let next = level[u] + 1;
            for &w in self.base.neighbors(u) {
                match self.cluster_of[w] {
                    None => {
                        if level[w] == UNREACHED {
                            level[w] = next;
                            queue.push_back(w);
                        }
                    }
                    // First contact with a cluster happens at the smallest
                    // level, so each cluster is expanded once.
                    Some(c) if !expanded[c] => {
                        expanded[c] = true;
                        for &x in &self.clusters[c].gateways {
                            if level[x] == UNREACHED {
                                level[x] = next;
                                queue.push_back(x);
                            }
                        }
                    }
                    Some(_) => {}
                }
            }
        }
        level
    }
}

/// Delay-1 nodes on at least one shortest `s -> t` path under the edited
/// graph's state, excluding `s` and `t`, sorted by id.
///
/// Each endpoint is represented by its BFS source set: the node itself when
/// alive, else its cluster's gateways. This covers the three endpoint cases:
/// both alive, one upgraded (BFS to the nearest gateways, which are
/// themselves on the path) and both upgraded (BFS between the closest gateway
/// pairs). A node `v` is a member iff
/// `hop(S_s, v) + hop(v, S_t) = hop(S_s, S_t)`.
pub fn membership_bfs(eg: &EditedGraph<'_>, s: NodeId, t: NodeId) -> Result<Vec<NodeId>> {
    let n = eg.base.node_count();
    eg.base.check_node(s)?;
    eg.base.check_node(t)?;
    if s == t {
        return Err(Error::param("membership query needs distinct endpoints"));
    }
    if !eg.alive[s] && !eg.alive[t] && eg.cluster_of[s] == eg.cluster_of[t] {
        // d(s, t) = 0 inside one cluster
        return Ok(Vec::new());
    }
    let source_set = |v: NodeId| -> Result<Vec<NodeId>> {
        if eg.alive[v] {
            Ok(vec![v])
        } else if eg.gateways(v).is_empty() {
            Err(Error::param(format!("upgraded node {v} has no gateways")))
        } else {
            Ok(eg.gateways(v).to_vec())
        }
    };
    let from_s = eg.hop_levels(&source_set(s)?);
    let to_t = eg.hop_levels(&source_set(t)?);
    let joined =
        |v: usize| -> Option<u32> { (from_s[v] != UNREACHED && to_t[v] != UNREACHED).then(|| from_s[v] + to_t[v]) };
    let Some(shortest) = (0..n).filter_map(joined).min() else {
        return Err(Error::Disconnected { components: 2 });
    };
    Ok((0..n).filter(|&v| v != s && v != t && joined(v) == Some(shortest)).collect())
}

/// Sampled membership counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCountTally {
    pub zeta: Vec<u64>,
    pub pairs_used: usize,
}

/// Tallies, for each node, how many sampled pairs it lies between.
pub fn pcs_tally(eg: &EditedGraph<'_>, sample: &PairSample) -> Result<PathCountTally> {
    let n = eg.base.node_count();
    let mut zeta = vec![0u64; n];
    let chunk = (rayon::current_num_threads() * 4).max(1);
    for pairs in sample.pairs.chunks(chunk) {
        let members: Vec<Vec<NodeId>> =
            pairs.par_iter().map(|&(s, t)| membership_bfs(eg, s, t)).collect::<Result<_>>()?;
        for list in members {
            for v in list {
                zeta[v] += 1;
            }
        }
    }
    Ok(PathCountTally { zeta, pairs_used: sample.len() })
}

fn require_uniform(g: &DelayGraph) -> Result<()> {
    if g.is_uniform() {
        Ok(())
    } else {
        Err(Error::NonUniform)
    }
}

/// Exact `zeta(v)` for every node from the all-pairs matrix; 0 for upgraded
/// nodes.
pub fn exact_zeta_all(g: &DelayGraph, st: &UpgradeState) -> Result<Vec<u64>> {
    require_uniform(g)?;
    let m = DistanceMatrix::compute(g, st)?;
    Ok((0..g.node_count()).map(|v| if st.contains(v) { 0 } else { zeta_from_matrix(&m, v) }).collect())
}

fn zeta_from_matrix(m: &DistanceMatrix, v: NodeId) -> u64 {
    let n = m.node_count();
    let from_v = m.row(v);
    let mut count = 0;
    for s in (0..n).filter(|&s| s != v) {
        let row = m.row(s);
        let to_v = row[v];
        count += (0..n).filter(|&t| t != v && t != s && to_v + from_v[t] == row[t]).count() as u64;
    }
    count
}

/// Number of ordered pairs `(s, t)`, `s != v != t`, with `v` on some shortest
/// path: `d(s, v) + d(v, t) = d(s, t)`.
pub fn exact_zeta(g: &DelayGraph, st: &UpgradeState, v: NodeId) -> Result<u64> {
    require_uniform(g)?;
    g.check_node(v)?;
    st.check_against(g)?;
    if st.contains(v) {
        return Err(Error::AlreadyUpgraded(v));
    }
    let zeroed = st.zeroed();
    let from_v = distances_from(g, zeroed, v);
    let mut count = 0;
    for s in (0..g.node_count()).filter(|&s| s != v) {
        let row = distances_from(g, zeroed, s);
        count += (0..g.node_count()).filter(|&t| t != v && t != s && row[v] + from_v[t] == row[t]).count() as u64;
    }
    Ok(count)
}

/// Checks `RS(v | T) = zeta(v) + (n - 1)`.
pub fn verify_pathcount_identity(g: &DelayGraph, st: &UpgradeState, v: NodeId) -> Result<bool> {
    let zeta = exact_zeta(g, st, v)?;
    let rs = crate::exact::rs_of_vertex(g, st, v)?;
    Ok(rs == (zeta + g.node_count() as u64 - 1) as f64)
}

/// Selects `k` nodes by sampled shortest-path membership counts.
///
/// Pairs are redrawn every iteration unless `resample_each_iteration` is
/// `Some(false)`.
pub fn pcs_select(g: &DelayGraph, k: usize, cfg: &SamplingConfig) -> Result<ReductionLedger> {
    require_uniform(g)?;
    cfg.validate()?;
    let n = g.node_count();
    let mut st = UpgradeState::empty(n);
    check_budget(g, &st, k)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::param(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run(g, k, cfg, &mut st))
}

fn run(g: &DelayGraph, k: usize, cfg: &SamplingConfig, st: &mut UpgradeState) -> Result<ReductionLedger> {
    let n = g.node_count();
    let resample = cfg.resample_each_iteration.unwrap_or(true) && !cfg.exhaustive;
    let exact = n <= cfg.exact_audit_cap;
    let scale = (n * (n - 1)) as f64;
    let mut eg = EditedGraph::new(g, st)?;

    let mut sample = pairs_for(cfg, n, if resample { iteration_seed(cfg.seed, 0) } else { cfg.seed })?;
    let mut ledger = if exact {
        ReductionLedger::new("pcs", spd(g, st)?)
    } else {
        let mut ledger = ReductionLedger::new("pcs", estimate_spd(g, st, &sample));
        ledger.initial_estimated = true;
        ledger
    };
    ledger.samples_used = sample.len();
    let mut current = ledger.initial_spd;

    for step in 0..k {
        let started = Instant::now();
        if resample && step > 0 {
            sample = pairs_for(cfg, n, iteration_seed(cfg.seed, step))?;
            ledger.samples_used += sample.len();
        }
        let tally = pcs_tally(&eg, &sample)?;
        let pool: Vec<NodeId> = (0..n).filter(|&v| !st.contains(v)).collect();
        let scores: Vec<u64> = pool.iter().map(|&v| tally.zeta[v]).collect();
        let (best, zeta) =
            argmax(&pool, &scores).ok_or(Error::NotEnoughCandidates { requested: k, available: step })?;
        st.upgrade(best)?;
        eg.apply(st)?;
        let selection_ms = started.elapsed().as_secs_f64() * 1e3;
        let (rs_step, spd_after) = if exact {
            let after = spd(g, st)?;
            (current - after, after)
        } else {
            let estimate = zeta as f64 * scale / tally.pairs_used as f64 + (n - 1) as f64;
            (estimate, current - estimate)
        };
        current = spd_after;
        ledger.push(LedgerStep { node: best, rs_step, spd_after, wall_time_ms: selection_ms, estimated: !exact });
        log::debug!("pcs step {step}: node {best} sampled zeta {zeta}");
    }
    Ok(ledger)
}

/// `n(n-1)` times the mean sampled delay.
pub(crate) fn estimate_spd(g: &DelayGraph, st: &UpgradeState, sample: &PairSample) -> f64 {
    let n = g.node_count();
    let zeroed = st.zeroed();
    let sampled: f64 =
        sample.pairs.par_iter().map(|&(s, t)| distances_from(g, zeroed, s)[t]).collect::<Vec<_>>().iter().sum();
    sampled * (n * (n - 1)) as f64 / sample.len() as f64
}
