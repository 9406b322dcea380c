//! Exact solvers: single-vertex reductions, the exhaustive greedy and
//! brute-force enumeration of optimal target sets.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{eff, spd, DelayGraph, DistanceMatrix, NodeId, UpgradeState};

/// One committed upgrade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerStep {
    pub node: NodeId,
    /// SPD reduction caused by this node given the nodes chosen before it.
    pub rs_step: f64,
    pub spd_after: f64,
    pub wall_time_ms: f64,
    /// True when `rs_step` is a scaled sample estimate rather than exact.
    #[serde(default)]
    pub estimated: bool,
}

/// Per-step record of a selection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionLedger {
    pub algorithm: String,
    pub initial_spd: f64,
    #[serde(default)]
    pub initial_estimated: bool,
    pub steps: Vec<LedgerStep>,
    pub final_rr: f64,
    /// Sampled pairs consumed over the whole run (0 for exact methods).
    #[serde(default)]
    pub samples_used: usize,
}

impl ReductionLedger {
    pub fn new(algorithm: impl Into<String>, initial_spd: f64) -> Self {
        ReductionLedger {
            algorithm: algorithm.into(),
            initial_spd,
            initial_estimated: false,
            steps: Vec::new(),
            final_rr: 0.0,
            samples_used: 0,
        }
    }

    pub fn push(&mut self, step: LedgerStep) {
        self.steps.push(step);
        self.final_rr = self.total_reduction() / self.initial_spd;
    }

    /// Chosen nodes in selection order.
    pub fn selected(&self) -> Vec<NodeId> {
        self.steps.iter().map(|s| s.node).collect()
    }

    pub fn total_reduction(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| self.initial_spd - s.spd_after)
    }

    /// Upgrade state holding every selected node.
    pub fn upgrade_state(&self, n: usize) -> Result<UpgradeState> {
        UpgradeState::from_nodes(n, &self.selected())
    }

    pub fn is_estimated(&self) -> bool {
        self.initial_estimated || self.steps.iter().any(|s| s.estimated)
    }
}

/// Nodes that can still be upgraded: positive effective delay.
pub(crate) fn candidates(g: &DelayGraph, st: &UpgradeState) -> Vec<NodeId> {
    (0..g.node_count()).filter(|&v| eff(g, st.zeroed(), v) > 0.0).collect()
}

pub(crate) fn check_budget(g: &DelayGraph, st: &UpgradeState, k: usize) -> Result<()> {
    let n = g.node_count();
    if k == 0 || k >= n {
        return Err(Error::BudgetOutOfRange { k, n });
    }
    let available = candidates(g, st).len();
    if available < k {
        return Err(Error::NotEnoughCandidates { requested: k, available });
    }
    Ok(())
}

/// `RS(v | T)`: exact SPD reduction from additionally zeroing `v`.
pub fn rs_of_vertex(g: &DelayGraph, st: &UpgradeState, v: NodeId) -> Result<f64> {
    g.check_node(v)?;
    st.check_against(g)?;
    if eff(g, st.zeroed(), v) <= 0.0 {
        return Err(Error::AlreadyUpgraded(v));
    }
    Ok(spd(g, st)? - spd(g, &st.with(v)?)?)
}

/// `RS(S)`: SPD reduction of a whole target set against the empty set.
pub fn reduction_of_set(g: &DelayGraph, nodes: &[NodeId]) -> Result<f64> {
    let n = g.node_count();
    Ok(spd(g, &UpgradeState::empty(n))? - spd(g, &UpgradeState::from_nodes(n, nodes)?)?)
}

#[derive(Debug, Clone)]
pub struct GreedyOptions {
    /// Largest graph accepted; the full distance matrix is kept in memory.
    pub node_cap: usize,
    /// Recompute the matrix after every step and fail on any mismatch.
    pub audit: bool,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions { node_cap: 5000, audit: false }
    }
}

/// Exhaustive greedy: each step commits the vertex with the largest exact
/// `RS(v | T)`, lowest id first on ties.
pub fn greedy_gr(g: &DelayGraph, k: usize) -> Result<ReductionLedger> {
    greedy_gr_with(g, k, &GreedyOptions::default())
}

pub fn greedy_gr_with(g: &DelayGraph, k: usize, opts: &GreedyOptions) -> Result<ReductionLedger> {
    let n = g.node_count();
    if n > opts.node_cap {
        return Err(Error::CapExceeded { what: "greedy node", value: n as u128, cap: opts.node_cap as u128 });
    }
    let mut st = UpgradeState::empty(n);
    check_budget(g, &st, k)?;

    let mut matrix = DistanceMatrix::compute(g, &st)?;
    let mut ledger = ReductionLedger::new("gr", matrix.total());
    for step in 0..k {
        let started = Instant::now();
        let pool = candidates(g, &st);
        let scores: Vec<f64> = pool.par_iter().map(|&v| matrix.reduction_if_zeroed(v, g.delay(v))).collect();
        let (best, gain) =
            argmax(&pool, &scores).ok_or(Error::NotEnoughCandidates { requested: k, available: step })?;
        matrix.commit_upgrade(best, g.delay(best));
        st.upgrade(best)?;
        if opts.audit && matrix != DistanceMatrix::compute(g, &st)? {
            return Err(Error::AuditMismatch { step });
        }
        ledger.push(LedgerStep {
            node: best,
            rs_step: gain,
            spd_after: matrix.total(),
            wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
            estimated: false,
        });
        log::debug!("gr step {step}: node {best} rs {gain}");
    }
    Ok(ledger)
}

/// First index holding the maximum score; `pool` is sorted by node id so this
/// is the lowest-id tie-break.
pub(crate) fn argmax<T: PartialOrd + Copy>(pool: &[NodeId], scores: &[T]) -> Option<(NodeId, T)> {
    let mut best: Option<(NodeId, T)> = None;
    for (&v, &score) in pool.iter().zip(scores) {
        match best {
            Some((_, b)) if !(score > b) => {}
            _ => best = Some((v, score)),
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalSet {
    pub nodes: Vec<NodeId>,
    pub reduction: f64,
}

/// Default cap on the number of subsets `brute_force_optimal` will enumerate.
pub const DEFAULT_ENUMERATION_CAP: u128 = 2_000_000;

pub fn brute_force_optimal(g: &DelayGraph, k: usize) -> Result<OptimalSet> {
    brute_force_optimal_with_cap(g, k, DEFAULT_ENUMERATION_CAP)
}

/// Best size-`k` target set by enumeration; the lexicographically first set
/// wins ties.
pub fn brute_force_optimal_with_cap(g: &DelayGraph, k: usize, cap: u128) -> Result<OptimalSet> {
    let n = g.node_count();
    let empty = UpgradeState::empty(n);
    check_budget(g, &empty, k)?;
    let pool = candidates(g, &empty);
    let count = binomial(pool.len() as u128, k as u128);
    if count > cap {
        return Err(Error::CapExceeded { what: "subset enumeration", value: count, cap });
    }
    let base = spd(g, &empty)?;

    let mut subsets = Combinations::new(pool.len(), k)
        .map(|idx| idx.iter().map(|&i| pool[i]).collect::<Vec<_>>())
        .collect::<Vec<_>>();
    let spds: Vec<f64> = subsets
        .par_iter()
        .map(|nodes| {
            let st = UpgradeState::from_nodes(n, nodes).expect("distinct valid nodes");
            spd(g, &st).expect("state sized for graph")
        })
        .collect();
    let mut best = 0;
    for (i, &s) in spds.iter().enumerate() {
        if s < spds[best] {
            best = i;
        }
    }
    Ok(OptimalSet { reduction: base - spds[best], nodes: subsets.swap_remove(best) })
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Lexicographic k-subsets of `0..n`.
struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations { n, current: (k <= n).then(|| (0..k).collect()) }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}
