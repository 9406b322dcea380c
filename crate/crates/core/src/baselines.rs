//! Comparison selectors and the long-path restricted metric.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::candidates;
use crate::gen::rng;
use crate::graph::{distances_from, DelayGraph, DistanceMatrix, NodeId, UpgradeState};

fn check_k(g: &DelayGraph, k: usize) -> Result<()> {
    let n = g.node_count();
    if k == 0 || k >= n {
        Err(Error::BudgetOutOfRange { k, n })
    } else {
        Ok(())
    }
}

/// First `k` nodes of a seeded shuffle; prefixes nest as `k` grows.
pub fn select_random(g: &DelayGraph, k: usize, seed: u64) -> Result<Vec<NodeId>> {
    check_k(g, k)?;
    let mut nodes = candidates(g, &UpgradeState::empty(g.node_count()));
    nodes.shuffle(&mut rng(seed));
    nodes.truncate(k);
    Ok(nodes)
}

/// Top `k` by `key`, highest first, lower id on ties.
fn top_k_by<K: PartialOrd>(g: &DelayGraph, k: usize, key: impl Fn(NodeId) -> K) -> Vec<NodeId> {
    let mut nodes: Vec<NodeId> = (0..g.node_count()).collect();
    nodes.sort_by(|&a, &b| key(b).partial_cmp(&key(a)).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    nodes.truncate(k);
    nodes
}

pub fn select_degree(g: &DelayGraph, k: usize) -> Result<Vec<NodeId>> {
    check_k(g, k)?;
    Ok(top_k_by(g, k, |v| g.degree(v)))
}

pub fn select_high_delay(g: &DelayGraph, k: usize) -> Result<Vec<NodeId>> {
    check_k(g, k)?;
    Ok(top_k_by(g, k, |v| g.delay(v)))
}

fn same_delay(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Number of ordered pairs `(s, t)`, `s != v != t`, with `v` on some shortest
/// path under `st`, for every `v`.
pub fn membership_counts(g: &DelayGraph, st: &UpgradeState) -> Result<Vec<u64>> {
    let m = DistanceMatrix::compute(g, st)?;
    let n = g.node_count();
    Ok((0..n)
        .into_par_iter()
        .map(|v| {
            let from_v = m.row(v);
            let mut count = 0u64;
            for s in (0..n).filter(|&s| s != v) {
                let row = m.row(s);
                let to_v = row[v];
                for t in 0..n {
                    if t != v && t != s && same_delay(to_v + from_v[t], row[t]) {
                        count += 1;
                    }
                }
            }
            count
        })
        .collect())
}

/// Path centrality: delay times the number of pairs a node lies between.
///
/// The iterative variant zeroes each pick and rescores before the next one.
pub fn select_path_centrality(g: &DelayGraph, k: usize, iterative: bool) -> Result<Vec<NodeId>> {
    check_k(g, k)?;
    let n = g.node_count();
    let mut st = UpgradeState::empty(n);
    if !iterative {
        let counts = membership_counts(g, &st)?;
        return Ok(top_k_by(g, k, |v| g.delay(v) * counts[v] as f64));
    }
    for _ in 0..k {
        let counts = membership_counts(g, &st)?;
        let pool = candidates(g, &st);
        let scores: Vec<f64> = pool.iter().map(|&v| g.delay(v) * counts[v] as f64).collect();
        let (best, _) = crate::exact::argmax(&pool, &scores)
            .ok_or(Error::NotEnoughCandidates { requested: k, available: st.len() })?;
        st.upgrade(best)?;
    }
    Ok(st.upgraded().to_vec())
}

/// Parameters of the random long-path baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongPathConfig {
    /// Pairs whose initial delay is at least `epsilon_len * n` are "long".
    pub epsilon_len: f64,
    /// Number of random nodes to upgrade.
    pub kb: usize,
    /// Confidence used by [`LongPathConfig::epsilon_net_size`].
    pub delta: f64,
    pub trials: usize,
    /// Unknown constant of the epsilon-net sample bound.
    #[serde(default = "one")]
    pub b_prime: f64,
}

fn one() -> f64 {
    1.0
}

impl LongPathConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.epsilon_len > 0.0 && self.epsilon_len < 1.0) {
            return Err(Error::param(format!("epsilon_len must lie in (0, 1), got {}", self.epsilon_len)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::param(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.kb == 0 {
            return Err(Error::param("kb must be at least 1"));
        }
        if self.threshold(n) < 1.0 {
            return Err(Error::param(format!("length threshold {} is below one delay unit", self.threshold(n))));
        }
        Ok(())
    }

    pub fn threshold(&self, n: usize) -> f64 {
        self.epsilon_len * n as f64
    }

    /// Random sample size that is an epsilon-net for shortest paths (VC
    /// dimension 2): `b' (2/eps ln(2/eps) + 1/eps ln(1/delta))`.
    pub fn epsilon_net_size(&self) -> f64 {
        let e = self.epsilon_len;
        self.b_prime * (2.0 / e * (2.0 / e).ln() + 1.0 / e * (1.0 / self.delta).ln())
    }
}

/// `kb` distinct uniformly random nodes. Unit delays only.
pub fn select_longpath_random(g: &DelayGraph, cfg: &LongPathConfig, seed: u64) -> Result<Vec<NodeId>> {
    if !g.is_uniform() {
        return Err(Error::NonUniform);
    }
    cfg.validate(g.node_count())?;
    if cfg.kb > g.node_count() {
        return Err(Error::BudgetOutOfRange { k: cfg.kb, n: g.node_count() });
    }
    let mut nodes: Vec<NodeId> = (0..g.node_count()).collect();
    nodes.shuffle(&mut rng(seed));
    nodes.truncate(cfg.kb);
    Ok(nodes)
}

/// SPD restricted to pairs whose delay with no upgrades is at least a
/// threshold. The qualifying pairs are fixed once; reductions are measured
/// on that same set.
#[derive(Debug, Clone)]
pub struct RestrictedMetric {
    threshold: f64,
    base: DistanceMatrix,
    total: f64,
    pairs: usize,
}

impl RestrictedMetric {
    pub fn new(g: &DelayGraph, threshold: f64) -> Result<Self> {
        if !(threshold >= 0.0) {
            return Err(Error::param(format!("threshold must be nonnegative, got {threshold}")));
        }
        let n = g.node_count();
        let base = DistanceMatrix::compute(g, &UpgradeState::empty(n))?;
        let mut total = 0.0;
        let mut pairs = 0;
        for s in 0..n {
            for &d in base.row(s) {
                if d >= threshold && d > 0.0 {
                    total += d;
                    pairs += 1;
                }
            }
        }
        Ok(RestrictedMetric { threshold, base, total, pairs })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Restricted SPD with no upgrades.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Number of qualifying ordered pairs.
    pub fn pair_count(&self) -> usize {
        self.pairs
    }

    /// Restricted SPD under `st`.
    pub fn value(&self, g: &DelayGraph, st: &UpgradeState) -> Result<f64> {
        st.check_against(g)?;
        let n = g.node_count();
        let zeroed = st.zeroed();
        let rows: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|s| {
                let base = self.base.row(s);
                if !base.iter().any(|&d| d >= self.threshold && d > 0.0) {
                    return 0.0;
                }
                let dist = distances_from(g, zeroed, s);
                base.iter().zip(&dist).filter(|(&b, _)| b >= self.threshold && b > 0.0).map(|(_, &d)| d).sum()
            })
            .collect();
        Ok(rows.iter().sum())
    }

    /// `R(st)`: reduction of the restricted SPD.
    pub fn reduction(&self, g: &DelayGraph, st: &UpgradeState) -> Result<f64> {
        Ok(self.total - self.value(g, st)?)
    }

    /// True iff every qualifying pair got strictly shorter under `st`.
    pub fn covers_all(&self, g: &DelayGraph, st: &UpgradeState) -> Result<bool> {
        st.check_against(g)?;
        let zeroed = st.zeroed();
        for s in 0..g.node_count() {
            let base = self.base.row(s);
            if !base.iter().any(|&d| d >= self.threshold && d > 0.0) {
                continue;
            }
            let dist = distances_from(g, zeroed, s);
            if base.iter().zip(&dist).any(|(&b, &d)| b >= self.threshold && b > 0.0 && d >= b) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Restricted SPD under `st`; see [`RestrictedMetric`].
pub fn restricted_spd(g: &DelayGraph, st: &UpgradeState, threshold: f64) -> Result<f64> {
    RestrictedMetric::new(g, threshold)?.value(g, st)
}
