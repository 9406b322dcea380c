//! One entry point for every selection algorithm.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{
    select_degree, select_high_delay, select_longpath_random, select_path_centrality, select_random, LongPathConfig,
};
use crate::error::{Error, Result};
use crate::exact::{brute_force_optimal, greedy_gr, LedgerStep, ReductionLedger};
use crate::graph::{spd, DelayGraph, NodeId, UpgradeState};
use crate::gs::gs_select;
use crate::pcs::{estimate_spd, pcs_select};
use crate::sampling::{draw_pairs, PairSample, SamplingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "brute")]
    Brute,
    #[serde(rename = "gr")]
    Gr,
    #[serde(rename = "gs")]
    Gs,
    #[serde(rename = "pcs")]
    Pcs,
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "degree")]
    Degree,
    #[serde(rename = "highdelay")]
    HighDelay,
    #[serde(rename = "pathcen")]
    PathCen,
    #[serde(rename = "itpathcen")]
    ItPathCen,
    #[serde(rename = "longpath-random")]
    LongPathRandom,
}

impl Algorithm {
    pub const ALL: [Algorithm; 10] = [
        Algorithm::Brute,
        Algorithm::Gr,
        Algorithm::Gs,
        Algorithm::Pcs,
        Algorithm::Random,
        Algorithm::Degree,
        Algorithm::HighDelay,
        Algorithm::PathCen,
        Algorithm::ItPathCen,
        Algorithm::LongPathRandom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Brute => "brute",
            Algorithm::Gr => "gr",
            Algorithm::Gs => "gs",
            Algorithm::Pcs => "pcs",
            Algorithm::Random => "random",
            Algorithm::Degree => "degree",
            Algorithm::HighDelay => "highdelay",
            Algorithm::PathCen => "pathcen",
            Algorithm::ItPathCen => "itpathcen",
            Algorithm::LongPathRandom => "longpath-random",
        }
    }

    /// Only meaningful with unit delays.
    pub fn requires_uniform(self) -> bool {
        matches!(self, Algorithm::Pcs | Algorithm::LongPathRandom)
    }

    pub fn uses_sampling(self) -> bool {
        matches!(self, Algorithm::Gs | Algorithm::Pcs)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| Error::UnknownAlgorithm(s.to_owned()))
    }
}

/// Knobs shared by all algorithms; each reads what it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveParams {
    pub sampling: SamplingConfig,
    /// Random nodes drawn by the long-path baseline.
    pub kb: Option<usize>,
    pub epsilon_len: f64,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams { sampling: SamplingConfig::default(), kb: None, epsilon_len: 0.1 }
    }
}

/// Runs `algo` with budget `k` and returns its ledger. Timing covers
/// selection only.
pub fn solve(g: &DelayGraph, algo: Algorithm, k: usize, params: &SolveParams) -> Result<ReductionLedger> {
    if algo.requires_uniform() && !g.is_uniform() {
        return Err(Error::NonUniform);
    }
    let seed = params.sampling.seed;
    let started = Instant::now();
    let nodes = match algo {
        Algorithm::Gr => return relabel(greedy_gr(g, k)?, algo),
        Algorithm::Gs => return relabel(gs_select(g, k, &params.sampling)?, algo),
        Algorithm::Pcs => return relabel(pcs_select(g, k, &params.sampling)?, algo),
        Algorithm::Brute => brute_force_optimal(g, k)?.nodes,
        Algorithm::Random => select_random(g, k, seed)?,
        Algorithm::Degree => select_degree(g, k)?,
        Algorithm::HighDelay => select_high_delay(g, k)?,
        Algorithm::PathCen => select_path_centrality(g, k, false)?,
        Algorithm::ItPathCen => select_path_centrality(g, k, true)?,
        Algorithm::LongPathRandom => {
            let cfg = LongPathConfig {
                epsilon_len: params.epsilon_len,
                kb: params.kb.unwrap_or(k),
                delta: 0.5,
                trials: 1,
                b_prime: 1.0,
            };
            select_longpath_random(g, &cfg, seed)?
        }
    };
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    ledger_for_selection(g, algo.name(), &nodes, elapsed_ms, &params.sampling)
}

fn relabel(mut ledger: ReductionLedger, algo: Algorithm) -> Result<ReductionLedger> {
    ledger.algorithm = algo.name().to_owned();
    Ok(ledger)
}

/// Ledger for a fixed selection order. Exact within the audit cap; beyond
/// it, SPD after every prefix is estimated on one shared pair sample.
pub fn ledger_for_selection(
    g: &DelayGraph,
    algorithm: &str,
    nodes: &[NodeId],
    selection_ms: f64,
    cfg: &SamplingConfig,
) -> Result<ReductionLedger> {
    let n = g.node_count();
    let exact = n <= cfg.exact_audit_cap;
    let sample: Option<PairSample> = if exact { None } else { Some(draw_pairs(n, cfg.sample_count(n), cfg.seed)?) };
    let measure = |st: &UpgradeState| -> Result<f64> {
        match &sample {
            None => spd(g, st),
            Some(sample) => Ok(estimate_spd(g, st, sample)),
        }
    };
    let mut st = UpgradeState::empty(n);
    let mut ledger = ReductionLedger::new(algorithm, measure(&st)?);
    ledger.initial_estimated = !exact;
    ledger.samples_used = sample.as_ref().map_or(0, PairSample::len);
    let mut current = ledger.initial_spd;
    let per_step = selection_ms / nodes.len().max(1) as f64;
    for &v in nodes {
        st.upgrade(v)?;
        let after = measure(&st)?;
        ledger.push(LedgerStep {
            node: v,
            rs_step: current - after,
            spd_after: after,
            wall_time_ms: per_step,
            estimated: !exact,
        });
        current = after;
    }
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!(matches!("nope".parse::<Algorithm>(), Err(Error::UnknownAlgorithm(_))));
    }

    #[test]
    fn every_algorithm_returns_k_distinct_nodes() {
        let g = gen::ring(8).unwrap();
        let params = SolveParams { epsilon_len: 0.25, ..Default::default() };
        for a in Algorithm::ALL {
            let ledger = solve(&g, a, 3, &params).unwrap();
            let mut nodes = ledger.selected();
            nodes.sort();
            nodes.dedup();
            assert_eq!(nodes.len(), 3, "{a}");
            assert_eq!(ledger.algorithm, a.name());
            let total: f64 = ledger.steps.iter().map(|s| s.rs_step).sum();
            assert_eq!(total, ledger.total_reduction(), "{a}");
        }
    }

    #[test]
    fn uniform_only_algorithms_reject_general_delays() {
        let g = gen::path(&[1.0, 2.0, 1.0]).unwrap();
        for a in [Algorithm::Pcs, Algorithm::LongPathRandom] {
            assert!(matches!(solve(&g, a, 1, &SolveParams::default()), Err(Error::NonUniform)));
        }
    }
}
