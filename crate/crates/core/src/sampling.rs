//! Vertex-pair sampling and Hoeffding-style sample-size bounds.
//!
//! Every logarithm here is natural.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gen::rng;
use crate::graph::{GraphStats, NodeId};

/// How many pairs a sampler draws and how it draws them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    /// Per-step RR error target.
    pub epsilon: f64,
    /// Practical sampling constant `c` in `p = c ln n / epsilon^2`.
    pub c_factor: f64,
    /// Fixed sample size; overrides the formula.
    pub explicit_p: Option<usize>,
    /// Sample every ordered pair exactly once instead of drawing at random.
    pub exhaustive: bool,
    pub seed: u64,
    /// `None` uses the algorithm's default (GS samples once, PCS resamples).
    pub resample_each_iteration: Option<bool>,
    pub threads: usize,
    /// Graphs up to this size get exact per-step reductions in the ledger.
    pub exact_audit_cap: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            epsilon: 1.0,
            c_factor: 10.0,
            explicit_p: None,
            exhaustive: false,
            seed: DEFAULT_SEED,
            resample_each_iteration: None,
            threads: 1,
            exact_audit_cap: 2000,
        }
    }
}

/// Seed used whenever the caller does not pick one.
pub const DEFAULT_SEED: u64 = 0x5eed_de1a;

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::param(format!("epsilon must lie in (0, 1], got {}", self.epsilon)));
        }
        if !(self.c_factor > 0.0 && self.c_factor.is_finite()) {
            return Err(Error::param(format!("sampling constant must be positive, got {}", self.c_factor)));
        }
        if self.explicit_p == Some(0) {
            return Err(Error::param("explicit sample size must be at least 1"));
        }
        if self.threads == 0 {
            return Err(Error::param("thread count must be at least 1"));
        }
        Ok(())
    }

    /// Pairs drawn per sample on an `n`-node graph: the explicit size if set,
    /// else `ceil(c ln n / epsilon^2)`, at least 1.
    pub fn sample_count(&self, n: usize) -> usize {
        if self.exhaustive {
            return n * (n - 1);
        }
        self.explicit_p.unwrap_or_else(|| {
            let p = (self.c_factor * (n as f64).ln() / (self.epsilon * self.epsilon)).ceil();
            (p as usize).max(1)
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Ordered `(s, t)` pairs, `s != t`, with the seed that drew them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSample {
    pub pairs: Vec<(NodeId, NodeId)>,
    pub seed: u64,
}

impl PairSample {
    /// Every ordered pair exactly once, in row-major order.
    pub fn exhaustive(n: usize) -> Self {
        let pairs = (0..n).flat_map(|s| (0..n).filter(move |&t| t != s).map(move |t| (s, t))).collect();
        PairSample { pairs, seed: 0 }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// `p` independent uniform draws from the `n(n-1)` ordered pairs.
pub fn draw_pairs(n: usize, p: usize, seed: u64) -> Result<PairSample> {
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    let mut r = rng(seed);
    let pairs = (0..p)
        .map(|_| {
            let s = r.random_range(0..n);
            let mut t = r.random_range(0..n - 1);
            if t >= s {
                t += 1;
            }
            (s, t)
        })
        .collect();
    Ok(PairSample { pairs, seed })
}

/// Seed for iteration `i` of a resampling run, derived with SplitMix64 so that
/// neighboring base seeds do not produce overlapping streams.
pub fn iteration_seed(base: u64, i: usize) -> u64 {
    let mut z = base.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Pairs for one run: exhaustive, or drawn with the configured size.
pub(crate) fn pairs_for(cfg: &SamplingConfig, n: usize, seed: u64) -> Result<PairSample> {
    if cfg.exhaustive {
        Ok(PairSample::exhaustive(n))
    } else {
        draw_pairs(n, cfg.sample_count(n), seed)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("epsilon must lie in (0, 1], got {epsilon}")))
    }
}

fn ceil_to_u64(x: f64) -> u64 {
    x.ceil() as u64
}

/// General-delay bound: `ceil(2 diam^2 ln(4 n^3) / (epsilon l_min)^2)`.
///
/// Zero delays must be collapsed first so that `l_min > 0`.
pub fn sample_size_general(stats: &GraphStats, n: usize, epsilon: f64) -> Result<u64> {
    check_epsilon(epsilon)?;
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    if !(stats.l_min > 0.0) {
        return Err(Error::param("minimum delay is zero; collapse zero-delay nodes first"));
    }
    let n = n as f64;
    let scaled = epsilon * stats.l_min;
    Ok(ceil_to_u64(2.0 * stats.diameter.powi(2) * (4.0 * n.powi(3)).ln() / (scaled * scaled)))
}

/// Small-world bound: the general bound with `diam = l_max ln n`, written in
/// terms of `l_ratio = l_max / l_min`.
pub fn sample_size_smallworld(n: usize, l_ratio: f64, epsilon: f64) -> Result<u64> {
    check_epsilon(epsilon)?;
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    if !(l_ratio >= 1.0 && l_ratio.is_finite()) {
        return Err(Error::param(format!("delay ratio must be >= 1, got {l_ratio}")));
    }
    let n = n as f64;
    let diam = l_ratio * n.ln();
    Ok(ceil_to_u64(2.0 * diam * diam * (4.0 * n.powi(3)).ln() / (epsilon * epsilon)))
}

/// Uniform-model bound: `ceil(2 ln(4 n^3) / epsilon^2)`.
pub fn sample_size_uniform(n: usize, epsilon: f64) -> Result<u64> {
    check_epsilon(epsilon)?;
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    let n = n as f64;
    Ok(ceil_to_u64(2.0 * (4.0 * n.powi(3)).ln() / (epsilon * epsilon)))
}

/// The experiments' rule of thumb: `ceil(c ln n)`.
pub fn practical_sample_size(c: f64, n: usize) -> Result<u64> {
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    if !(c > 0.0) {
        return Err(Error::param(format!("sampling constant must be positive, got {c}")));
    }
    Ok(ceil_to_u64(c * (n as f64).ln()).max(1))
}
