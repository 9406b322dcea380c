//! Relative reduction, the long-path upper bound comparison, and experiment
//! grids.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{select_longpath_random, LongPathConfig, RestrictedMetric};
use crate::error::{Error, Result};
use crate::gen::{self, generate_ba, BaSpec};
use crate::graph::{distances_from, spd, DelayGraph, NodeId, UpgradeState};
use crate::io::{assign_delays, load_graph, DelayScheme, GraphFileSpec, LabelMode};
use crate::pcs::pcs_select;
use crate::sampling::{draw_pairs, iteration_seed, SamplingConfig};
use crate::solve::{solve, Algorithm, SolveParams};

/// Largest graph for which [`rr_exact`] recomputes all pairs.
pub const EXACT_RR_CAP: usize = 2000;

/// `(SPD(empty) - SPD(st)) / SPD(empty)`.
pub fn rr_exact(g: &DelayGraph, st: &UpgradeState) -> Result<f64> {
    rr_exact_with_cap(g, st, EXACT_RR_CAP)
}

pub fn rr_exact_with_cap(g: &DelayGraph, st: &UpgradeState, cap: usize) -> Result<f64> {
    let n = g.node_count();
    if n > cap {
        return Err(Error::CapExceeded { what: "nodes for exact RR", value: n as u128, cap: cap as u128 });
    }
    let before = spd(g, &UpgradeState::empty(n))?;
    let after = spd(g, st)?;
    Ok((before - after) / before)
}

/// Summed distances over `pairs` before and after `st`, in that order.
pub fn pair_sums(g: &DelayGraph, st: &UpgradeState, pairs: &[(NodeId, NodeId)]) -> Result<(f64, f64)> {
    st.check_against(g)?;
    let mut by_source: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for &(s, t) in pairs {
        g.check_node(s)?;
        g.check_node(t)?;
        by_source.entry(s).or_default().push(t);
    }
    let none = vec![false; g.node_count()];
    let zeroed = st.zeroed();
    let rows: Vec<(f64, f64)> = by_source
        .par_iter()
        .map(|(&s, targets)| {
            let before = distances_from(g, &none, s);
            let after = distances_from(g, zeroed, s);
            targets.iter().fold((0.0, 0.0), |(b, a), &t| (b + before[t], a + after[t]))
        })
        .collect();
    Ok(rows.iter().fold((0.0, 0.0), |(b, a), &(rb, ra)| (b + rb, a + ra)))
}

/// RR measured on one pair set, using the same pairs before and after.
pub fn rr_over_pairs(g: &DelayGraph, st: &UpgradeState, pairs: &[(NodeId, NodeId)]) -> Result<f64> {
    let (before, after) = pair_sums(g, st, pairs)?;
    if before <= 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 - after / before)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RrEstimate {
    pub mean: f64,
    /// Standard error of the mean across trials; zero for a single trial.
    pub stderr: f64,
}

/// Mean and standard error of RR over `trials` independent pair draws.
pub fn rr_sampled(
    g: &DelayGraph,
    st: &UpgradeState,
    pairs_per_trial: usize,
    trials: usize,
    seed: u64,
) -> Result<RrEstimate> {
    if pairs_per_trial == 0 || trials == 0 {
        return Err(Error::param("rr_sampled needs at least one pair and one trial"));
    }
    let n = g.node_count();
    let values = (0..trials)
        .map(|i| {
            let sample = draw_pairs(n, pairs_per_trial, iteration_seed(seed, i))?;
            rr_over_pairs(g, st, &sample.pairs)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_stderr(&values))
}

fn mean_stderr(values: &[f64]) -> RrEstimate {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return RrEstimate { mean, stderr: 0.0 };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    RrEstimate { mean, stderr: (var / m).sqrt() }
}

/// Settings for [`ub_longpath`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UbConfig {
    pub k: usize,
    pub kb: usize,
    pub trials: usize,
    pub seed: u64,
    /// Pairs whose initial delay is at least this count as long.
    pub threshold: f64,
    /// Sampler used for the PCS side of the comparison.
    #[serde(default)]
    pub pcs: SamplingConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UbReport {
    pub threshold: f64,
    pub restricted_total: f64,
    pub qualifying_pairs: usize,
    /// Restricted reduction of each random trial.
    pub trial_reductions: Vec<f64>,
    /// `min(total, k * R)` for each trial on its own.
    pub trial_bounds: Vec<f64>,
    /// `k` times the mean trial reduction, before clipping.
    pub raw_ub: f64,
    pub ub: f64,
    pub ub_rr: f64,
    pub pcs_nodes: Vec<NodeId>,
    pub pcs_reduction: f64,
    pub rr_star_pcs: f64,
}

impl UbReport {
    /// Clipped bounds stay inside `[0, total]`.
    pub fn dominance_holds(&self) -> bool {
        let inside = |b: f64| (0.0..=self.restricted_total).contains(&b);
        inside(self.ub) && self.trial_bounds.iter().all(|&b| inside(b))
    }

    /// PCS reaches at least half of the bound.
    pub fn pcs_within_half(&self) -> bool {
        self.rr_star_pcs >= 0.5 * self.ub_rr
    }
}

/// Random long-path bound against PCS on the restricted metric. Unit delays
/// only.
pub fn ub_longpath(g: &DelayGraph, cfg: &UbConfig) -> Result<UbReport> {
    if !g.is_uniform() {
        return Err(Error::NonUniform);
    }
    if cfg.trials == 0 {
        return Err(Error::param("ub_longpath needs at least one trial"));
    }
    let n = g.node_count();
    let metric = RestrictedMetric::new(g, cfg.threshold)?;
    let total = metric.total();
    let lp = LongPathConfig {
        epsilon_len: cfg.threshold / n as f64,
        kb: cfg.kb,
        delta: 0.5,
        trials: cfg.trials,
        b_prime: 1.0,
    };
    let mut trial_reductions = Vec::with_capacity(cfg.trials);
    for i in 0..cfg.trials {
        let nodes = select_longpath_random(g, &lp, iteration_seed(cfg.seed, i))?;
        let st = UpgradeState::from_nodes(n, &nodes)?;
        trial_reductions.push(metric.reduction(g, &st)?);
    }
    let k = cfg.k as f64;
    let trial_bounds = trial_reductions.iter().map(|&r| (k * r).min(total)).collect();
    let raw_ub = k * trial_reductions.iter().sum::<f64>() / cfg.trials as f64;
    let ub = raw_ub.min(total);

    let ledger = pcs_select(g, cfg.k, &cfg.pcs)?;
    let pcs_nodes = ledger.selected();
    let pcs_reduction = metric.reduction(g, &UpgradeState::from_nodes(n, &pcs_nodes)?)?;
    let ratio = |x: f64| if total > 0.0 { x / total } else { 0.0 };
    Ok(UbReport {
        threshold: cfg.threshold,
        restricted_total: total,
        qualifying_pairs: metric.pair_count(),
        trial_reductions,
        trial_bounds,
        raw_ub,
        ub,
        ub_rr: ratio(ub),
        pcs_nodes,
        pcs_reduction,
        rr_star_pcs: ratio(pcs_reduction),
    })
}

/// Where the experiment graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSource {
    File {
        edges: PathBuf,
        #[serde(default)]
        delays: Option<PathBuf>,
        #[serde(default)]
        labels: LabelMode,
    },
    Ba {
        n: usize,
        edges_per_node: usize,
        #[serde(default)]
        seed: u64,
    },
    Ring {
        n: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayModel {
    Uniform,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RrMode {
    Exact,
    Sampled { pairs_per_trial: usize, trials: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub name: String,
    /// Name used in result rows; defaults to `name`.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub kb: Option<usize>,
    #[serde(default)]
    pub epsilon_len: Option<f64>,
}

impl AlgorithmSpec {
    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }
}

/// An experiment grid, usually read from TOML:
///
/// ```toml
/// budgets = [1, 2]
/// seeds = [0, 1, 2]
/// model = "uniform"
///
/// [graph]
/// kind = "ba"
/// n = 500
/// edges_per_node = 5
///
/// [rr]
/// mode = "sampled"
/// pairs_per_trial = 1000
/// trials = 10
///
/// [[algorithms]]
/// name = "gs"
/// sampling = { c_factor = 3.5 }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub graph: GraphSource,
    /// Delays drawn onto the graph; file graphs keep their own when absent.
    #[serde(default)]
    pub delays: Option<DelayScheme>,
    #[serde(default)]
    pub model: Option<DelayModel>,
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default)]
    pub budgets: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_rr")]
    pub rr: RrMode,
    #[serde(default = "default_cap")]
    pub exact_rr_cap: usize,
    /// Regenerate the graph and its delays from each seed.
    #[serde(default)]
    pub vary_graph_with_seed: bool,
    /// Report RR* on pairs at least this long.
    #[serde(default)]
    pub long_path_threshold: Option<f64>,
    /// Cells evaluated concurrently.
    #[serde(default = "default_threads")]
    pub threads: usize,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_rr() -> RrMode {
    RrMode::Exact
}

fn default_cap() -> usize {
    EXACT_RR_CAP
}

fn default_threads() -> usize {
    1
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    /// Resolves every algorithm tag.
    pub fn resolve_algorithms(&self) -> Result<Vec<Algorithm>> {
        self.algorithms.iter().map(|a| a.name.parse()).collect()
    }

    /// Checks everything that can be checked without running a cell.
    pub fn validate(&self) -> Result<()> {
        self.resolve_algorithms()?;
        if self.threads == 0 {
            return Err(Error::InvalidSpec("threads must be at least 1".into()));
        }
        if let Some(&k) = self.budgets.iter().find(|&&k| k == 0) {
            return Err(Error::InvalidSpec(format!("budget {k} must be at least 1")));
        }
        if let RrMode::Sampled { pairs_per_trial, trials } = self.rr {
            if pairs_per_trial == 0 || trials == 0 {
                return Err(Error::InvalidSpec("sampled RR needs pairs_per_trial and trials >= 1".into()));
            }
        }
        for a in &self.algorithms {
            a.sampling.validate().map_err(|e| Error::InvalidSpec(format!("{}: {e}", a.label())))?;
        }
        if let Some(t) = self.long_path_threshold {
            if !(t >= 0.0) {
                return Err(Error::InvalidSpec(format!("long_path_threshold must be nonnegative, got {t}")));
            }
        }
        Ok(())
    }

    /// The graph used for cells with `seed`.
    pub fn build_graph(&self, seed: u64) -> Result<DelayGraph> {
        let vary = self.vary_graph_with_seed;
        let g = match &self.graph {
            GraphSource::File { edges, delays, labels } => {
                let mut spec = GraphFileSpec::new(edges);
                spec.delays = delays.clone();
                spec.labels = *labels;
                load_graph(&spec)?
            }
            &GraphSource::Ba { n, edges_per_node, seed: base } => {
                generate_ba(&BaSpec { n, edges_per_node, seed: if vary { seed } else { base } })?
            }
            &GraphSource::Ring { n } => gen::ring(n)?,
        };
        let g = match &self.delays {
            Some(scheme) => assign_delays(&g, scheme, if vary { seed } else { 0 })?,
            None => g,
        };
        match self.model {
            Some(DelayModel::Uniform) if !g.is_uniform() => {
                Err(Error::InvalidSpec("model is uniform but the graph has non-unit delays".into()))
            }
            _ => Ok(g),
        }
    }
}

/// One `(algorithm, k, seed)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub algorithm: String,
    pub k: usize,
    pub seed: u64,
    pub rr: Option<f64>,
    pub rr_stderr: Option<f64>,
    pub rr_star: Option<f64>,
    pub time_ms: f64,
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct Prepared {
    graph: DelayGraph,
    metric: Option<RestrictedMetric>,
}

/// Runs every cell of `spec`. Rows come back ordered by algorithm, then
/// budget, then seed. A failing cell yields a row with `error` set.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let algorithms = spec.resolve_algorithms()?;
    if spec.budgets.is_empty() || spec.algorithms.is_empty() || spec.seeds.is_empty() {
        return Ok(Vec::new());
    }

    let graph_seeds: Vec<u64> = if spec.vary_graph_with_seed { spec.seeds.clone() } else { vec![spec.seeds[0]] };
    let mut prepared: BTreeMap<u64, Prepared> = BTreeMap::new();
    for &seed in &graph_seeds {
        let graph = spec.build_graph(seed)?;
        if spec.rr == RrMode::Exact && graph.node_count() > spec.exact_rr_cap {
            return Err(Error::InvalidSpec(format!(
                "exact RR is capped at {} nodes but the graph has {}; use sampled RR",
                spec.exact_rr_cap,
                graph.node_count()
            )));
        }
        let metric = spec.long_path_threshold.map(|t| RestrictedMetric::new(&graph, t)).transpose()?;
        prepared.insert(seed, Prepared { graph, metric });
    }

    let mut cells = Vec::new();
    for (ai, _) in spec.algorithms.iter().enumerate() {
        for &k in &spec.budgets {
            for &seed in &spec.seeds {
                cells.push((ai, k, seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads)
        .build()
        .map_err(|e| Error::param(format!("cannot start worker pool: {e}")))?;
    let rows = pool.install(|| {
        cells
            .par_iter()
            .map(|&(ai, k, seed)| {
                let key = if spec.vary_graph_with_seed { seed } else { spec.seeds[0] };
                let cell = &prepared[&key];
                let a = &spec.algorithms[ai];
                run_cell(spec, a, algorithms[ai], cell, k, seed).unwrap_or_else(|e| ResultRow {
                    algorithm: a.label().to_owned(),
                    k,
                    seed,
                    rr: None,
                    rr_stderr: None,
                    rr_star: None,
                    time_ms: 0.0,
                    samples: 0,
                    error: Some(e.to_string()),
                })
            })
            .collect()
    });
    Ok(rows)
}

fn run_cell(
    spec: &ExperimentSpec,
    a: &AlgorithmSpec,
    algo: Algorithm,
    cell: &Prepared,
    k: usize,
    seed: u64,
) -> Result<ResultRow> {
    let g = &cell.graph;
    let n = g.node_count();
    let params = SolveParams {
        sampling: a.sampling.clone().with_seed(a.sampling.seed ^ seed),
        kb: a.kb,
        epsilon_len: a.epsilon_len.unwrap_or(SolveParams::default().epsilon_len),
    };
    let ledger = solve(g, algo, k, &params)?;
    let st = ledger.upgrade_state(n)?;
    let (rr, rr_stderr) = match spec.rr {
        RrMode::Exact => (rr_exact_with_cap(g, &st, spec.exact_rr_cap)?, None),
        RrMode::Sampled { pairs_per_trial, trials } => {
            let est = rr_sampled(g, &st, pairs_per_trial, trials, seed)?;
            (est.mean, Some(est.stderr))
        }
    };
    let rr_star = match &cell.metric {
        Some(m) if m.total() > 0.0 => Some(m.reduction(g, &st)? / m.total()),
        Some(_) => Some(0.0),
        None => None,
    };
    Ok(ResultRow {
        algorithm: a.label().to_owned(),
        k,
        seed,
        rr: Some(rr),
        rr_stderr,
        rr_star,
        time_ms: ledger.steps.iter().map(|s| s.wall_time_ms).sum(),
        samples: ledger.samples_used,
        error: None,
    })
}

/// One JSON object per line.
pub fn write_jsonl<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    for row in rows {
        serde_json::to_writer(&mut out, row)?;
        out.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for line in input.lines() {
        let line = line.map_err(|e| Error::io("<input>", e))?;
        if !line.trim().is_empty() {
            rows.push(serde_json::from_str(&line)?);
        }
    }
    Ok(rows)
}

#[derive(Serialize, Deserialize)]
struct TableRow {
    algorithm: String,
    k: usize,
    seed: u64,
    rr: Option<f64>,
    rr_stderr: Option<f64>,
    rr_star: Option<f64>,
    time_ms: f64,
    samples: usize,
}

/// Flat CSV table with columns
/// `algorithm,k,seed,rr,rr_stderr,rr_star,time_ms,samples`. Missing values
/// are empty; error messages appear only in the JSON form.
pub fn write_table<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(TableRow {
            algorithm: r.algorithm.clone(),
            k: r.k,
            seed: r.seed,
            rr: r.rr,
            rr_stderr: r.rr_stderr,
            rr_star: r.rr_star,
            time_ms: r.time_ms,
            samples: r.samples,
        })?;
    }
    if rows.is_empty() {
        w.write_record(["algorithm", "k", "seed", "rr", "rr_stderr", "rr_star", "time_ms", "samples"])?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

pub fn read_table<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<TableRow>()
        .map(|row| {
            let t = row?;
            Ok(ResultRow {
                algorithm: t.algorithm,
                k: t.k,
                seed: t.seed,
                rr: t.rr,
                rr_stderr: t.rr_stderr,
                rr_star: t.rr_star,
                time_ms: t.time_ms,
                samples: t.samples,
                error: None,
            })
        })
        .collect()
}

/// Mean RR per `(algorithm, k)` over seeds, skipping error rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub k: usize,
    pub mean_rr: f64,
    pub stderr: f64,
    pub runs: usize,
}

pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, usize)> = Vec::new();
    let mut groups: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    for r in rows {
        let Some(rr) = r.rr else { continue };
        let key = (r.algorithm.clone(), r.k);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(rr);
    }
    order
        .into_iter()
        .map(|key| {
            let values = &groups[&key];
            let est = mean_stderr(values);
            SummaryRow { algorithm: key.0, k: key.1, mean_rr: est.mean, stderr: est.stderr, runs: values.len() }
        })
        .collect()
}
