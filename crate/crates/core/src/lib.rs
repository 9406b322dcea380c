//! Node-upgrade delay minimization.
//!
//! Given an undirected graph with a positive delay on every node and a budget
//! `k`, choose `k` nodes whose delay is reset to zero so that the sum of
//! shortest-path delays over all ordered pairs (the SPD) is as small as
//! possible. A path pays the delay of every node on it except its
//! destination.
//!
//! Solvers:
//! - [`greedy_gr`] and [`brute_force_optimal`]: exact greedy and exhaustive
//!   search, also used as oracles.
//! - [`gs_select`]: greedy driven by a uniform sample of vertex pairs, for
//!   arbitrary delays.
//! - [`pcs_select`]: sampled shortest-path membership counting for unit
//!   delays.
//! - [`baselines`]: random, degree, delay and path-centrality heuristics.
//!
//! [`eval`] measures relative reduction and runs experiment grids; [`io`]
//! and [`gen`] load, save and generate graphs.

// Negated float comparisons are how NaN gets rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod eval;
pub mod exact;
pub mod gen;
pub mod graph;
pub mod gs;
pub mod io;
pub mod pcs;
pub mod sampling;
pub mod solve;

pub use error::{Error, Result};
pub use exact::{
    brute_force_optimal, greedy_gr, reduction_of_set, rs_of_vertex, LedgerStep, OptimalSet, ReductionLedger,
};
pub use gen::BaSpec;
pub use graph::{
    collapse_zero_delay, effective_delay, graph_stats, spd, sssp, DelayGraph, Direction, DistanceField, DistanceMatrix,
    GraphStats, NodeId, UpgradeState,
};
pub use gs::gs_select;
pub use pcs::{exact_zeta, membership_bfs, pcs_select, EditedGraph};
pub use sampling::{draw_pairs, PairSample, SamplingConfig};
pub use solve::{solve, Algorithm, SolveParams};
