//! Graph fixtures shared by the benchmarks.

use delaymin::io::{assign_delays, DelayScheme};
use delaymin::{gen, BaSpec, DelayGraph};

/// Preferential-attachment graph with unit delays.
pub fn unit_ba(n: usize, edges_per_node: usize) -> DelayGraph {
    gen::generate_ba(&BaSpec { n, edges_per_node, seed: 1 }).expect("valid generator parameters")
}

/// Same graph with integer delays in `[500, 1000]`.
pub fn weighted_ba(n: usize, edges_per_node: usize) -> DelayGraph {
    let scheme = DelayScheme::UniformIntRange { lo: 500, hi: 1000, step: 1 };
    assign_delays(&unit_ba(n, edges_per_node), &scheme, 2).expect("valid delay scheme")
}
