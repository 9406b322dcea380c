#![allow(dead_code)]

use delaymin::gen::{self, Rng};
use delaymin::{DelayGraph, NodeId, UpgradeState};
use rand::Rng as _;

/// All-pairs delays by Floyd–Warshall on the node-weighted graph. Each hop
/// `u -> v` costs the effective delay of `u`.
pub fn floyd_warshall(g: &DelayGraph, st: &UpgradeState) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0.0;
        let w = if st.contains(u) { 0.0 } else { g.delay(u) };
        for &v in g.neighbors(u) {
            row[v] = row[v].min(w);
        }
    }
    for m in 0..n {
        for s in 0..n {
            for t in 0..n {
                let via = d[s][m] + d[m][t];
                if via < d[s][t] {
                    d[s][t] = via;
                }
            }
        }
    }
    d
}

pub fn fw_spd(g: &DelayGraph, st: &UpgradeState) -> f64 {
    floyd_warshall(g, st).iter().flatten().sum()
}

/// `{v : d(s,v) + d(v,t) = d(s,t), v not upgraded, v not in {s,t}}`.
pub fn brute_membership(d: &[Vec<f64>], st: &UpgradeState, s: NodeId, t: NodeId) -> Vec<NodeId> {
    (0..d.len()).filter(|&v| v != s && v != t && !st.contains(v) && d[s][v] + d[v][t] == d[s][t]).collect()
}

/// Integer delays in `1..=max` so every sum is exact in floating point.
pub fn integer_delays(g: &DelayGraph, max: u32, rng: &mut Rng) -> DelayGraph {
    let delays = (0..g.node_count()).map(|_| rng.random_range(1..=max) as f64).collect();
    g.with_delays(delays).unwrap()
}

/// Connected graph on `2..=max_n` nodes with integer delays up to
/// `max_delay` (unit delays when `max_delay` is 1).
pub fn random_instance(max_n: usize, max_delay: u32, rng: &mut Rng) -> DelayGraph {
    let n = rng.random_range(2..=max_n);
    let p = rng.random_range(0.0..0.4);
    let g = gen::random_connected(n, p, rng).unwrap();
    if max_delay > 1 {
        integer_delays(&g, max_delay, rng)
    } else {
        g
    }
}

/// Up to `max` random upgrades.
pub fn random_state(n: usize, max: usize, rng: &mut Rng) -> UpgradeState {
    let count = rng.random_range(0..=max.min(n - 1));
    let mut st = UpgradeState::empty(n);
    while st.len() < count {
        let _ = st.upgrade(rng.random_range(0..n));
    }
    st
}
