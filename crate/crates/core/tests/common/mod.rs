#![allow(dead_code)]

use otslab_core::graph::{GraphBuilder, InfluenceGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A strongly connected, puppet-free graph on 2..=max_agents agents with
/// per-edge weights drawn from [0.05, 0.95].
pub fn random_connected_graph(seed: u64, max_agents: usize) -> InfluenceGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.random_range(2..=max_agents);
        let p = rng.random_range(0.25..0.9);
        let mut b = GraphBuilder::new(n);
        for from in 1..=n {
            for to in 1..=n {
                if from != to && rng.random::<f64>() < p {
                    b = b.unlabeled_edge(from, to, rng.random_range(0.05..=0.95));
                }
            }
        }
        let g = b.build().expect("generated graph is well-formed");
        if g.is_strongly_connected() {
            return g;
        }
    }
}

pub fn random_state(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    (0..n).map(|_| rng.random::<f64>()).collect()
}
