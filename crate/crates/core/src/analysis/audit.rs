//! Numerical checks of the upper bounds on opinions that drive the consensus
//! argument. Every bound is evaluated on the trace as stated; a correct
//! engine yields no violations beyond a tiny slack.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::max_of;
use crate::graph::{AgentId, InfluenceGraph};

use super::delta::{delta_bound_scan, min_opinion_agent, OccurrenceIndex};
use super::RunTrace;

pub const EXTREMES: &str = "new opinions stay within previous extremes";
pub const MONOTONE: &str = "maximum non-increasing, minimum non-decreasing";
pub const ONE_STEP: &str = "one-step upper bound";
pub const N_STEP: &str = "n-step upper bound";
pub const DIRECT: &str = "direct influence bound";
pub const PATH: &str = "upper bound along a path";
pub const NETWORK: &str = "maximum decrease over the network";
pub const EPSILON: &str = "epsilon decrement at a delta-bound";

#[derive(Clone, Debug)]
pub struct AuditOptions {
    pub slack: f64,
    /// Base times for the bounds measured from a chosen origin.
    pub origins: usize,
    /// How far past each origin the n-step and direct bounds are checked.
    pub horizon: usize,
    /// Budget of (origin, path) pairs for the path bound.
    pub path_samples: usize,
    pub seed: u64,
    /// β for the epsilon check; `None` uses `(|A| − 1)·|E|`.
    pub beta: Option<usize>,
    pub stride: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            slack: 1e-12,
            origins: 64,
            horizon: 512,
            path_samples: 10_000,
            seed: 0x5eed,
            beta: None,
            stride: 100,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub evaluated: usize,
    pub violations: usize,
    /// Largest `lhs − rhs` past the slack, if any.
    pub worst_excess: f64,
    pub first_violation: Option<String>,
    /// Why the bound was not evaluated, when its preconditions fail.
    pub skipped: Option<&'static str>,
}

impl BoundCheck {
    fn new(name: &'static str) -> Self {
        Self { name, ..Self::default() }
    }

    /// Record `value <= bound`.
    fn le(&mut self, value: f64, bound: f64, slack: f64, at: impl FnOnce() -> String) {
        self.evaluated += 1;
        let excess = value - bound;
        if excess > slack {
            self.violations += 1;
            self.worst_excess = self.worst_excess.max(excess);
            if self.first_violation.is_none() {
                self.first_violation = Some(format!("{}: {value} > {bound}", at()));
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub influence_range: (f64, f64),
    pub checks: Vec<BoundCheck>,
}

impl AuditReport {
    pub fn total_violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn origins(steps: usize, count: usize) -> Vec<usize> {
    let count = count.max(1);
    let stride = (steps / count).max(1);
    (0..steps).step_by(stride).take(count).collect()
}

/// Evaluate every bound on `trace`. `(i_min, i_max)` are the extreme
/// influences: the static weights' range, or `[I_L, I_U]` for bounded
/// dynamic influence.
pub fn audit_bounds(
    trace: &RunTrace,
    graph: &InfluenceGraph,
    (i_min, i_max): (f64, f64),
    options: &AuditOptions,
) -> AuditReport {
    let slack = options.slack;
    let steps = trace.steps();
    let mut extremes = BoundCheck::new(EXTREMES);
    let mut monotone = BoundCheck::new(MONOTONE);
    let mut one_step = BoundCheck::new(ONE_STEP);
    for t in 0..steps {
        let (before, after) = (trace.state(t), trace.state(t + 1));
        let (hi, lo) = (trace.max_series()[t], trace.min_series()[t]);
        for (k, (&b, &a)) in before.iter().zip(after).enumerate() {
            extremes.le(a, hi, slack, || format!("t={t}, agent {}", k + 1));
            extremes.le(lo, a, slack, || format!("t={t}, agent {}", k + 1));
            one_step.le(a, b * (1.0 - i_max) + hi * i_max, slack, || format!("t={t}, agent {}", k + 1));
        }
        monotone.le(trace.max_series()[t + 1], hi, slack, || format!("max at t={}", t + 1));
        monotone.le(lo, trace.min_series()[t + 1], slack, || format!("min at t={}", t + 1));
    }

    let mut n_step = BoundCheck::new(N_STEP);
    let mut direct = BoundCheck::new(DIRECT);
    let bases = origins(steps, options.origins);
    for &t0 in &bases {
        let b0 = trace.state(t0);
        let hi0 = trace.max_series()[t0];
        let end = (t0 + options.horizon).min(steps);
        let mut decay = 1.0;
        for t in t0..end {
            // decay = (1 − I_max)^(t − t0)
            let edge = &graph.edges()[trace.actions()[t].0];
            let (i, j) = (edge.from.0, edge.to.0);
            direct.le(trace.state(t + 1)[j], hi0 - i_min * decay * (hi0 - b0[i]), slack, || {
                format!("origin {t0}, action {t} ({},{})", i + 1, j + 1)
            });
            decay *= 1.0 - i_max;
            for (k, &v) in trace.state(t + 1).iter().enumerate() {
                n_step.le(v, hi0 - decay * (hi0 - b0[k]), slack, || {
                    format!("origin {t0}, n={}, agent {}", t + 1 - t0, k + 1)
                });
            }
        }
    }

    let index = OccurrenceIndex::new(trace.actions(), graph.edge_count());
    let mut path = BoundCheck::new(PATH);
    let all_paths: Vec<_> = graph.agents().flat_map(|a| graph.simple_paths_from(a)).collect();
    if !all_paths.is_empty() && steps > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        let pair_budget = options.path_samples;
        let per_origin = (pair_budget / bases.len().max(1)).max(1);
        for &t0 in &bases {
            let picks: Vec<_> = if all_paths.len() <= per_origin {
                all_paths.iter().collect()
            } else {
                all_paths.choose_multiple(&mut rng, per_origin).collect()
            };
            let b0 = trace.state(t0);
            let hi0 = trace.max_series()[t0];
            for p in picks {
                let Some(d) = index.delta_from(t0, &p.edges) else { continue };
                let (i, j) = (p.start(graph).0, p.end(graph).0);
                let rhs = hi0 - i_min.powi(p.len() as i32) * (1.0 - i_max).powi(d as i32) * (hi0 - b0[i]);
                path.le(trace.state(t0 + d)[j], rhs, slack, || {
                    format!("origin {t0}, path {}", p.labels(graph))
                });
            }
        }
    }

    // both remaining bounds need every agent's influence to reach everyone
    let connected = graph.is_strongly_connected();
    let unconnected = Some("graph is not strongly connected");
    let n = graph.agent_count() as i32;
    let mut network = BoundCheck::new(NETWORK);
    for &t0 in bases.iter().filter(|_| connected) {
        let b0 = trace.state(t0);
        let hi0 = trace.max_series()[t0];
        for agent in graph.agents() {
            let Some(d) = index.agent_delta_from(graph, agent, t0) else { continue };
            let rhs = i_min.powi(n) * (1.0 - i_max).powi(d as i32) * (hi0 - b0[agent.0]);
            let lhs = hi0 - max_of(trace.state(t0 + d));
            network.le(rhs, lhs, slack, || format!("origin {t0}, agent {}, Δ={d}", agent.display()));
        }
    }

    let beta = options.beta.unwrap_or((graph.agent_count().saturating_sub(1)) * graph.edge_count());
    let mut epsilon = BoundCheck::new(EPSILON);
    let (upper, lower) = (trace.max_series()[steps], trace.min_series()[steps]);
    if connected {
        for row in epsilon_decrement(trace, graph, beta, options.stride, upper, lower, (i_min, i_max)) {
            epsilon.le(row.epsilon, row.lhs, slack, || format!("suffix at t={}", row.t));
        }
    } else {
        network.skipped = unconnected;
        epsilon.skipped = unconnected;
    }

    AuditReport {
        influence_range: (i_min, i_max),
        checks: vec![extremes, monotone, one_step, n_step, direct, path, network, epsilon],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonRow {
    pub t: usize,
    pub lhs: f64,
    pub epsilon: f64,
}

/// At each sampled suffix start `t` where β is a Δ-bound (and `t + β` is
/// inside the trace): `lhs = max(B^t) − max(B^{t+β})` against
/// `ε = I_min^{|A|} (1 − I_max)^β (U − L)`.
pub fn epsilon_decrement(
    trace: &RunTrace,
    graph: &InfluenceGraph,
    beta: usize,
    stride: usize,
    upper: f64,
    lower: f64,
    (i_min, i_max): (f64, f64),
) -> Vec<EpsilonRow> {
    let eps = i_min.powi(graph.agent_count() as i32) * (1.0 - i_max).powi(beta as i32) * (upper - lower);
    delta_bound_scan(trace, graph, beta, stride)
        .hits
        .into_iter()
        .filter(|&(t, _)| t + beta <= trace.steps())
        .map(|(t, _)| EpsilonRow {
            t,
            lhs: trace.max_series()[t] - trace.max_series()[t + beta],
            epsilon: eps,
        })
        .collect()
}

/// The agent whose influence the epsilon bound follows at time `t`.
pub fn bound_agent(trace: &RunTrace, t: usize) -> AgentId {
    min_opinion_agent(trace.state(t))
}
