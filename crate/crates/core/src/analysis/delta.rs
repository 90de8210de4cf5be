use crate::graph::{AgentId, EdgeId, InfluenceGraph};

use super::RunTrace;

/// Sorted occurrence positions per edge, for next-occurrence queries on a word.
#[derive(Clone, Debug)]
pub struct OccurrenceIndex {
    positions: Vec<Vec<usize>>,
    len: usize,
}

impl OccurrenceIndex {
    pub fn new(word: &[EdgeId], alphabet: usize) -> Self {
        let mut positions = vec![Vec::new(); alphabet];
        for (t, e) in word.iter().enumerate() {
            positions[e.0].push(t);
        }
        Self { positions, len: word.len() }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// First position `>= from` holding `edge`.
    pub fn next(&self, edge: EdgeId, from: usize) -> Option<usize> {
        let p = self.positions.get(edge.0)?;
        p.get(p.partition_point(|&x| x < from)).copied()
    }

    /// δ of `path` in the suffix starting at `start`: the length of its
    /// shortest prefix containing `path` as a subsequence.
    pub fn delta_from(&self, start: usize, path: &[EdgeId]) -> Option<usize> {
        let mut pos = start;
        for &e in path {
            pos = self.next(e, pos)? + 1;
        }
        Some(pos - start)
    }

    /// Δ of `agent` in the suffix starting at `start`: the largest δ over the
    /// simple paths leaving `agent`; `None` if one is not yet contained. Paths
    /// are walked depth-first so shared prefixes are matched once.
    pub fn agent_delta_from(&self, graph: &InfluenceGraph, agent: AgentId, start: usize) -> Option<usize> {
        let mut visited = vec![false; graph.agent_count()];
        visited[agent.0] = true;
        let mut worst = 0;
        self.walk(graph, agent, start, start, &mut visited, &mut worst).then_some(worst)
    }

    fn walk(
        &self,
        graph: &InfluenceGraph,
        at: AgentId,
        start: usize,
        pos: usize,
        visited: &mut [bool],
        worst: &mut usize,
    ) -> bool {
        for &e in graph.out_edges(at) {
            let to = graph.edges()[e.0].to;
            if visited[to.0] {
                continue;
            }
            let Some(found) = self.next(e, pos) else { return false };
            *worst = (*worst).max(found + 1 - start);
            visited[to.0] = true;
            let ok = self.walk(graph, to, start, found + 1, visited, worst);
            visited[to.0] = false;
            if !ok {
                return false;
            }
        }
        true
    }
}

pub fn delta_of_path(word: &[EdgeId], path: &[EdgeId]) -> Option<usize> {
    let alphabet = word.iter().chain(path).map(|e| e.0 + 1).max().unwrap_or(0);
    OccurrenceIndex::new(word, alphabet).delta_from(0, path)
}

pub fn delta_of_agent(word: &[EdgeId], graph: &InfluenceGraph, agent: AgentId) -> Option<usize> {
    OccurrenceIndex::new(word, graph.edge_count()).agent_delta_from(graph, agent, 0)
}

/// Least agent holding the minimum opinion.
pub fn min_opinion_agent(state: &[f64]) -> AgentId {
    let mut best = 0;
    for (k, &v) in state.iter().enumerate() {
        if v < state[best] {
            best = k;
        }
    }
    AgentId(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaScan {
    pub beta: usize,
    pub sampled: Vec<usize>,
    /// `(t, Δ)` for every sampled suffix whose minimum-opinion agent has Δ ≤ β.
    pub hits: Vec<(usize, usize)>,
}

impl DeltaScan {
    pub fn hit_times(&self) -> Vec<usize> {
        self.hits.iter().map(|h| h.0).collect()
    }

    pub fn last_hit(&self) -> Option<usize> {
        self.hits.last().map(|h| h.0)
    }
}

/// Sample suffix starts `0, stride, 2·stride, …` and keep those where β bounds
/// Δ of the suffix's minimum-opinion agent.
pub fn delta_bound_scan(trace: &RunTrace, graph: &InfluenceGraph, beta: usize, stride: usize) -> DeltaScan {
    let index = OccurrenceIndex::new(trace.actions(), graph.edge_count());
    let stride = stride.max(1);
    let sampled: Vec<usize> = (0..trace.steps()).step_by(stride).collect();
    let hits = sampled
        .iter()
        .filter_map(|&t| {
            let agent = min_opinion_agent(trace.state(t));
            let d = index.agent_delta_from(graph, agent, t)?;
            (d <= beta).then_some((t, d))
        })
        .collect();
    DeltaScan { beta, sampled, hits }
}
