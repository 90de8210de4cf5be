//! Influence graphs: agents, labeled directed edges and static weights.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An agent, stored 0-based and displayed 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentId(pub usize);

impl AgentId {
    /// Build from the 1-based number used in figures and configs.
    pub fn from_display(n: usize) -> Option<Self> {
        n.checked_sub(1).map(AgentId)
    }

    pub fn index(self) -> usize {
        self.0
    }

    pub fn display(self) -> usize {
        self.0 + 1
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

/// Position of an edge in its graph's edge list. Words are sequences of these.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

impl EdgeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: AgentId,
    pub to: AgentId,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("invalid influence graph: {0}")]
    Invalid(ValidationReport),
    #[error("random graph parameter out of range: {0}")]
    Parameter(String),
    #[error("unknown edge label {0:?}")]
    UnknownLabel(String),
    #[error("no edge from agent {from} to agent {to}")]
    MissingEdge { from: AgentId, to: AgentId },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Violation {
    TooFewAgents { agents: usize },
    AgentOutOfRange { edge: String, agent: usize },
    SelfLoop { edge: String },
    WeightOutOfRange { edge: String, weight: f64 },
    DuplicateEdge { from: AgentId, to: AgentId },
    DuplicateLabel { label: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewAgents { agents } => write!(f, "need at least 2 agents, got {agents}"),
            Violation::AgentOutOfRange { edge, agent } => {
                write!(f, "edge {edge}: agent index {agent} out of range")
            }
            Violation::SelfLoop { edge } => write!(f, "edge {edge}: self-loop"),
            Violation::WeightOutOfRange { edge, weight } => {
                write!(f, "edge {edge}: weight not in (0,1] ({weight})")
            }
            Violation::DuplicateEdge { from, to } => write!(f, "duplicate edge ({from},{to})"),
            Violation::DuplicateLabel { label } => write!(f, "duplicate label {label:?}"),
        }
    }
}

/// Every broken invariant of a graph; empty iff the graph is well-formed.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// A directed weighted graph. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceGraph {
    agents: usize,
    edges: Vec<Edge>,
    weights: Vec<f64>,
    by_label: HashMap<String, EdgeId>,
    by_pair: HashMap<(AgentId, AgentId), EdgeId>,
    out_edges: Vec<Vec<EdgeId>>,
}

/// Accumulates edges before validation.
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    agents: usize,
    edges: Vec<(usize, usize, Option<String>, f64)>,
}

impl GraphBuilder {
    pub fn new(agents: usize) -> Self {
        Self { agents, edges: Vec::new() }
    }

    /// Add an edge between 1-based agents.
    pub fn edge(mut self, from: usize, to: usize, label: &str, weight: f64) -> Self {
        self.edges.push((from, to, Some(label.to_string()), weight));
        self
    }

    /// Add an edge whose label is generated from its position (`e0`, `e1`, ...).
    pub fn unlabeled_edge(mut self, from: usize, to: usize, weight: f64) -> Self {
        self.edges.push((from, to, None, weight));
        self
    }

    pub fn build(self) -> Result<InfluenceGraph, GraphError> {
        let graph = self.build_unchecked();
        let report = graph.validate();
        if report.is_empty() {
            Ok(graph)
        } else {
            Err(GraphError::Invalid(report))
        }
    }

    /// Build without validating; `validate` reports what is wrong.
    pub fn build_unchecked(self) -> InfluenceGraph {
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .enumerate()
            .map(|(idx, (from, to, label, _))| Edge {
                from: AgentId(from.wrapping_sub(1)),
                to: AgentId(to.wrapping_sub(1)),
                label: label.clone().unwrap_or_else(|| format!("e{idx}")),
            })
            .collect();
        let weights = self.edges.iter().map(|e| e.3).collect();
        InfluenceGraph::assemble(self.agents, edges, weights)
    }
}

impl InfluenceGraph {
    fn assemble(agents: usize, edges: Vec<Edge>, weights: Vec<f64>) -> Self {
        let mut by_label = HashMap::new();
        let mut by_pair = HashMap::new();
        let mut out_edges = vec![Vec::new(); agents];
        for (idx, edge) in edges.iter().enumerate() {
            let id = EdgeId(idx);
            by_label.entry(edge.label.clone()).or_insert(id);
            by_pair.entry((edge.from, edge.to)).or_insert(id);
            if let Some(list) = out_edges.get_mut(edge.from.0) {
                list.push(id);
            }
        }
        Self { agents, edges, weights, by_label, by_pair, out_edges }
    }

    pub fn agent_count(&self) -> usize {
        self.agents
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (0..self.agents).map(AgentId)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(id.0)
    }

    pub fn weight(&self, id: EdgeId) -> Option<f64> {
        self.weights.get(id.0).copied()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn label(&self, id: EdgeId) -> &str {
        &self.edges[id.0].label
    }

    pub fn edge_by_label(&self, label: &str) -> Result<EdgeId, GraphError> {
        self.by_label
            .get(label)
            .copied()
            .ok_or_else(|| GraphError::UnknownLabel(label.to_string()))
    }

    /// Resolve a word written as labels.
    pub fn word(&self, labels: &[&str]) -> Result<Vec<EdgeId>, GraphError> {
        labels.iter().map(|l| self.edge_by_label(l)).collect()
    }

    pub fn edge_between(&self, from: AgentId, to: AgentId) -> Option<EdgeId> {
        self.by_pair.get(&(from, to)).copied()
    }

    /// Look up an edge by 1-based endpoints.
    pub fn require_edge(&self, from: usize, to: usize) -> Result<EdgeId, GraphError> {
        let (f, t) = (AgentId(from - 1), AgentId(to - 1));
        self.edge_between(f, t).ok_or(GraphError::MissingEdge { from: f, to: t })
    }

    pub fn out_edges(&self, agent: AgentId) -> &[EdgeId] {
        &self.out_edges[agent.0]
    }

    /// Same topology and labels with every weight replaced.
    pub fn with_uniform_weight(&self, weight: f64) -> Self {
        Self::assemble(self.agents, self.edges.clone(), vec![weight; self.edges.len()])
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.agents < 2 {
            violations.push(Violation::TooFewAgents { agents: self.agents });
        }
        let mut pairs = HashSet::new();
        let mut labels = HashSet::new();
        for (edge, &weight) in self.edges.iter().zip(&self.weights) {
            for agent in [edge.from, edge.to] {
                if agent.0 >= self.agents {
                    violations.push(Violation::AgentOutOfRange {
                        edge: edge.label.clone(),
                        agent: agent.0.wrapping_add(1),
                    });
                }
            }
            if edge.from == edge.to {
                violations.push(Violation::SelfLoop { edge: edge.label.clone() });
            }
            if !(weight > 0.0 && weight <= 1.0) {
                violations.push(Violation::WeightOutOfRange { edge: edge.label.clone(), weight });
            }
            if !pairs.insert((edge.from, edge.to)) {
                violations.push(Violation::DuplicateEdge { from: edge.from, to: edge.to });
            }
            if !labels.insert(edge.label.as_str()) {
                violations.push(Violation::DuplicateLabel { label: edge.label.clone() });
            }
        }
        ValidationReport { violations }
    }

    /// Kosaraju: a single strongly connected component covering every agent.
    pub fn is_strongly_connected(&self) -> bool {
        if self.agents == 0 {
            return false;
        }
        let forward = self.reachable_from(AgentId(0), |g, a| {
            g.out_edges[a.0].iter().map(|e| g.edges[e.0].to).collect()
        });
        if forward.iter().any(|r| !r) {
            return false;
        }
        let mut incoming = vec![Vec::new(); self.agents];
        for edge in &self.edges {
            incoming[edge.to.0].push(edge.from);
        }
        let backward = self.reachable_from(AgentId(0), |_, a| incoming[a.0].clone());
        backward.iter().all(|r| *r)
    }

    fn reachable_from<F>(&self, start: AgentId, next: F) -> Vec<bool>
    where
        F: Fn(&Self, AgentId) -> Vec<AgentId>,
    {
        let mut seen = vec![false; self.agents];
        let mut stack = vec![start];
        seen[start.0] = true;
        while let Some(a) = stack.pop() {
            for b in next(self, a) {
                if !seen[b.0] {
                    seen[b.0] = true;
                    stack.push(b);
                }
            }
        }
        seen
    }

    /// Every weight strictly below 1.
    pub fn is_puppet_free(&self) -> bool {
        self.weights.iter().all(|&w| w < 1.0)
    }

    /// `(min, max)` over edge weights; `None` for an edgeless graph.
    pub fn influence_extrema(&self) -> Option<(f64, f64)> {
        let mut iter = self.weights.iter().copied();
        let first = iter.next()?;
        Some(iter.fold((first, first), |(lo, hi), w| (lo.min(w), hi.max(w))))
    }

    /// All simple directed paths leaving `start`, in depth-first edge order.
    pub fn simple_paths_from(&self, start: AgentId) -> Vec<GPath> {
        let mut paths = Vec::new();
        let mut visited = vec![false; self.agents];
        let mut current = Vec::new();
        visited[start.0] = true;
        self.extend_paths(start, &mut visited, &mut current, &mut paths);
        paths
    }

    fn extend_paths(
        &self,
        at: AgentId,
        visited: &mut [bool],
        current: &mut Vec<EdgeId>,
        out: &mut Vec<GPath>,
    ) {
        for &e in &self.out_edges[at.0] {
            let to = self.edges[e.0].to;
            if visited[to.0] {
                continue;
            }
            visited[to.0] = true;
            current.push(e);
            out.push(GPath { edges: current.clone() });
            self.extend_paths(to, visited, current, out);
            current.pop();
            visited[to.0] = false;
        }
    }
}

/// A simple directed path: chained edges, pairwise distinct agents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GPath {
    pub edges: Vec<EdgeId>,
}

impl GPath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn start(&self, graph: &InfluenceGraph) -> AgentId {
        graph.edges[self.edges[0].0].from
    }

    pub fn end(&self, graph: &InfluenceGraph) -> AgentId {
        graph.edges[self.edges[self.edges.len() - 1].0].to
    }

    /// Chaining plus distinct visited agents.
    pub fn is_valid(&self, graph: &InfluenceGraph) -> bool {
        if self.edges.is_empty() || self.edges.len() >= graph.agent_count() {
            return false;
        }
        let mut seen = HashSet::new();
        seen.insert(self.start(graph));
        let mut at = self.start(graph);
        for &e in &self.edges {
            let Some(edge) = graph.edge(e) else { return false };
            if edge.from != at || !seen.insert(edge.to) {
                return false;
            }
            at = edge.to;
        }
        true
    }

    pub fn labels(&self, graph: &InfluenceGraph) -> String {
        self.edges.iter().map(|&e| graph.label(e)).collect::<Vec<_>>().join("")
    }
}

/// Each ordered pair `(i, j)`, `i != j`, is included with `edge_probability`,
/// drawing pairs row-major from a ChaCha8 stream seeded with `seed`.
pub fn random_graph(
    agents: usize,
    edge_probability: f64,
    weight: f64,
    seed: u64,
) -> Result<InfluenceGraph, GraphError> {
    if agents < 2 {
        return Err(GraphError::Parameter(format!("agents = {agents}, need >= 2")));
    }
    if !(edge_probability > 0.0 && edge_probability <= 1.0) {
        return Err(GraphError::Parameter(format!(
            "edge probability {edge_probability} not in (0,1]"
        )));
    }
    if !(weight > 0.0 && weight <= 1.0) {
        return Err(GraphError::Parameter(format!("weight {weight} not in (0,1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut builder = GraphBuilder::new(agents);
    for from in 1..=agents {
        for to in 1..=agents {
            if from == to {
                continue;
            }
            if rng.random::<f64>() < edge_probability {
                builder = builder.unlabeled_edge(from, to, weight);
            }
        }
    }
    builder.build()
}

/// Agents `1..=n` on a line with both directions per link, labeled
/// `a, b` (1→2, 2→1), `d, c` (2→3, 3→2), `f, e` (3→4, 4→3), and so on.
/// Edges are stored in label order.
pub fn bidirectional_line(agents: usize, weight: f64) -> Result<InfluenceGraph, GraphError> {
    if !(2..=14).contains(&agents) {
        return Err(GraphError::Parameter(format!("line length {agents} not in 2..=14")));
    }
    let mut edges = Vec::new();
    for link in 1..agents {
        let base = b'a' + 2 * (link as u8 - 1);
        let (fwd, back) = if link == 1 { (base, base + 1) } else { (base + 1, base) };
        edges.push(((fwd as char).to_string(), link, link + 1));
        edges.push(((back as char).to_string(), link + 1, link));
    }
    edges.sort();
    edges
        .into_iter()
        .fold(GraphBuilder::new(agents), |b, (label, from, to)| b.edge(from, to, &label, weight))
        .build()
}

/// Two isolated strongly connected pairs `{1,2}` and `{5,6}` both feeding the
/// pair `{3,4}`, labeled `a0`..`a9`.
pub fn two_sources_graph(weight: f64) -> Result<InfluenceGraph, GraphError> {
    GraphBuilder::new(6)
        .edge(1, 2, "a0", weight)
        .edge(2, 1, "a1", weight)
        .edge(3, 4, "a2", weight)
        .edge(4, 3, "a3", weight)
        .edge(5, 6, "a4", weight)
        .edge(6, 5, "a5", weight)
        .edge(5, 3, "a6", weight)
        .edge(6, 4, "a7", weight)
        .edge(1, 3, "a8", weight)
        .edge(2, 4, "a9", weight)
        .build()
}
