//! Opinion states, the single-edge update, and static or state-dependent influence.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{AgentId, EdgeId, InfluenceGraph};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("opinion {value} of agent {agent} is not in [0,1]")]
    OpinionOutOfRange { agent: AgentId, value: f64 },
    #[error("state has {got} opinions, graph has {expected} agents")]
    WrongLength { expected: usize, got: usize },
    #[error("edge {0:?} is not in the graph")]
    UnknownEdge(EdgeId),
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("bounds must satisfy 0 < lower < upper < 1, got [{lower}, {upper}]")]
    BadBounds { lower: f64, upper: f64 },
    #[error("influence {name} is not defined for edge {label}")]
    EdgeNotSupported { name: &'static str, label: String },
    #[error("influence value {0} left [0,1]")]
    InfluenceOutOfRange(f64),
    #[error("{0}")]
    Table(String),
}

/// One opinion in `[0,1]` per agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpinionState(Vec<f64>);

impl OpinionState {
    pub fn new(values: Vec<f64>) -> Result<Self, DynamicsError> {
        for (i, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(DynamicsError::OpinionOutOfRange { agent: AgentId(i), value: v });
            }
        }
        Ok(Self(values))
    }

    pub fn consensual(agents: usize, value: f64) -> Result<Self, DynamicsError> {
        Self::new(vec![value; agents])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, agent: AgentId) -> f64 {
        self.0[agent.0]
    }

    pub fn max(&self) -> f64 {
        max_of(&self.0)
    }

    pub fn min(&self) -> f64 {
        min_of(&self.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

pub(crate) fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn min_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `min(max(r, 0), 1)`.
pub fn clamp01(r: f64) -> Result<f64, DynamicsError> {
    if !r.is_finite() {
        return Err(DynamicsError::NonFinite(r));
    }
    Ok(r.clamp(0.0, 1.0))
}

/// `1 - |B_j - B_i|` for edge `(i, j)`.
pub fn confirmation_bias(source: f64, target: f64) -> f64 {
    1.0 - (target - source).abs()
}

/// Affine map of `raw` in `[0,1]` onto `[lower, upper]`.
pub fn bounded_scale(raw: f64, lower: f64, upper: f64) -> Result<f64, DynamicsError> {
    check_bounds(lower, upper)?;
    if !raw.is_finite() {
        return Err(DynamicsError::NonFinite(raw));
    }
    let raw = raw.clamp(0.0, 1.0);
    Ok((lower + (upper - lower) * raw).clamp(lower, upper))
}

fn check_bounds(lower: f64, upper: f64) -> Result<(), DynamicsError> {
    if 0.0 < lower && lower < upper && upper < 1.0 {
        Ok(())
    } else {
        Err(DynamicsError::BadBounds { lower, upper })
    }
}

/// Per-edge influence read from a `bins x bins` grid indexed by the
/// discretized opinions of the source and target. Edges without a table use
/// their static weight. Experimental; not tied to any analytic result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluenceTable {
    bins: usize,
    tables: HashMap<EdgeId, Vec<f64>>,
}

impl InfluenceTable {
    pub fn new(bins: usize, tables: HashMap<EdgeId, Vec<f64>>) -> Result<Self, DynamicsError> {
        if bins == 0 {
            return Err(DynamicsError::Table("bins must be positive".into()));
        }
        for (edge, values) in &tables {
            if values.len() != bins * bins {
                return Err(DynamicsError::Table(format!(
                    "edge {edge:?}: expected {} entries, got {}",
                    bins * bins,
                    values.len()
                )));
            }
            if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(DynamicsError::InfluenceOutOfRange(*v));
            }
        }
        Ok(Self { bins, tables })
    }

    fn bin(&self, opinion: f64) -> usize {
        ((opinion * self.bins as f64) as usize).min(self.bins - 1)
    }

    fn lookup(&self, edge: EdgeId, source: f64, target: f64) -> Option<f64> {
        let table = self.tables.get(&edge)?;
        Some(table[self.bin(source) * self.bins + self.bin(target)])
    }
}

/// How much the source of an edge sways its target, possibly depending on the
/// current state.
#[derive(Clone, Debug, PartialEq)]
pub enum InfluenceFunction {
    /// The graph weight.
    Static,
    ConfirmationBias,
    /// `inner` rescaled onto `[lower, upper]`.
    BoundedScaled { inner: Box<InfluenceFunction>, lower: f64, upper: f64 },
    /// Two agents, edges `1→2` and `2→1`; keeps agent 2 drifting to `upper`
    /// and agent 1 to `lower`. Evaluates to 0.5 on consensual states.
    DivergentPair { lower: f64, upper: f64 },
    /// Three agents on a line; `1→2` sets agent 2 to the midpoint of agent 1
    /// and `lower`, `3→2` to the midpoint of agent 3 and `upper`; the other
    /// two edges have influence 0.5.
    DivergentLine { lower: f64, upper: f64 },
    Table(InfluenceTable),
}

impl InfluenceFunction {
    pub fn confirmation_bias_scaled(lower: f64, upper: f64) -> Result<Self, DynamicsError> {
        check_bounds(lower, upper)?;
        Ok(Self::BoundedScaled { inner: Box::new(Self::ConfirmationBias), lower, upper })
    }

    pub fn is_static(&self) -> bool {
        matches!(self, Self::Static)
    }

    /// Range guaranteed for every edge and state, if one is known.
    pub fn guaranteed_range(&self, graph: &InfluenceGraph) -> Option<(f64, f64)> {
        match self {
            Self::Static => graph.influence_extrema(),
            Self::BoundedScaled { lower, upper, .. } => Some((*lower, *upper)),
            _ => None,
        }
    }

    /// Influence of `edge` in `state`, always within `[0,1]`.
    pub fn evaluate(
        &self,
        graph: &InfluenceGraph,
        edge: EdgeId,
        state: &[f64],
    ) -> Result<f64, DynamicsError> {
        let e = graph.edge(edge).ok_or(DynamicsError::UnknownEdge(edge))?;
        let (source, target) = (state[e.from.0], state[e.to.0]);
        let value = match self {
            Self::Static => graph.weight(edge).ok_or(DynamicsError::UnknownEdge(edge))?,
            Self::ConfirmationBias => confirmation_bias(source, target),
            Self::BoundedScaled { inner, lower, upper } => {
                bounded_scale(inner.evaluate(graph, edge, state)?, *lower, *upper)?
            }
            Self::DivergentPair { lower, upper } => {
                divergent_pair(graph, edge, state, *lower, *upper)?
            }
            Self::DivergentLine { lower, upper } => {
                divergent_line(graph, edge, state, *lower, *upper)?
            }
            Self::Table(table) => match table.lookup(edge, source, target) {
                Some(v) => v,
                None => graph.weight(edge).ok_or(DynamicsError::UnknownEdge(edge))?,
            },
        };
        if (0.0..=1.0).contains(&value) {
            Ok(value)
        } else {
            Err(DynamicsError::InfluenceOutOfRange(value))
        }
    }
}

fn endpoints(graph: &InfluenceGraph, edge: EdgeId) -> (usize, usize) {
    let e = &graph.edges()[edge.0];
    (e.from.display(), e.to.display())
}

fn divergent_pair(
    graph: &InfluenceGraph,
    edge: EdgeId,
    state: &[f64],
    lower: f64,
    upper: f64,
) -> Result<f64, DynamicsError> {
    if state.len() != 2 {
        return Err(DynamicsError::WrongLength { expected: 2, got: state.len() });
    }
    let (b1, b2) = (state[0], state[1]);
    let pull_up = match endpoints(graph, edge) {
        (1, 2) => true,
        (2, 1) => false,
        _ => {
            return Err(DynamicsError::EdgeNotSupported {
                name: "divergent pair",
                label: graph.label(edge).to_string(),
            })
        }
    };
    if b1 == b2 {
        return Ok(0.5);
    }
    if pull_up {
        clamp01((upper - b2) / (2.0 * (b1 - b2)))
    } else {
        clamp01((lower - b1) / (2.0 * (b2 - b1)))
    }
}

fn divergent_line(
    graph: &InfluenceGraph,
    edge: EdgeId,
    state: &[f64],
    lower: f64,
    upper: f64,
) -> Result<f64, DynamicsError> {
    if state.len() != 3 {
        return Err(DynamicsError::WrongLength { expected: 3, got: state.len() });
    }
    let (b1, b2, b3) = (state[0], state[1], state[2]);
    match endpoints(graph, edge) {
        (2, 1) | (2, 3) => Ok(0.5),
        (1, 2) if b1 == b2 => Ok(0.5),
        (1, 2) => clamp01((0.5 * (b1 + lower) - b2) / (b1 - b2)),
        (3, 2) if b2 == b3 => Ok(0.5),
        (3, 2) => clamp01((0.5 * (b3 + upper) - b2) / (b3 - b2)),
        _ => Err(DynamicsError::EdgeNotSupported {
            name: "divergent line",
            label: graph.label(edge).to_string(),
        }),
    }
}

/// Apply edge `(i, j)` in place: `B_j += (B_i - B_j) * w`. Returns `w`.
///
/// The result is kept between `B_i` and `B_j` so the update stays a convex
/// combination under rounding; `w = 1` copies `B_i` exactly.
pub fn apply_edge(
    values: &mut [f64],
    graph: &InfluenceGraph,
    edge: EdgeId,
    influence: &InfluenceFunction,
) -> Result<f64, DynamicsError> {
    let e = graph.edge(edge).ok_or(DynamicsError::UnknownEdge(edge))?;
    let w = influence.evaluate(graph, edge, values)?;
    let (source, target) = (values[e.from.0], values[e.to.0]);
    values[e.to.0] = mix(target, source, w);
    Ok(w)
}

fn mix(target: f64, source: f64, w: f64) -> f64 {
    if w == 1.0 {
        return source;
    }
    if w == 0.0 {
        return target;
    }
    let raw = target + (source - target) * w;
    raw.clamp(target.min(source), target.max(source))
}

/// The successor of `state` under `edge`; every other component is copied.
pub fn step(
    state: &OpinionState,
    edge: EdgeId,
    influence: &InfluenceFunction,
    graph: &InfluenceGraph,
) -> Result<OpinionState, DynamicsError> {
    if state.len() != graph.agent_count() {
        return Err(DynamicsError::WrongLength { expected: graph.agent_count(), got: state.len() });
    }
    let mut next = state.0.clone();
    apply_edge(&mut next, graph, edge, influence)?;
    Ok(OpinionState(next))
}
