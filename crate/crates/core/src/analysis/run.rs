use serde::Serialize;

use crate::dynamics::{apply_edge, max_of, min_of, InfluenceFunction, OpinionState};
use crate::fairness::{FairnessTag, WordPrefix};
use crate::graph::{EdgeId, InfluenceGraph};
use crate::words::Scheduler;

use super::AnalysisError;

/// A materialized run prefix: `steps + 1` states, the actions between them and
/// the influence each action used.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    agents: usize,
    states: Vec<f64>,
    actions: Vec<EdgeId>,
    influences: Vec<f64>,
    max: Vec<f64>,
    min: Vec<f64>,
    tag: FairnessTag,
}

impl RunTrace {
    /// Assemble a trace without checking the dynamics; `audit_bounds` reports
    /// anything inconsistent.
    pub fn from_parts(
        agents: usize,
        states: Vec<Vec<f64>>,
        actions: Vec<EdgeId>,
        influences: Vec<f64>,
    ) -> Result<Self, AnalysisError> {
        if states.is_empty() || agents == 0 {
            return Err(AnalysisError::EmptyTrace);
        }
        if states.len() != actions.len() + 1 || influences.len() != actions.len() {
            return Err(AnalysisError::Shape(format!(
                "{} states, {} actions, {} influences",
                states.len(),
                actions.len(),
                influences.len()
            )));
        }
        if let Some(row) = states.iter().position(|s| s.len() != agents) {
            return Err(AnalysisError::Shape(format!("state {row} does not have {agents} values")));
        }
        let max = states.iter().map(|s| max_of(s)).collect();
        let min = states.iter().map(|s| min_of(s)).collect();
        Ok(Self {
            agents,
            states: states.concat(),
            actions,
            influences,
            max,
            min,
            tag: FairnessTag::Unknown,
        })
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    /// Number of executed actions.
    pub fn steps(&self) -> usize {
        self.actions.len()
    }

    pub fn state(&self, t: usize) -> &[f64] {
        &self.states[t * self.agents..(t + 1) * self.agents]
    }

    pub fn initial(&self) -> &[f64] {
        self.state(0)
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.steps())
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.states.chunks(self.agents)
    }

    pub fn actions(&self) -> &[EdgeId] {
        &self.actions
    }

    pub fn influences(&self) -> &[f64] {
        &self.influences
    }

    pub fn max_series(&self) -> &[f64] {
        &self.max
    }

    pub fn min_series(&self) -> &[f64] {
        &self.min
    }

    pub fn gap_at(&self, t: usize) -> f64 {
        self.max[t] - self.min[t]
    }

    pub fn tag(&self) -> FairnessTag {
        self.tag
    }

    pub fn word(&self, graph: &InfluenceGraph) -> Result<WordPrefix, AnalysisError> {
        Ok(WordPrefix::for_graph(self.actions.clone(), graph)?)
    }
}

fn check_transition(
    step: usize,
    before: &[f64],
    after: &[f64],
    target: usize,
) -> Result<(), AnalysisError> {
    let (lo, hi) = (min_of(before), max_of(before));
    for (k, (&b, &a)) in before.iter().zip(after).enumerate() {
        if k != target && a.to_bits() != b.to_bits() {
            return Err(AnalysisError::Invariant {
                step,
                message: format!("agent {} changed but the action targets agent {}", k + 1, target + 1),
            });
        }
        if !(lo <= a && a <= hi) {
            return Err(AnalysisError::Invariant {
                step,
                message: format!("agent {} left [{lo}, {hi}] with {a}", k + 1),
            });
        }
    }
    if max_of(after) > hi || min_of(after) < lo {
        return Err(AnalysisError::Invariant { step, message: "extremes not monotone".into() });
    }
    Ok(())
}

/// Run `steps` actions, checking at every transition that only the target
/// moves, that it stays within the previous extremes, and that the extremes
/// are monotone.
pub fn execute<S: Scheduler + ?Sized>(
    graph: &InfluenceGraph,
    initial: &OpinionState,
    influence: &InfluenceFunction,
    scheduler: &mut S,
    steps: usize,
) -> Result<RunTrace, AnalysisError> {
    let n = graph.agent_count();
    if initial.len() != n {
        return Err(AnalysisError::Shape(format!("initial state has {} values for {n} agents", initial.len())));
    }
    let mut states = Vec::with_capacity((steps + 1) * n);
    states.extend_from_slice(initial.values());
    let mut actions = Vec::with_capacity(steps);
    let mut influences = Vec::with_capacity(steps);
    let mut max = vec![initial.max()];
    let mut min = vec![initial.min()];
    let mut current = initial.values().to_vec();
    for t in 0..steps {
        let edge = scheduler.next(&current)?;
        let before = current.clone();
        let w = apply_edge(&mut current, graph, edge, influence)?;
        check_transition(t, &before, &current, graph.edges()[edge.0].to.0)?;
        states.extend_from_slice(&current);
        actions.push(edge);
        influences.push(w);
        max.push(max_of(&current));
        min.push(min_of(&current));
    }
    Ok(RunTrace { agents: n, states, actions, influences, max, min, tag: scheduler.tag() })
}

/// Outcome of a run that is not materialized.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StreamSummary {
    pub steps_run: usize,
    pub first_consensus: Option<usize>,
    pub final_state: Vec<f64>,
    pub upper: f64,
    pub lower: f64,
}

/// Like `execute` but keeps only the current state; with `stop_at_consensus`
/// it returns as soon as the gap drops below `tolerance`.
pub fn simulate_stream<S: Scheduler + ?Sized>(
    graph: &InfluenceGraph,
    initial: &OpinionState,
    influence: &InfluenceFunction,
    scheduler: &mut S,
    steps: usize,
    tolerance: f64,
    stop_at_consensus: bool,
) -> Result<StreamSummary, AnalysisError> {
    let mut current = initial.values().to_vec();
    let (mut hi, mut lo) = (max_of(&current), min_of(&current));
    let mut first_consensus = (hi - lo < tolerance).then_some(0);
    let mut steps_run = 0;
    while steps_run < steps && !(stop_at_consensus && first_consensus.is_some()) {
        let edge = scheduler.next(&current)?;
        let target = graph.edges()[edge.0].to.0;
        let old = current[target];
        apply_edge(&mut current, graph, edge, influence)?;
        steps_run += 1;
        if !(lo <= current[target] && current[target] <= hi) {
            return Err(AnalysisError::Invariant {
                step: steps_run - 1,
                message: format!("agent {} moved from {old} outside [{lo}, {hi}]", target + 1),
            });
        }
        if old == hi || old == lo {
            hi = max_of(&current);
            lo = min_of(&current);
        }
        if first_consensus.is_none() && hi - lo < tolerance {
            first_consensus = Some(steps_run);
        }
    }
    Ok(StreamSummary { steps_run, first_consensus, final_state: current, upper: hi, lower: lo })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
    pub consensus: bool,
    /// `(t, gap)` at up to about 200 evenly spaced times, always including the last.
    pub gap_series: Vec<(usize, f64)>,
    pub first_below_tolerance: Option<usize>,
    pub gap_non_increasing: bool,
}

/// Final extremes as limit estimates; valid because they are monotone.
pub fn convergence(trace: &RunTrace, tolerance: f64) -> ConvergenceReport {
    let t_end = trace.steps();
    let gap = trace.gap_at(t_end);
    let stride = (t_end / 200).max(1);
    let mut gap_series: Vec<(usize, f64)> =
        (0..=t_end).step_by(stride).map(|t| (t, trace.gap_at(t))).collect();
    if gap_series.last().map(|g| g.0) != Some(t_end) {
        gap_series.push((t_end, gap));
    }
    let gaps: Vec<f64> = (0..=t_end).map(|t| trace.gap_at(t)).collect();
    ConvergenceReport {
        upper: trace.max_series()[t_end],
        lower: trace.min_series()[t_end],
        gap,
        consensus: gap < tolerance,
        gap_series,
        first_below_tolerance: gaps.iter().position(|&g| g < tolerance),
        gap_non_increasing: gaps.windows(2).all(|w| w[1] <= w[0]),
    }
}
