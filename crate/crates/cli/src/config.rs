//! JSON experiment configuration. Unknown fields are rejected so typos fail
//! loudly instead of silently falling back to defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use otslab_core::dynamics::{InfluenceFunction, OpinionState};
use otslab_core::graph::{EdgeId, GraphBuilder, InfluenceGraph};
use otslab_core::words::{
    BlockedSeesaw, Extended, GrowingBlocks, Periodic, RandomWord, Scheduler, Seesaw, DEFAULT_GUARD,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SEED_ENV: &str = "OTSLAB_SEED";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub initial: Vec<f64>,
    #[serde(default)]
    pub influence: InfluenceSpec,
    pub scheduler: SchedulerSpec,
    pub steps: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Outputs::is_empty")]
    pub outputs: Outputs,
}

fn default_tolerance() -> f64 {
    1e-6
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
}

impl Outputs {
    fn is_empty(&self) -> bool {
        self.trace.is_none() && self.svg.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub agents: usize,
    pub edges: Vec<EdgeSpec>,
}

/// Agents are 1-based, as displayed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub from: usize,
    pub to: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub weight: f64,
}

impl GraphSpec {
    pub fn from_graph(graph: &InfluenceGraph) -> Self {
        let edges = graph
            .edge_ids()
            .map(|id| {
                let e = &graph.edges()[id.0];
                EdgeSpec {
                    from: e.from.display(),
                    to: e.to.display(),
                    label: Some(e.label.clone()),
                    weight: graph.weights()[id.0],
                }
            })
            .collect();
        Self { agents: graph.agent_count(), edges }
    }

    pub fn build(&self) -> Result<InfluenceGraph, CliError> {
        let builder = self.edges.iter().fold(GraphBuilder::new(self.agents), |b, e| match &e.label {
            Some(label) => b.edge(e.from, e.to, label, e.weight),
            None => b.unlabeled_edge(e.from, e.to, e.weight),
        });
        builder.build().map_err(CliError::validation)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum InfluenceSpec {
    // a struct variant, so that extra fields are rejected
    Static {},
    ConfirmationBias {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scaled: Option<ScaledRange>,
    },
    /// The two-agent divergent construction.
    Fig5a {
        #[serde(rename = "L")]
        lower: f64,
        #[serde(rename = "U")]
        upper: f64,
    },
    /// The three-agent divergent construction.
    Fig5b {
        #[serde(rename = "L")]
        lower: f64,
        #[serde(rename = "U")]
        upper: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaledRange {
    #[serde(rename = "IL")]
    pub lower: f64,
    #[serde(rename = "IU")]
    pub upper: f64,
}

impl Default for InfluenceSpec {
    fn default() -> Self {
        Self::Static {}
    }
}

impl InfluenceSpec {
    pub fn build(&self) -> Result<InfluenceFunction, CliError> {
        let bounds = |lower: f64, upper: f64| {
            if 0.0 < lower && lower < upper && upper < 1.0 {
                Ok(())
            } else {
                Err(CliError::Validation(format!("need 0 < L < U < 1, got L={lower}, U={upper}")))
            }
        };
        Ok(match *self {
            Self::Static {} => InfluenceFunction::Static,
            Self::ConfirmationBias { scaled: None } => InfluenceFunction::ConfirmationBias,
            Self::ConfirmationBias { scaled: Some(r) } => {
                InfluenceFunction::confirmation_bias_scaled(r.lower, r.upper).map_err(CliError::validation)?
            }
            Self::Fig5a { lower, upper } => {
                bounds(lower, upper)?;
                InfluenceFunction::DivergentPair { lower, upper }
            }
            Self::Fig5b { lower, upper } => {
                bounds(lower, upper)?;
                InfluenceFunction::DivergentLine { lower, upper }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchedulerSpec {
    /// `word` repeated forever.
    Periodic { word: Vec<String> },
    /// Independent draws; `probs` are relative weights, uniform when absent.
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probs: Option<BTreeMap<String, f64>>,
    },
    /// Three-agent seesaw `(a⁺ b c⁺ d)^ω`.
    Cons12 {
        #[serde(rename = "L")]
        lower: f64,
        #[serde(rename = "U")]
        upper: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        guard: Option<usize>,
    },
    /// Four-agent blocked seesaw.
    Cons23 {
        #[serde(rename = "L")]
        lower: f64,
        #[serde(rename = "U")]
        upper: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        guard: Option<usize>,
    },
    /// `prefix` followed by all edges in label order, repeated.
    Extend { prefix: Vec<String> },
    /// `x^n y z^n w` for `n = start, start+1, …`.
    Growing {
        letters: [String; 4],
        #[serde(default = "one")]
        start: usize,
    },
}

fn one() -> usize {
    1
}

fn labels_to_edges(graph: &InfluenceGraph, labels: &[String]) -> Result<Vec<EdgeId>, CliError> {
    labels.iter().map(|l| graph.edge_by_label(l).map_err(CliError::validation)).collect()
}

impl SchedulerSpec {
    pub fn is_seesaw(&self) -> bool {
        matches!(self, Self::Cons12 { .. })
    }

    pub fn build(&self, graph: &InfluenceGraph, seed: u64) -> Result<Box<dyn Scheduler>, CliError> {
        Ok(match self {
            Self::Periodic { word } => Box::new(Periodic::new(graph, labels_to_edges(graph, word)?).map_err(CliError::validation)?),
            Self::Random { probs: None, .. } => Box::new(RandomWord::uniform(graph, seed).map_err(CliError::validation)?),
            Self::Random { probs: Some(probs), .. } => {
                let weights = probs
                    .iter()
                    .map(|(label, &p)| Ok((graph.edge_by_label(label).map_err(CliError::validation)?, p)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                Box::new(RandomWord::new(graph, &weights, seed).map_err(CliError::validation)?)
            }
            Self::Cons12 { lower, upper, guard } => {
                Box::new(Seesaw::new(graph, *lower, *upper, guard.unwrap_or(DEFAULT_GUARD)).map_err(CliError::validation)?)
            }
            Self::Cons23 { lower, upper, guard } => {
                Box::new(BlockedSeesaw::new(graph, *lower, *upper, guard.unwrap_or(DEFAULT_GUARD)).map_err(CliError::validation)?)
            }
            Self::Extend { prefix } => Box::new(Extended::new(graph, labels_to_edges(graph, prefix)?).map_err(CliError::validation)?),
            Self::Growing { letters, start } => {
                let e = labels_to_edges(graph, letters)?;
                Box::new(GrowingBlocks::new(graph, [e[0], e[1], e[2], e[3]], *start).map_err(CliError::validation)?)
            }
        })
    }
}

/// A validated, ready-to-run configuration.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub graph: InfluenceGraph,
    pub initial: OpinionState,
    pub influence: InfluenceFunction,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self, CliError> {
        let graph = config.graph.build()?;
        if config.initial.len() != graph.agent_count() {
            return Err(CliError::Validation(format!(
                "initial state has {} values, graph has {} agents",
                config.initial.len(),
                graph.agent_count()
            )));
        }
        let initial = OpinionState::new(config.initial.clone()).map_err(CliError::validation)?;
        let influence = config.influence.build()?;
        if !(config.tolerance >= 0.0 && config.tolerance.is_finite()) {
            return Err(CliError::Validation(format!("tolerance {} must be finite and >= 0", config.tolerance)));
        }
        let experiment = Self { config, graph, initial, influence };
        // surface bad labels and scheduler parameters before anything runs
        experiment.scheduler()?;
        Ok(experiment)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::new(read_config(path)?)
    }

    /// `OTSLAB_SEED`, else the scheduler's own seed, else the config seed,
    /// else 0.
    pub fn seed(&self) -> Result<u64, CliError> {
        if let Ok(raw) = std::env::var(SEED_ENV) {
            return raw
                .trim()
                .parse()
                .map_err(|_| CliError::Validation(format!("{SEED_ENV}={raw:?} is not an unsigned integer")));
        }
        let own = match &self.config.scheduler {
            SchedulerSpec::Random { seed, .. } => *seed,
            _ => None,
        };
        Ok(own.or(self.config.seed).unwrap_or(0))
    }

    pub fn scheduler(&self) -> Result<Box<dyn Scheduler>, CliError> {
        self.scheduler_with_seed(self.seed()?)
    }

    pub fn scheduler_with_seed(&self, seed: u64) -> Result<Box<dyn Scheduler>, CliError> {
        self.config.scheduler.build(&self.graph, seed)
    }
}

pub fn read_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}
