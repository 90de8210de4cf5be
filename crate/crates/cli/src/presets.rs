//! Canned experiments reproducible with one command. Each preset picks a run
//! length long enough for the qualitative shape to show.

use otslab_core::graph::{bidirectional_line, random_graph, two_sources_graph, InfluenceGraph};

use crate::config::{ExperimentConfig, GraphSpec, InfluenceSpec, Outputs, SchedulerSpec};
use crate::error::CliError;

pub const FIGURES: [&str; 10] =
    ["fig1b", "fig1c", "fig2b", "fig2c", "fig3a", "fig3b", "fig4b", "fig4c", "fig5c", "fig5d"];

/// Seed of the eleven-agent random graph and of its uniform word.
pub const RANDOM_GRAPH_SEED: u64 = 2;

pub struct Preset {
    pub id: &'static str,
    pub description: &'static str,
    pub config: ExperimentConfig,
}

fn words(s: &str) -> Vec<String> {
    s.chars().map(String::from).collect()
}

fn config(
    graph: Result<InfluenceGraph, otslab_core::graph::GraphError>,
    initial: &[f64],
    influence: InfluenceSpec,
    scheduler: SchedulerSpec,
    steps: usize,
) -> Result<ExperimentConfig, CliError> {
    let graph = graph.map_err(CliError::validation)?;
    Ok(ExperimentConfig {
        graph: GraphSpec::from_graph(&graph),
        initial: initial.to_vec(),
        influence,
        scheduler,
        steps,
        tolerance: 1e-6,
        seed: None,
        outputs: Outputs::default(),
    })
}

pub fn preset(id: &str) -> Result<Preset, CliError> {
    let line = [0.0, 0.5, 1.0];
    let four = [0.0, 0.2, 0.8, 1.0];
    let abcd = || SchedulerSpec::Periodic { word: words("abcd") };
    let (id, description, cfg) = match id {
        "fig1b" => (
            "fig1b",
            "three agents on a line, influence 1/2, word (abcd)^ω",
            config(bidirectional_line(3, 0.5), &line, InfluenceSpec::Static {}, abcd(), 2000)?,
        ),
        "fig1c" => {
            let initial: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
            let mut c = config(
                random_graph(11, 0.3, 0.5, RANDOM_GRAPH_SEED),
                &initial,
                InfluenceSpec::Static {},
                SchedulerSpec::Random { seed: None, probs: None },
                3000,
            )?;
            c.seed = Some(RANDOM_GRAPH_SEED);
            ("fig1c", "eleven agents, random graph (p = 0.3), influence 1/2, uniformly random edges", c)
        }
        "fig2b" => {
            let mut word = Vec::new();
            for (pair, reps) in [(["a2", "a3"], 5), (["a4", "a5"], 5), (["a0", "a1"], 5)] {
                for _ in 0..reps {
                    word.extend(pair.iter().map(|s| s.to_string()));
                }
            }
            word.extend(["a6", "a7", "a8", "a9"].map(String::from));
            (
                "fig2b",
                "two isolated source pairs feeding a third pair; the sources never agree",
                config(
                    two_sources_graph(0.5),
                    &[0.4, 0.5, 0.45, 0.55, 0.5, 0.6],
                    InfluenceSpec::Static {},
                    SchedulerSpec::Periodic { word },
                    2000,
                )?,
            )
        }
        "fig2c" => (
            "fig2c",
            "three agents on a line, every influence 1 (puppets), word (abcd)^ω",
            config(bidirectional_line(3, 1.0), &line, InfluenceSpec::Static {}, abcd(), 100)?,
        ),
        "fig3a" => (
            "fig3a",
            "three agents on a line, word (a^n b c^n d) for n = 1, 2, …",
            config(
                bidirectional_line(3, 0.5),
                &line,
                InfluenceSpec::Static {},
                SchedulerSpec::Growing { letters: ["a", "b", "c", "d"].map(String::from), start: 1 },
                5000,
            )?,
        ),
        "fig3b" => (
            "fig3b",
            "three agents on a line, seesaw word with L = 0.25, U = 0.75",
            config(
                bidirectional_line(3, 0.5),
                &line,
                InfluenceSpec::Static {},
                SchedulerSpec::Cons12 { lower: 0.25, upper: 0.75, guard: None },
                10_000,
            )?,
        ),
        "fig4b" => (
            "fig4b",
            "four agents on a line, 1-bounded fair blocked seesaw with L = 0.2, U = 0.8",
            config(
                bidirectional_line(4, 0.5),
                &four,
                InfluenceSpec::Static {},
                SchedulerSpec::Cons23 { lower: 0.2, upper: 0.8, guard: None },
                10_000,
            )?,
        ),
        "fig4c" => {
            let mut word = words(&"bfdace".repeat(3));
            word.extend(words(&"a".repeat(10)));
            word.extend(words(&"e".repeat(10)));
            (
                "fig4c",
                "four agents on a line, 3-bounded fair word ((bfdace)^3 a^10 e^10)^ω",
                config(bidirectional_line(4, 0.5), &four, InfluenceSpec::Static {}, SchedulerSpec::Periodic { word }, 2000)?,
            )
        }
        "fig5c" => (
            "fig5c",
            "two agents, state-dependent influence pushing them to L = 0.2 and U = 0.8, word (ab)^ω",
            config(
                bidirectional_line(2, 0.5),
                &[0.0, 1.0],
                InfluenceSpec::Fig5a { lower: 0.2, upper: 0.8 },
                SchedulerSpec::Periodic { word: words("ab") },
                1000,
            )?,
        ),
        "fig5d" => (
            "fig5d",
            "three agents on a line, state-dependent influence on a and c, word (abcd)^ω",
            config(
                bidirectional_line(3, 0.5),
                &line,
                InfluenceSpec::Fig5b { lower: 0.2, upper: 0.8 },
                abcd(),
                1000,
            )?,
        ),
        other => {
            return Err(CliError::Validation(format!(
                "unknown figure {other:?}; valid ids: {}",
                FIGURES.join(", ")
            )))
        }
    };
    Ok(Preset { id, description, config: cfg })
}
