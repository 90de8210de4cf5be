use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::ops::Range;
use std::path::Path;

use otslab_core::analysis::{
    audit_bounds, c_block_growth, convergence, delta_bound_scan, execute, growth_failures, simulate_stream,
    AuditOptions, BoundCheck, RunTrace,
};
use otslab_core::fairness::{report, FairnessReport, FairnessTag, WordPrefix};
use otslab_core::graph::EdgeId;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Experiment;
use crate::error::CliError;
use crate::plot::{sample_indices, Panel, Series, MAX_POINTS};
use crate::presets::preset;
use crate::trace_csv::{read_actions, read_trace, write_trace};

/// Default cap on agent count for anything that enumerates simple paths.
pub const PATH_LIMIT: usize = 12;

/// Influence series are plotted for dynamic modes on graphs this small.
const MAX_INFLUENCE_SERIES: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub tag: FairnessTag,
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
    pub consensus: bool,
    pub first_below_tolerance: Option<usize>,
}

pub fn run(exp: &Experiment) -> Result<RunTrace, CliError> {
    let mut scheduler = exp.scheduler()?;
    Ok(execute(&exp.graph, &exp.initial, &exp.influence, &mut *scheduler, exp.config.steps)?)
}

pub fn summarize(trace: &RunTrace, tolerance: f64) -> RunSummary {
    let r = convergence(trace, tolerance);
    RunSummary {
        steps: trace.steps(),
        tag: trace.tag(),
        upper: r.upper,
        lower: r.lower,
        gap: r.gap,
        consensus: r.consensus,
        first_below_tolerance: r.first_below_tolerance,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    Ok(BufReader::new(File::open(path).map_err(|e| CliError::io(path, e))?))
}

/// Opinions of every agent, plus each edge's influence for dynamic modes.
pub fn plot(exp: &Experiment, trace: &RunTrace) -> Result<String, CliError> {
    let times = sample_indices(trace.steps() + 1, MAX_POINTS);
    let opinions = (0..trace.agents())
        .map(|k| Series {
            name: format!("B{}", k + 1),
            points: times.iter().map(|&t| (t as f64, trace.state(t)[k])).collect(),
        })
        .collect();
    let mut panels = vec![Panel { title: "opinions".into(), series: opinions }];
    if !exp.influence.is_static() && exp.graph.edge_count() <= MAX_INFLUENCE_SERIES {
        let series = exp
            .graph
            .edge_ids()
            .map(|e| {
                let points = times
                    .iter()
                    .map(|&t| Ok((t as f64, exp.influence.evaluate(&exp.graph, e, trace.state(t))?)))
                    .collect::<Result<Vec<_>, otslab_core::dynamics::DynamicsError>>()
                    .map_err(|err| CliError::Runtime(err.to_string()))?;
                Ok(Series { name: format!("I_{}", exp.graph.label(e)), points })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        panels.push(Panel { title: "influence".into(), series });
    }
    Ok(crate::plot::render(&panels))
}

pub fn simulate(exp: &Experiment, csv: Option<&Path>, svg: Option<&Path>) -> Result<RunSummary, CliError> {
    let trace = run(exp)?;
    if let Some(path) = csv {
        write_trace(create(path)?, &trace, &exp.graph)?;
    }
    if let Some(path) = svg {
        std::fs::write(path, plot(exp, &trace)?).map_err(|e| CliError::io(path, e))?;
    }
    Ok(summarize(&trace, exp.config.tolerance))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchRow {
    pub seed: u64,
    pub steps_run: usize,
    pub first_consensus: Option<usize>,
    pub upper: f64,
    pub lower: f64,
}

/// Independent runs, one per seed, without materializing traces.
pub fn batch(exp: &Experiment, seeds: Range<u64>) -> Result<Vec<BatchRow>, CliError> {
    seeds
        .into_par_iter()
        .map(|seed| {
            let mut scheduler = exp.scheduler_with_seed(seed)?;
            let s = simulate_stream(
                &exp.graph,
                &exp.initial,
                &exp.influence,
                &mut *scheduler,
                exp.config.steps,
                exp.config.tolerance,
                false,
            )?;
            Ok(BatchRow { seed, steps_run: s.steps_run, first_consensus: s.first_consensus, upper: s.upper, lower: s.lower })
        })
        .collect()
}

pub fn parse_seed_range(s: &str) -> Result<Range<u64>, CliError> {
    let bad = || CliError::Validation(format!("seed range {s:?} must look like a..b with a < b"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a >= b {
        return Err(bad());
    }
    Ok(a..b)
}

/// Multi-window parameters: `(m, k, G)`.
pub type WindowArgs = Option<(usize, usize, Option<usize>)>;

pub fn window_args(m: Option<usize>, k: Option<usize>, g: Option<usize>) -> Result<WindowArgs, CliError> {
    match (m, k, g) {
        (None, None, None) => Ok(None),
        (Some(m), Some(k), g) if m > 0 && k > 0 => Ok(Some((m, k, g))),
        _ => Err(CliError::Validation("-m and -k go together, are positive, and -G needs both".into())),
    }
}

pub fn fairness_of_run(exp: &Experiment, horizon: usize, windows: WindowArgs) -> Result<FairnessReport, CliError> {
    let mut scheduler = exp.scheduler()?;
    let trace = execute(&exp.graph, &exp.initial, &exp.influence, &mut *scheduler, horizon)?;
    let labels: Vec<String> = exp.graph.edges().iter().map(|e| e.label.clone()).collect();
    report(&trace.word(&exp.graph)?, &labels, windows, trace.tag()).map_err(CliError::validation)
}

/// Fairness of a recorded trace. With a config the alphabet is its edge set,
/// so edges that never occur are reported; otherwise it is the set of labels
/// that appear.
pub fn fairness_of_trace(path: &Path, exp: Option<&Experiment>, windows: WindowArgs) -> Result<FairnessReport, CliError> {
    let actions = read_actions(open(path)?)?;
    let labels: Vec<String> = match exp {
        Some(exp) => exp.graph.edges().iter().map(|e| e.label.clone()).collect(),
        None => actions.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect(),
    };
    let word = actions
        .iter()
        .map(|a| {
            labels
                .iter()
                .position(|l| l == a)
                .map(EdgeId)
                .ok_or_else(|| CliError::Validation(format!("trace action {a:?} is not an edge of the config")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let prefix = WordPrefix::new(word, labels.len().max(1)).map_err(CliError::validation)?;
    report(&prefix, &labels, windows, FairnessTag::Unknown).map_err(CliError::validation)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaSummary {
    pub beta: usize,
    pub sampled: usize,
    pub hits: usize,
    pub last_hit: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeesawSummary {
    pub blocks: usize,
    pub first_counts: Vec<usize>,
    /// Blocks in the first half whose upward-pull count no later block
    /// exceeds.
    pub growth_failures: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifySummary {
    pub steps: usize,
    pub influence_range: (f64, f64),
    pub influence_range_source: &'static str,
    pub checks: Vec<BoundCheck>,
    pub total_violations: usize,
    pub delta_scan: DeltaSummary,
    pub run: RunSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seesaw: Option<SeesawSummary>,
}

impl VerifySummary {
    pub fn violation_counts(&self) -> String {
        self.checks
            .iter()
            .filter(|c| c.violations > 0)
            .map(|c| format!("{}: {} of {}", c.name, c.violations, c.evaluated))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Influence range for the bounds: static weights, the scaled bounds, or
/// the range actually used by the run.
fn influence_range(exp: &Experiment, trace: &RunTrace) -> ((f64, f64), &'static str) {
    if let Some(r) = exp.influence.guaranteed_range(&exp.graph) {
        let source = if exp.influence.is_static() { "graph weights" } else { "scaled bounds" };
        return (r, source);
    }
    let used = trace.influences().iter().copied().filter(|w| w.is_finite());
    let (lo, hi) = used.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), w| (lo.min(w), hi.max(w)));
    if lo <= hi {
        ((lo, hi), "observed")
    } else {
        ((0.0, 1.0), "trivial")
    }
}

/// Full auditor battery on a fresh run, or on `trace` when given.
pub fn verify(exp: &Experiment, trace: Option<RunTrace>, path_limit: usize) -> Result<VerifySummary, CliError> {
    let n = exp.graph.agent_count();
    if n > path_limit {
        return Err(CliError::Validation(format!(
            "verify enumerates every simple path; {n} agents exceeds the limit of {path_limit}"
        )));
    }
    let trace = match trace {
        Some(t) => t,
        None => run(exp)?,
    };
    let (range, source) = influence_range(exp, &trace);
    let options = AuditOptions::default();
    let audit = audit_bounds(&trace, &exp.graph, range, &options);
    let beta = options.beta.unwrap_or(n.saturating_sub(1) * exp.graph.edge_count());
    let scan = delta_bound_scan(&trace, &exp.graph, beta, options.stride);
    let seesaw = if exp.config.scheduler.is_seesaw() {
        let counts = c_block_growth(&trace, &exp.graph)?;
        Some(SeesawSummary {
            blocks: counts.len(),
            first_counts: counts.iter().take(20).copied().collect(),
            growth_failures: growth_failures(&counts, counts.len() / 2, counts.len()),
        })
    } else {
        None
    };
    Ok(VerifySummary {
        steps: trace.steps(),
        influence_range: range,
        influence_range_source: source,
        total_violations: audit.total_violations(),
        checks: audit.checks,
        delta_scan: DeltaSummary {
            beta,
            sampled: scan.sampled.len(),
            hits: scan.hits.len(),
            last_hit: scan.last_hit(),
        },
        run: summarize(&trace, exp.config.tolerance),
        seesaw,
    })
}

pub fn verify_trace_file(exp: &Experiment, path: &Path, path_limit: usize) -> Result<VerifySummary, CliError> {
    let trace = read_trace(open(path)?, &exp.graph)?;
    verify(exp, Some(trace), path_limit)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reproduction {
    pub figure: &'static str,
    pub description: &'static str,
    pub config: String,
    pub trace: String,
    pub svg: String,
    pub run: RunSummary,
}

/// Writes `<id>.json` (the config), `<id>.csv` and `<id>.svg` into `outdir`.
pub fn reproduce(id: &str, outdir: &Path) -> Result<Reproduction, CliError> {
    let p = preset(id)?;
    std::fs::create_dir_all(outdir).map_err(|e| CliError::io(outdir, e))?;
    let cfg_path = outdir.join(format!("{}.json", p.id));
    let csv_path = outdir.join(format!("{}.csv", p.id));
    let svg_path = outdir.join(format!("{}.svg", p.id));
    let json = serde_json::to_string_pretty(&p.config).map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(&cfg_path, json + "\n").map_err(|e| CliError::io(&cfg_path, e))?;
    let exp = Experiment::new(p.config)?;
    let run = simulate(&exp, Some(&csv_path), Some(&svg_path))?;
    let show = |p: &Path| p.display().to_string();
    Ok(Reproduction {
        figure: p.id,
        description: p.description,
        config: show(&cfg_path),
        trace: show(&csv_path),
        svg: show(&svg_path),
        run,
    })
}
