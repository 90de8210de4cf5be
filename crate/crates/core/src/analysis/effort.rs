use serde::Serialize;

use crate::graph::InfluenceGraph;

use super::{AnalysisError, RunTrace};

/// Consecutive half-weight pulls from `b_j` needed to lift `b_i` to at least
/// `u`: `⌈log₂((b_j − b_i)/(b_j − u))⌉`. The logarithm is snapped to the
/// nearest integer when within 1e-9 so exact powers of two are not pushed up
/// by rounding.
pub fn min_effort(b_i: f64, b_j: f64, u: f64) -> Result<u32, AnalysisError> {
    if !(b_i < u && u < b_j) {
        return Err(AnalysisError::Parameter(format!(
            "need B_i < U < B_j, got B_i={b_i}, U={u}, B_j={b_j}"
        )));
    }
    let t = ((b_j - b_i) / (b_j - u)).log2();
    let snapped = if (t - t.round()).abs() < 1e-9 { t.round() } else { t.ceil() };
    Ok(snapped as u32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SeesawBlock {
    pub start: usize,
    pub pulls_down: usize,
    pub pulls_up: usize,
}

/// Split a trace of the three-agent seesaw into its `a⁺ b c⁺ d` blocks. A
/// trailing incomplete block is dropped; any other shape is rejected.
pub fn seesaw_blocks(trace: &RunTrace, graph: &InfluenceGraph) -> Result<Vec<SeesawBlock>, AnalysisError> {
    let labels: Vec<&str> = trace.actions().iter().map(|&e| graph.label(e)).collect();
    for (label, from, to) in [("a", 1, 2), ("b", 2, 1), ("c", 3, 2), ("d", 2, 3)] {
        let ok = graph
            .edge_by_label(label)
            .ok()
            .map(|id| &graph.edges()[id.0])
            .is_some_and(|e| (e.from.display(), e.to.display()) == (from, to));
        if !ok || graph.edge_count() != 4 {
            return Err(AnalysisError::NotSeesaw(format!("graph lacks edge {label}=({from},{to})")));
        }
    }
    let mut blocks = Vec::new();
    let mut t = 0;
    let n = labels.len();
    let run = |t: usize, letter: &str| labels[t..].iter().take_while(|&&l| l == letter).count();
    while t < n {
        let start = t;
        let a = run(t, "a");
        t += a;
        if t == n {
            break;
        }
        if a == 0 || labels[t] != "b" {
            return Err(AnalysisError::NotSeesaw(format!("unexpected {:?} at step {t}", labels[t])));
        }
        t += 1;
        let c = run(t, "c");
        t += c;
        if t == n {
            break;
        }
        if c == 0 || labels[t] != "d" {
            return Err(AnalysisError::NotSeesaw(format!("unexpected {:?} at step {t}", labels[t])));
        }
        t += 1;
        blocks.push(SeesawBlock { start, pulls_down: a, pulls_up: c });
    }
    Ok(blocks)
}

/// Per-block counts of the upward pulls.
pub fn c_block_growth(trace: &RunTrace, graph: &InfluenceGraph) -> Result<Vec<usize>, AnalysisError> {
    Ok(seesaw_blocks(trace, graph)?.iter().map(|b| b.pulls_up).collect())
}

/// Block indices `m < up_to` with no `t ∈ 1..=within` such that
/// `counts[m + t] > counts[m]`.
pub fn growth_failures(counts: &[usize], up_to: usize, within: usize) -> Vec<usize> {
    (0..up_to.min(counts.len()))
        .filter(|&m| !(1..=within).any(|t| counts.get(m + t).is_some_and(|&c| c > counts[m])))
        .collect()
}
