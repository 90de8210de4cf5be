//! One check per acceptance criterion, each printing a PASS/FAIL line.
//! Run with `cargo test -p otslab-core --test acceptance -- --nocapture`.

mod common;

use std::time::{Duration, Instant};

use otslab_core::analysis::{
    audit_bounds, c_block_growth, convergence, delta_of_agent, delta_of_path, execute,
    growth_failures, min_effort, simulate_stream, AuditOptions,
};
use otslab_core::dynamics::{InfluenceFunction, OpinionState};
use otslab_core::fairness::{hierarchy_witnesses, power_of_two_word, FairnessTag, WordPrefix};
use otslab_core::graph::{bidirectional_line, AgentId, EdgeId, InfluenceGraph};
use otslab_core::words::{
    take_word, BlockedSeesaw, GrowingBlocks, Periodic, RandomWord, Scheduler, Seesaw,
    DEFAULT_GUARD,
};

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn run(id: u32, title: &'static str, budget: Option<Duration>, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (ok, mut detail) = f();
    let elapsed = start.elapsed();
    let in_time = budget.is_none_or(|b| elapsed < b);
    if let Some(b) = budget {
        detail.push_str(&format!("; {elapsed:.2?} of {b:?} budget"));
    }
    Outcome { id, title, pass: ok && in_time, detail, elapsed }
}

fn state(v: &[f64]) -> OpinionState {
    OpinionState::new(v.to_vec()).unwrap()
}

fn abcd(g: &InfluenceGraph) -> Periodic {
    Periodic::from_labels(g, &["a", "b", "c", "d"]).unwrap()
}

fn worked_example() -> (bool, String) {
    let g = bidirectional_line(3, 0.5).unwrap();
    let t = execute(&g, &state(&[0.0, 0.5, 1.0]), &InfluenceFunction::Static, &mut abcd(&g), 4).unwrap();
    let want: [[f64; 3]; 4] =
        [[0.0, 0.25, 1.0], [0.125, 0.25, 1.0], [0.125, 0.625, 1.0], [0.125, 0.625, 0.8125]];
    let ok = (1..=4).all(|k| {
        t.state(k).iter().zip(&want[k - 1]).all(|(a, b)| a.to_bits() == b.to_bits())
    });
    (ok, format!("final state {:?}", t.last()))
}

fn consensus_under_abcd() -> (bool, String) {
    let g = bidirectional_line(3, 0.5).unwrap();
    let t = execute(&g, &state(&[0.0, 0.5, 1.0]), &InfluenceFunction::Static, &mut abcd(&g), 5000).unwrap();
    let r = convergence(&t, 1e-6);
    let ok = r.consensus && (r.upper - 0.5).abs() < 1e-3 && (r.lower - 0.5).abs() < 1e-3;
    (ok, format!("gap {:.3e} after {:?} steps, limit {:.6}", r.gap, r.first_below_tolerance, r.upper))
}

fn seesaw_trace(steps: usize) -> (InfluenceGraph, otslab_core::analysis::RunTrace) {
    let g = bidirectional_line(3, 0.5).unwrap();
    let mut s = Seesaw::new(&g, 0.25, 0.75, DEFAULT_GUARD).unwrap();
    let t = execute(&g, &state(&[0.0, 0.5, 1.0]), &InfluenceFunction::Static, &mut s, steps).unwrap();
    (g, t)
}

fn seesaw_non_consensus() -> (bool, String) {
    let (_, t) = seesaw_trace(100_000);
    let b1 = t.states().map(|s| s[0]).fold(f64::NEG_INFINITY, f64::max);
    let b3 = t.states().map(|s| s[2]).fold(f64::INFINITY, f64::min);
    let gap = convergence(&t, 1e-6).gap;
    (b1 < 0.25 && b3 > 0.75 && gap >= 0.5, format!("max B1 = {b1}, min B3 = {b3}, final gap {gap}"))
}

fn seesaw_growth() -> (bool, String) {
    let (g, t) = seesaw_trace(20_000);
    let counts = c_block_growth(&t, &g).unwrap();
    if counts.len() < 50 {
        return (false, format!("only {} blocks", counts.len()));
    }
    let fails = growth_failures(&counts[..50], 40, 10);
    (fails.is_empty(), format!("c-counts of first 12 blocks {:?}; failing m: {fails:?}", &counts[..12]))
}

fn blocked_seesaw() -> (bool, String) {
    let g = bidirectional_line(4, 0.5).unwrap();
    let mut s = BlockedSeesaw::new(&g, 0.2, 0.8, DEFAULT_GUARD).unwrap();
    let t = execute(&g, &state(&[0.0, 0.2, 0.8, 1.0]), &InfluenceFunction::Static, &mut s, 100_000).unwrap();
    let b1 = t.states().map(|s| s[0]).fold(f64::NEG_INFINITY, f64::max);
    let b4 = t.states().map(|s| s[3]).fold(f64::INFINITY, f64::min);
    let block = g.word(&["b", "f", "d", "a", "c", "e"]).unwrap();
    let w = t.actions();
    let starts: Vec<usize> = (0..=w.len() - 6).filter(|&i| w[i..i + 6] == block[..]).collect();
    let hits = t.word(&g).unwrap().find_multiwindows(1, 6).unwrap();
    let every_block = starts.iter().all(|s| hits.binary_search(s).is_ok());
    let ok = b1 < 0.2 && b4 > 0.8 && every_block && !starts.is_empty() && s.tag() == FairnessTag::MBoundedFair(1);
    (ok, format!("max B1 = {b1}, min B4 = {b4}, {} blocks, all hit: {every_block}", starts.len()))
}

/// Smallest prefix length containing `path` as a subsequence, by trying each length.
fn oracle_delta(word: &[EdgeId], path: &[EdgeId]) -> Option<usize> {
    let contains = |len: usize| {
        let mut it = word[..len].iter();
        path.iter().all(|p| it.any(|e| e == p))
    };
    (1..=word.len()).find(|&len| contains(len))
}

fn oracle_agent_delta(word: &[EdgeId], g: &InfluenceGraph, agent: AgentId) -> Option<usize> {
    g.simple_paths_from(agent)
        .iter()
        .map(|p| oracle_delta(word, &p.edges))
        .try_fold(0, |acc, d| d.map(|d| acc.max(d)))
}

fn example_deltas() -> (bool, String) {
    let g = bidirectional_line(3, 0.5).unwrap();
    let w = take_word(&mut abcd(&g), &[], 40).unwrap();
    let p = |s: &[&str]| g.word(s).unwrap();
    let mut checks = Vec::new();
    for (path, want) in [(p(&["a"]), 1), (p(&["a", "d"]), 4), (p(&["c"]), 3), (p(&["c", "b"]), 6)] {
        checks.push(delta_of_path(&w, &path) == Some(want) && oracle_delta(&w, &path) == Some(want));
    }
    let letters = [EdgeId(0), EdgeId(1), EdgeId(2), EdgeId(3)];
    let suffix = GrowingBlocks::prefix(letters, 10, 500);
    for (word, agent, want) in [(&w, 0, 4), (&w, 2, 6), (&suffix, 0, 22), (&suffix, 2, 34)] {
        let a = AgentId(agent);
        checks.push(delta_of_agent(word, &g, a) == Some(want) && oracle_agent_delta(word, &g, a) == Some(want));
    }
    let ok = checks.iter().all(|c| *c);
    (ok, format!("{} of {} values match implementation and oracle", checks.iter().filter(|c| **c).count(), checks.len()))
}

fn audit_battery() -> (bool, String) {
    let mut violations = 0;
    let mut evaluated = 0;
    let mut first = None;
    for seed in 0..100u64 {
        let g = common::random_connected_graph(seed, 8);
        assert!(g.is_puppet_free());
        let init = state(&common::random_state(seed, g.agent_count()));
        let mut s = RandomWord::uniform(&g, seed).unwrap();
        let t = execute(&g, &init, &InfluenceFunction::Static, &mut s, 10_000).unwrap();
        let report = audit_bounds(&t, &g, g.influence_extrema().unwrap(), &AuditOptions::default());
        violations += report.total_violations();
        evaluated += report.checks.iter().map(|c| c.evaluated).sum::<usize>();
        if first.is_none() {
            first = report.checks.iter().find_map(|c| c.first_violation.clone());
        }
    }
    (violations == 0, format!("{evaluated} inequalities evaluated, {violations} violations {first:?}"))
}

/// Exact count of half-weight pulls from `j/19` lifting `i/19` to `u/19`:
/// the opinion after `t` pulls is `X / (19·2^t)`.
fn oracle_effort(i: u64, j: u64, u: u64) -> u32 {
    let (mut x, mut den, mut t) = (i as u128, 1u128, 0);
    while x < u as u128 * den {
        x += j as u128 * den;
        den *= 2;
        t += 1;
    }
    t
}

fn min_effort_grid() -> (bool, String) {
    let mut cases = 0;
    let mut mismatches = Vec::new();
    for i in 0..20u64 {
        for u in 0..20u64 {
            for j in 0..20u64 {
                if !(i < u && u < j) {
                    continue;
                }
                cases += 1;
                let f = |k: u64| k as f64 / 19.0;
                let got = min_effort(f(i), f(j), f(u)).unwrap();
                if got != oracle_effort(i, j, u) {
                    mismatches.push((i, u, j));
                }
            }
        }
    }
    (mismatches.is_empty(), format!("{cases} grid cases, mismatches {mismatches:?}"))
}

fn witnesses() -> (bool, String) {
    let mut failed = Vec::new();
    let mut total = 0;
    for w in hierarchy_witnesses() {
        for o in w.verify() {
            total += 1;
            if !o.holds {
                failed.push(o.claim);
            }
        }
    }
    let p = power_of_two_word(1 << 16);
    let literal: Vec<Option<usize>> = [10, 12, 14, 16].iter().map(|&j| p.truncated(1 << j).minimal_uniform_k()).collect();
    (
        failed.is_empty(),
        format!("{total} claims, failed {failed:?}; power-of-two uniform k at 2^10..2^16 (step 2^2): {literal:?}"),
    )
}

fn random_inclusion() -> (bool, String) {
    let g = bidirectional_line(3, 0.5).unwrap();
    let passes = (0..100u64)
        .filter(|&seed| {
            let w = take_word(&mut RandomWord::uniform(&g, seed).unwrap(), &[], 100_000).unwrap();
            WordPrefix::for_graph(w, &g).unwrap().density_check(2, 4, 4000).unwrap()
        })
        .count();
    let mut slowest = 0;
    let mut stuck = Vec::new();
    for seed in 0..50u64 {
        let g = common::random_connected_graph(1000 + seed, 8);
        let init = state(&common::random_state(1000 + seed, g.agent_count()));
        let mut s = RandomWord::uniform(&g, seed).unwrap();
        let r = simulate_stream(&g, &init, &InfluenceFunction::Static, &mut s, 1_000_000, 1e-6, true).unwrap();
        match r.first_consensus {
            Some(t) => slowest = slowest.max(t),
            None => stuck.push(seed),
        }
    }
    (
        passes >= 99 && stuck.is_empty(),
        format!("density passes {passes}/100; 50 random graphs, slowest consensus at t={slowest}, stuck {stuck:?}"),
    )
}

fn dynamic_influence() -> (bool, String) {
    let g3 = bidirectional_line(3, 0.5).unwrap();
    let bias = InfluenceFunction::confirmation_bias_scaled(0.1, 0.9).unwrap();
    let t = execute(&g3, &state(&[0.0, 0.5, 1.0]), &bias, &mut abcd(&g3), 10_000).unwrap();
    let bias_gap = convergence(&t, 1e-6);

    let (lower, upper) = (0.2, 0.8);
    let floor = 0.6 * (upper - lower);
    let g2 = bidirectional_line(2, 0.5).unwrap();
    let pair = InfluenceFunction::DivergentPair { lower, upper };
    let mut ab = Periodic::from_labels(&g2, &["a", "b"]).unwrap();
    let t2 = execute(&g2, &state(&[0.0, 1.0]), &pair, &mut ab, 100_000).unwrap();
    let pair_min = (0..=t2.steps()).map(|k| t2.gap_at(k)).fold(f64::INFINITY, f64::min);

    let line = InfluenceFunction::DivergentLine { lower, upper };
    let t3 = execute(&g3, &state(&[0.0, 0.5, 1.0]), &line, &mut abcd(&g3), 100_000).unwrap();
    let line_min = (0..=t3.steps()).map(|k| t3.gap_at(k)).fold(f64::INFINITY, f64::min);

    let ok = bias_gap.consensus && pair_min >= floor && line_min >= floor;
    (
        ok,
        format!(
            "bounded bias gap {:.2e} (first below 1e-6 at {:?}); divergent pair min gap {pair_min:.4}, line min gap {line_min:.4}, floor {floor:.2}",
            bias_gap.gap, bias_gap.first_below_tolerance
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let ms = Duration::from_millis;
    let outcomes = vec![
        run(1, "worked example is bit-exact", Some(ms(1)), worked_example),
        run(2, "consensus under (abcd)^ω", Some(ms(10)), consensus_under_abcd),
        run(3, "three-agent seesaw never reaches consensus", Some(ms(1000)), seesaw_non_consensus),
        run(4, "seesaw c-blocks keep growing", Some(ms(1000)), seesaw_growth),
        run(5, "four-agent blocked seesaw: 1-bounded fair, no consensus", None, blocked_seesaw),
        run(6, "δ/Δ values match and agree with the oracle", None, example_deltas),
        run(7, "bound audit battery on 100 random graphs", Some(ms(60_000)), audit_battery),
        run(8, "minimum effort formula equals exact simulation", Some(ms(1000)), min_effort_grid),
        run(9, "fairness hierarchy witnesses", None, witnesses),
        run(10, "random inclusion and random-run consensus", None, random_inclusion),
        run(11, "bounded dynamic influence converges, divergent presets do not", None, dynamic_influence),
    ];
    for o in &outcomes {
        println!(
            "criterion {:>2} {} — {} [{:.2?}]: {}",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.title,
            o.elapsed,
            o.detail
        );
    }
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
