use std::path::{Path, PathBuf};
use std::process::Command;

use otslab::commands::{run, simulate};
use otslab::config::{Experiment, ExperimentConfig};
use otslab::trace_csv::{read_trace, write_trace};
use serde_json::{json, Value};
use tempfile::TempDir;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Output {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn otslab(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_otslab"));
    cmd.args(args).env_remove("OTSLAB_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    Output {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn line_graph() -> Value {
    json!({"agents": 3, "edges": [
        {"from": 1, "to": 2, "label": "a", "weight": 0.5},
        {"from": 2, "to": 1, "label": "b", "weight": 0.5},
        {"from": 3, "to": 2, "label": "c", "weight": 0.5},
        {"from": 2, "to": 3, "label": "d", "weight": 0.5}]})
}

fn config(scheduler: Value, initial: &[f64], steps: usize) -> Value {
    json!({
        "graph": line_graph(),
        "initial": initial,
        "influence": {"mode": "static"},
        "scheduler": scheduler,
        "steps": steps
    })
}

fn abcd() -> Value {
    json!({"type": "periodic", "word": ["a", "b", "c", "d"]})
}

fn write(dir: &TempDir, name: &str, value: &Value) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Rows of a trace CSV as (action, opinions).
fn rows(path: &Path) -> Vec<(String, Vec<f64>)> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (cols[1].to_string(), cols[2..].iter().map(|v| v.parse().unwrap()).collect())
        })
        .collect()
}

#[test]
fn worked_example_trace() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &config(abcd(), &[0.0, 0.5, 1.0], 4));
    let csv = dir.path().join("t.csv");
    let out = otslab(&["simulate", "-c", s(&cfg), "-o", s(&csv)], &[]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let header = std::fs::read_to_string(&csv).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "t,action,B1,B2,B3");
    let want = [
        ("", [0.0, 0.5, 1.0]),
        ("a", [0.0, 0.25, 1.0]),
        ("b", [0.125, 0.25, 1.0]),
        ("c", [0.125, 0.625, 1.0]),
        ("d", [0.125, 0.625, 0.8125]),
    ];
    let got = rows(&csv);
    assert_eq!(got.len(), want.len());
    for ((action, values), (wa, wv)) in got.iter().zip(want) {
        assert_eq!(action, wa);
        assert_eq!(values.as_slice(), wv.as_slice());
    }
}

#[test]
fn consensual_state_gives_constant_columns() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &config(abcd(), &[0.3, 0.3, 0.3], 200));
    let csv = dir.path().join("t.csv");
    assert_eq!(otslab(&["simulate", "-c", s(&cfg), "-o", s(&csv)], &[]).code, 0);
    assert!(rows(&csv).iter().all(|(_, v)| v == &[0.3, 0.3, 0.3]));
}

#[test]
fn seesaw_keeps_ends_apart() {
    let dir = TempDir::new().unwrap();
    let sched = json!({"type": "cons12", "L": 0.25, "U": 0.75, "guard": 1_000_000});
    let cfg = write(&dir, "c.json", &config(sched, &[0.0, 0.5, 1.0], 10_000));
    let csv = dir.path().join("t.csv");
    assert_eq!(otslab(&["simulate", "-c", s(&cfg), "-o", s(&csv)], &[]).code, 0);
    let r = rows(&csv);
    assert_eq!(r.len(), 10_001);
    assert!(r.iter().map(|(_, v)| v[0]).fold(f64::MIN, f64::max) < 0.25);
    assert!(r.iter().map(|(_, v)| v[2]).fold(f64::MAX, f64::min) > 0.75);
}

#[test]
fn fairness_of_periodic_word() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &config(abcd(), &[0.0, 0.5, 1.0], 10));
    let out = otslab(&["fairness", "-c", s(&cfg), "--horizon", "400"], &[]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let report = out.json();
    assert_eq!(report["minimal_uniform_k"], 4);
    assert_eq!(report["length"], 400);
    assert_eq!(report["analytic_tag"], json!({"KFair": 4}));
}

#[test]
fn blocked_seesaw_has_a_multiwindow_at_every_block() {
    let dir = TempDir::new().unwrap();
    let mut cfg = config(json!({"type": "cons23", "L": 0.2, "U": 0.8}), &[0.0, 0.2, 0.8, 1.0], 10_000);
    cfg["graph"] = json!({"agents": 4, "edges": [
        {"from": 1, "to": 2, "label": "a", "weight": 0.5},
        {"from": 2, "to": 1, "label": "b", "weight": 0.5},
        {"from": 3, "to": 2, "label": "c", "weight": 0.5},
        {"from": 2, "to": 3, "label": "d", "weight": 0.5},
        {"from": 4, "to": 3, "label": "e", "weight": 0.5},
        {"from": 3, "to": 4, "label": "f", "weight": 0.5}]});
    let path = write(&dir, "c.json", &cfg);
    let csv = dir.path().join("t.csv");
    assert_eq!(otslab(&["simulate", "-c", s(&path), "-o", s(&csv)], &[]).code, 0);
    let out = otslab(&["fairness", "--trace", s(&csv), "-c", s(&path), "-m", "1", "-k", "6"], &[]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let positions: Vec<u64> = out.json()["multiwindows"]["positions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    // each block opens with its only `b`
    let starts: Vec<u64> = rows(&csv)
        .iter()
        .skip(1)
        .enumerate()
        .filter(|(t, (a, _))| a == "b" && t + 6 <= 10_000)
        .map(|(t, _)| t as u64)
        .collect();
    assert!(starts.len() > 10);
    assert!(starts.iter().all(|t| positions.contains(t)), "{starts:?}");

    let from_config = otslab(&["fairness", "-c", s(&path), "--horizon", "10000", "-m", "1", "-k", "6"], &[]);
    assert_eq!(from_config.json()["multiwindows"]["positions"], out.json()["multiwindows"]["positions"]);
}

#[test]
fn absent_edge_is_flagged() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &config(json!({"type": "periodic", "word": ["a", "b", "c"]}), &[0.0, 0.5, 1.0], 10));
    let report = otslab(&["fairness", "-c", s(&cfg), "--horizon", "90"], &[]).json();
    assert_eq!(report["absent_edges"], json!(["d"]));
    assert_eq!(report["per_edge_max_gap"]["d"], 91);
    assert_eq!(report["per_edge_max_gap"]["a"], 3);
    assert_eq!(report["minimal_uniform_k"], Value::Null);
}

#[test]
fn fairness_argument_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &config(abcd(), &[0.0, 0.5, 1.0], 10));
    assert_eq!(otslab(&["fairness", "-c", s(&cfg), "--horizon", "10", "-G", "5"], &[]).code, 1);
    assert_eq!(otslab(&["fairness", "-c", s(&cfg), "--horizon", "10", "-m", "2"], &[]).code, 1);
    assert_eq!(otslab(&["fairness"], &[]).code, 1);
    let junk = dir.path().join("junk.csv");
    std::fs::write(&junk, "t,action,B1\n0,,0\n1,zz,0\n").unwrap();
    assert_eq!(otslab(&["fairness", "--trace", s(&junk), "-c", s(&cfg)], &[]).code, 1);
}

#[test]
fn verify_worked_example_is_clean() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &config(abcd(), &[0.0, 0.5, 1.0], 2000));
    let out = otslab(&["verify", "-c", s(&cfg)], &[]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let summary = out.json();
    assert_eq!(summary["total_violations"], 0);
    assert_eq!(summary["influence_range"], json!([0.5, 0.5]));
    assert!(summary["checks"].as_array().unwrap().iter().all(|c| c["evaluated"].as_u64().unwrap() > 0));
}

#[test]
fn verify_flags_a_corrupted_trace() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &config(abcd(), &[0.0, 0.5, 1.0], 40));
    let csv = dir.path().join("t.csv");
    assert_eq!(otslab(&["simulate", "-c", s(&cfg), "-o", s(&csv)], &[]).code, 0);
    let clean = otslab(&["verify", "-c", s(&cfg), "--trace", s(&csv)], &[]);
    assert_eq!(clean.code, 0, "{}", clean.stderr);

    // row t=3 overshoots: agent 2 lands below every previous opinion
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut cols: Vec<String> = lines[4].split(',').map(String::from).collect();
    assert_eq!(cols[0], "3");
    cols[3] = "-1.0e-1".into();
    lines[4] = cols.join(",");
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, lines.join("\n") + "\n").unwrap();
    let out = otslab(&["verify", "-c", s(&cfg), "--trace", s(&bad)], &[]);
    assert_eq!(out.code, 3, "{}", out.stderr);
    assert!(out.stderr.contains("new opinions stay within previous extremes"), "{}", out.stderr);
    let extremes = &out.json()["checks"][0];
    assert!(extremes["violations"].as_u64().unwrap() > 0);
}

#[test]
fn verify_bounded_dynamic_influence() {
    let dir = TempDir::new().unwrap();
    let mut cfg = config(abcd(), &[0.0, 0.5, 1.0], 5000);
    cfg["influence"] = json!({"mode": "confirmation_bias", "scaled": {"IL": 0.1, "IU": 0.9}});
    let path = write(&dir, "c.json", &cfg);
    let out = otslab(&["verify", "-c", s(&path)], &[]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let summary = out.json();
    assert_eq!(summary["influence_range"], json!([0.1, 0.9]));
    assert_eq!(summary["influence_range_source"], "scaled bounds");
}

#[test]
fn verify_refuses_graphs_past_the_path_limit() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &config(abcd(), &[0.0, 0.5, 1.0], 10));
    assert_eq!(otslab(&["verify", "-c", s(&cfg), "--path-limit", "2"], &[]).code, 1);
}

#[test]
fn reproduce_fig1b_converges_to_half() {
    let dir = TempDir::new().unwrap();
    let out = otslab(&["reproduce", "fig1b", "-o", s(dir.path())], &[]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let r = rows(&dir.path().join("fig1b.csv"));
    assert_eq!(r.len(), 2001);
    assert!(r[2000].1.iter().all(|v| (v - 0.5).abs() < 1e-3));
    let svg = std::fs::read_to_string(dir.path().join("fig1b.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    let cfg: ExperimentConfig = serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig1b.json")).unwrap()).unwrap();
    assert_eq!(cfg.steps, 2000);
}

#[test]
fn reproduce_fig2b_keeps_sources_apart() {
    let dir = TempDir::new().unwrap();
    assert_eq!(otslab(&["reproduce", "fig2b", "-o", s(dir.path())], &[]).code, 0);
    let r = rows(&dir.path().join("fig2b.csv"));
    let last = &r.last().unwrap().1;
    assert!((last[0] - last[1]).abs() < 1e-9);
    assert!((last[4] - last[5]).abs() < 1e-9);
    assert!((last[0] - last[4]).abs() > 0.05, "{last:?}");
}

#[test]
fn reproduce_fig5c_never_closes_the_gap() {
    let dir = TempDir::new().unwrap();
    assert_eq!(otslab(&["reproduce", "fig5c", "-o", s(dir.path())], &[]).code, 0);
    let r = rows(&dir.path().join("fig5c.csv"));
    let min_gap = r.iter().map(|(_, v)| (v[0] - v[1]).abs()).fold(f64::MAX, f64::min);
    assert!(min_gap >= 0.6 - 1e-12, "{min_gap}");
    // opinions plus one influence series per edge
    let svg = std::fs::read_to_string(dir.path().join("fig5c.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 4);
}

#[test]
fn reproduce_every_figure() {
    let dir = TempDir::new().unwrap();
    for id in otslab::presets::FIGURES {
        let out = otslab(&["reproduce", id, "-o", s(dir.path())], &[]);
        assert_eq!(out.code, 0, "{id}: {}", out.stderr);
        assert_eq!(out.json()["figure"], id);
        for ext in ["json", "csv", "svg"] {
            assert!(dir.path().join(format!("{id}.{ext}")).exists());
        }
    }
    let bad = otslab(&["reproduce", "fig9", "-o", s(dir.path())], &[]);
    assert_eq!(bad.code, 1);
    assert!(bad.stderr.contains("fig1b") && bad.stderr.contains("fig5d"));
}

#[test]
fn random_runs_are_deterministic_and_seed_overridable() {
    let dir = TempDir::new().unwrap();
    let sched = |seed: u64| json!({"type": "random", "seed": seed, "probs": {"a": 1, "b": 1, "c": 1, "d": 1}});
    let one = write(&dir, "one.json", &config(sched(1), &[0.0, 0.5, 1.0], 300));
    let five = write(&dir, "five.json", &config(sched(5), &[0.0, 0.5, 1.0], 300));
    let trace = |cfg: &Path, name: &str, env: &[(&str, &str)]| {
        let csv = dir.path().join(name);
        assert_eq!(otslab(&["simulate", "-c", s(cfg), "-o", s(&csv)], env).code, 0);
        std::fs::read_to_string(csv).unwrap()
    };
    let a = trace(&one, "a.csv", &[]);
    assert_eq!(a, trace(&one, "b.csv", &[]));
    let overridden = trace(&one, "c.csv", &[("OTSLAB_SEED", "5")]);
    assert_ne!(a, overridden);
    assert_eq!(overridden, trace(&five, "d.csv", &[]));
    assert_eq!(otslab(&["simulate", "-c", s(&one), "-o", s(&dir.path().join("e.csv"))], &[("OTSLAB_SEED", "x")]).code, 1);
}

#[test]
fn batch_runs_every_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &config(json!({"type": "random"}), &[0.0, 0.5, 1.0], 2000));
    let out = otslab(&["simulate", "-c", s(&cfg), "--seeds", "3..11"], &[]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let batch = out.json();
    let seeds: Vec<u64> = batch.as_array().unwrap().iter().map(|r| r["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, (3..11).collect::<Vec<_>>());
    assert!(batch.as_array().unwrap().iter().all(|r| r["first_consensus"].is_u64()));
    assert_eq!(otslab(&["simulate", "-c", s(&cfg), "--seeds", "3..11"], &[]).stdout, out.stdout);
    assert_eq!(otslab(&["simulate", "-c", s(&cfg), "--seeds", "5..5"], &[]).code, 1);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let mut typo = config(abcd(), &[0.0, 0.5, 1.0], 10);
    typo["stpes"] = json!(3);
    let typo = write(&dir, "typo.json", &typo);
    let out = otslab(&["simulate", "-c", s(&typo), "-o", "x.csv"], &[]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("stpes"));

    let missing = otslab(&["simulate", "-c", s(&dir.path().join("nope.json")), "-o", "x.csv"], &[]);
    assert_eq!(missing.code, 2);

    let guard = write(&dir, "g.json", &config(json!({"type": "cons12", "L": 0.25, "U": 0.75, "guard": 1}), &[0.0, 0.5, 1.0], 100));
    let out = otslab(&["simulate", "-c", s(&guard), "-o", s(&dir.path().join("g.csv"))], &[]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("counter-example loop did not terminate within guard"), "{}", out.stderr);

    let pre = write(&dir, "p.json", &config(json!({"type": "cons12", "L": 0.25, "U": 0.75}), &[0.5, 0.5, 0.5], 100));
    assert_eq!(otslab(&["simulate", "-c", s(&pre), "-o", s(&dir.path().join("p.csv"))], &[]).code, 1);
    assert_eq!(otslab(&["frobnicate"], &[]).code, 1);
    assert_eq!(otslab(&["--help"], &[]).code, 0);
}

#[test]
fn csv_round_trip_is_bit_exact() {
    for seed in 0..20u64 {
        let mut cfg = config(json!({"type": "random", "seed": seed}), &[0.0, 0.1, 0.7], 500);
        cfg["influence"] = json!({"mode": "confirmation_bias", "scaled": {"IL": 0.05, "IU": 0.95}});
        cfg["initial"] = json!([0.013 * seed as f64, 1.0 / 3.0, std::f64::consts::FRAC_1_SQRT_2]);
        let exp = Experiment::new(serde_json::from_value(cfg).unwrap()).unwrap();
        let trace = run(&exp).unwrap();
        let mut buf = Vec::new();
        write_trace(&mut buf, &trace, &exp.graph).unwrap();
        let back = read_trace(buf.as_slice(), &exp.graph).unwrap();
        assert_eq!(back.actions(), trace.actions());
        for (x, y) in back.states().zip(trace.states()) {
            let bits = |s: &[f64]| s.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(x), bits(y));
        }
    }
}

#[test]
fn simulate_without_csv_writes_only_svg() {
    let dir = TempDir::new().unwrap();
    let exp = Experiment::new(serde_json::from_value(config(abcd(), &[0.0, 0.5, 1.0], 50)).unwrap()).unwrap();
    let svg = dir.path().join("p.svg");
    let summary = simulate(&exp, None, Some(&svg)).unwrap();
    assert_eq!(summary.steps, 50);
    let text = std::fs::read_to_string(svg).unwrap();
    assert!(text.starts_with("<svg") && text.matches("<polyline").count() == 3);
}
