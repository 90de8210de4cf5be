//! Trace CSV: `t,action,B1,…,Bn`. Row 0 is the initial state with an empty
//! action; opinions carry 17 significant digits so parsing is bit-exact.

use std::io::{Read, Write};

use otslab_core::analysis::RunTrace;
use otslab_core::graph::InfluenceGraph;

use crate::error::CliError;

fn header(agents: usize) -> Vec<String> {
    let mut h = vec!["t".to_string(), "action".to_string()];
    h.extend((1..=agents).map(|i| format!("B{i}")));
    h
}

pub fn format_opinion(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trace<W: Write>(out: W, trace: &RunTrace, graph: &InfluenceGraph) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let runtime = |e: csv::Error| CliError::Runtime(format!("writing trace: {e}"));
    w.write_record(header(trace.agents())).map_err(runtime)?;
    for t in 0..=trace.steps() {
        let action = if t == 0 { "" } else { graph.label(trace.actions()[t - 1]) };
        let mut row = vec![t.to_string(), action.to_string()];
        row.extend(trace.state(t).iter().map(|&v| format_opinion(v)));
        w.write_record(&row).map_err(runtime)?;
    }
    w.flush().map_err(|e| CliError::Runtime(format!("writing trace: {e}")))
}

/// Parse a trace written by [`write_trace`]. Influence values are not part of
/// the file and come back as NaN.
pub fn read_trace<R: Read>(input: R, graph: &InfluenceGraph) -> Result<RunTrace, CliError> {
    let bad = |msg: String| CliError::Validation(format!("trace CSV: {msg}"));
    let mut r = csv::Reader::from_reader(input);
    let got: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_string).collect();
    let want = header(graph.agent_count());
    if got != want {
        return Err(bad(format!("header {got:?}, expected {want:?}")));
    }
    let mut states = Vec::new();
    let mut actions = Vec::new();
    for (row, record) in r.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.get(0) != Some(row.to_string().as_str()) {
            return Err(bad(format!("row {row} has t = {:?}", record.get(0))));
        }
        let action = record.get(1).unwrap_or_default();
        match (row, action) {
            (0, "") => {}
            (0, a) => return Err(bad(format!("initial row has action {a:?}"))),
            (_, a) => actions.push(graph.edge_by_label(a).map_err(|e| bad(format!("row {row}: {e}")))?),
        }
        let values = record
            .iter()
            .skip(2)
            .map(|v| v.parse::<f64>().map_err(|_| bad(format!("row {row}: {v:?} is not a number"))))
            .collect::<Result<Vec<_>, _>>()?;
        states.push(values);
    }
    let influences = vec![f64::NAN; actions.len()];
    Ok(RunTrace::from_parts(graph.agent_count(), states, actions, influences)?)
}

/// Edge labels of a trace CSV without interpreting its opinions.
pub fn read_actions<R: Read>(input: R) -> Result<Vec<String>, CliError> {
    let mut r = csv::Reader::from_reader(input);
    r.records()
        .skip(1)
        .map(|rec| {
            let rec = rec.map_err(|e| CliError::Validation(format!("trace CSV: {e}")))?;
            Ok(rec.get(1).unwrap_or_default().to_string())
        })
        .collect()
}
