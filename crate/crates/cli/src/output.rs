//! Report rendering.

use std::fmt::Write;

use serde::Serialize;

use asrefine_core::campaign::{BatchReport, MutantReport, VerdictKind};

use crate::Format;

/// One CSV row per mutant.
#[derive(Serialize)]
struct Row<'a> {
    id: usize,
    file: &'a str,
    operator: &'a str,
    location: String,
    original: &'a str,
    replacement: &'a str,
    verdict: VerdictKind,
    mutated_action: &'a str,
    unsafe_state: String,
    trace_len: String,
    trace: String,
    find_secs: f64,
    reach_secs: f64,
    total_secs: f64,
    solver_calls: u64,
    solver_nodes: u64,
    explicit_verdict: String,
    explicit_transitions: String,
    agreement: String,
    detail: &'a str,
}

fn row(m: &MutantReport) -> Row<'_> {
    let spec = m.spec.as_ref();
    let ce = m.counterexample.as_ref();
    let opt = |v: Option<String>| v.unwrap_or_default();
    Row {
        id: m.id,
        file: m.file.as_deref().unwrap_or(""),
        operator: spec.map_or("", |s| s.operator.name()),
        location: opt(spec.map(|s| s.location.to_string())),
        original: spec.map_or("", |s| s.original.as_str()),
        replacement: spec.map_or("", |s| s.replacement.as_str()),
        verdict: m.verdict,
        mutated_action: m.mutated_action.as_deref().unwrap_or(""),
        unsafe_state: opt(ce.map(|c| c.unsafe_state.to_string())),
        trace_len: opt(ce.map(|c| c.trace.len().to_string())),
        trace: opt(ce.map(|c| trace_text(&c.trace))),
        find_secs: m.timings.find_secs,
        reach_secs: m.timings.reach_secs,
        total_secs: m.timings.total_secs,
        solver_calls: m.symbolic.as_ref().map_or(0, |s| s.solver.solve_calls),
        solver_nodes: m.symbolic.as_ref().map_or(0, |s| s.solver.nodes),
        explicit_verdict: opt(m.explicit.as_ref().map(|e| e.verdict.to_string())),
        explicit_transitions: opt(m.explicit.as_ref().map(|e| e.transitions_evaluated.to_string())),
        agreement: opt(m.agreement.map(|a| a.to_string())),
        detail: m.detail.as_deref().unwrap_or(""),
    }
}

fn trace_text<T: std::fmt::Display>(trace: &[T]) -> String {
    trace.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
}

fn csv_of(rows: &[&MutantReport]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for m in rows {
        w.serialize(row(m))?;
    }
    if rows.is_empty() {
        w.write_record([
            "id", "file", "operator", "location", "original", "replacement", "verdict", "mutated_action",
            "unsafe_state", "trace_len", "trace", "find_secs", "reach_secs", "total_secs", "solver_calls",
            "solver_nodes", "explicit_verdict", "explicit_transitions", "agreement", "detail",
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn mutant(m: &MutantReport, format: Format) -> anyhow::Result<String> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(m)? + "\n",
        Format::Csv => csv_of(&[m])?,
        Format::Text => mutant_text(m),
    })
}

fn mutant_text(m: &MutantReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "verdict: {}", m.verdict);
    if let Some(a) = &m.mutated_action {
        let _ = writeln!(s, "mutated action: {a}");
    }
    if let Some(c) = &m.counterexample {
        let _ = writeln!(s, "unsafe state: {}", c.unsafe_state);
        let _ = writeln!(s, "trace ({} steps): {}", c.trace.len(), trace_text(&c.trace));
        let _ = writeln!(s, "witness: {} -> {}", c.witness.0, c.witness.1);
    }
    if let Some(d) = &m.detail {
        let _ = writeln!(s, "detail: {d}");
    }
    if let Some(e) = &m.explicit {
        let _ = writeln!(s, "explicit: {} ({} transitions)", e.verdict, e.transitions_evaluated);
    }
    if let Some(a) = m.agreement {
        let _ = writeln!(s, "engines agree: {a}");
    }
    let t = m.timings;
    let _ = writeln!(s, "time: find {:.3}s, reach {:.3}s, total {:.3}s", t.find_secs, t.reach_secs, t.total_secs);
    s
}

pub fn batch(r: &BatchReport, format: Format) -> anyhow::Result<String> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(r)? + "\n",
        Format::Csv => csv_of(&r.mutants.iter().collect::<Vec<_>>())?,
        Format::Text => batch_text(r),
    })
}

fn batch_text(r: &BatchReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>5}  {:<13}  {:<18}  {:<10}  {:>6}  {:>9}", "id", "verdict", "action", "operator", "trace", "total(s)");
    for m in &r.mutants {
        let _ = writeln!(
            s,
            "{:>5}  {:<13}  {:<18}  {:<10}  {:>6}  {:>9.3}",
            m.id,
            m.verdict.name(),
            m.mutated_action.as_deref().unwrap_or("-"),
            m.spec.as_ref().map_or("-", |sp| sp.operator.name()),
            m.counterexample.as_ref().map_or("-".to_string(), |c| c.trace.len().to_string()),
            m.timings.total_secs,
        );
    }
    let sm = &r.summary;
    let _ = writeln!(s, "\n{} mutants, wall {:.3}s", sm.mutants, sm.wall_secs);
    for (v, n) in &sm.verdicts {
        let _ = writeln!(s, "  {:<13} {n}", v.name());
    }
    let _ = writeln!(s, "{:<8} {:>10} {:>10} {:>10} {:>10}", "phase", "total", "avg", "min", "max");
    for (name, a) in [("find", sm.find), ("reach", sm.reach), ("total", sm.total)] {
        let _ = writeln!(s, "{name:<8} {:>10.3} {:>10.4} {:>10.4} {:>10.4}", a.total, a.avg, a.min, a.max);
    }
    let _ = writeln!(s, "solver calls {}, nodes {}", sm.solver_calls, sm.solver_nodes);
    if sm.explicit_transitions > 0 {
        let _ = writeln!(s, "explicit transitions {}, disagreements {}", sm.explicit_transitions, sm.disagreements);
    }
    s
}
