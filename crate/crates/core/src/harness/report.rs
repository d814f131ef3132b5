//! JSON reports. Every top-level document carries `"schema": 1`; object keys
//! are emitted in sorted order so identical inputs give identical bytes.

use serde_json::{json, Map, Value};

use super::{BugReport, Comparison, ExpectationCheck, SweepRow, Verdict};
use crate::events::event_name;
use crate::exec::Execution;
use crate::relation::EventId;

pub const SCHEMA_VERSION: u32 = 1;

fn names(ids: &[EventId]) -> Value {
    ids.iter().map(|&e| Value::from(event_name(e))).collect()
}

pub fn witness_json(exec: &Execution) -> Value {
    let g = &exec.graph;
    let events: Vec<Value> = g
        .events
        .iter()
        .map(|e| {
            json!({
                "name": e.name(),
                "thread": e.thread,
                "kind": e.kind,
                "loc": e.loc,
                "value": exec.value_of(e.id),
                "reg": e.reg,
                "annotation": e.annotation,
                "init": e.is_init,
            })
        })
        .collect();
    let rf: Vec<Value> = exec.rf.iter().map(|(w, r)| names(&[w, r])).collect();
    let mo: Map<String, Value> = exec
        .mo
        .iter()
        .map(|(loc, chain)| (loc.0.clone(), names(chain)))
        .collect();
    json!({
        "events": events,
        "rf": rf,
        "mo": mo,
        "registers": exec.registers,
        "final_memory": exec.final_memory(),
    })
}

pub fn verdict_json(v: &Verdict) -> Value {
    json!({
        "model": v.model,
        "verdict": v.expectation(),
        "allowed": v.allowed,
        "reason": v.reason,
        "witness": v.witness.as_ref().map(witness_json),
    })
}

fn bug_json(b: &BugReport) -> Value {
    json!({
        "source_test": b.source.name,
        "source_text": b.source.to_string(),
        "mapping": b.mapping,
        "compiled_text": b.compiled.to_string(),
        "source_verdict": verdict_json(&b.source_verdict),
        "target_verdict": verdict_json(&b.target_verdict),
        "target_witness": witness_json(&b.target_witness),
        "forced_cycle": b.forced_cycle.as_deref().map(names),
        "loophole_gap": b.loophole_gap,
    })
}

fn comparison_body(c: &Comparison) -> Value {
    match c {
        Comparison::Bug(b) => {
            let mut v = bug_json(b);
            v["result"] = json!("bug");
            v
        }
        Comparison::Ok { source, target } => json!({
            "result": "ok",
            "source_verdict": verdict_json(source),
            "target_verdict": verdict_json(target),
        }),
    }
}

pub fn comparison_json(c: &Comparison) -> Value {
    let mut v = comparison_body(c);
    v["schema"] = json!(SCHEMA_VERSION);
    v
}

pub fn sweep_json(rows: &[SweepRow]) -> Value {
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            let results: Vec<Value> = r
                .results
                .iter()
                .map(|(m, c)| {
                    json!({
                        "mapping": m,
                        "bug": c.is_bug(),
                        "source": c.source_verdict().expectation(),
                        "target": c.target_verdict().expectation(),
                    })
                })
                .collect();
            json!({
                "variant": r.variant.name,
                "orders": r.orders,
                "results": results,
            })
        })
        .collect();
    let bugs = rows
        .iter()
        .flat_map(|r| r["results"].as_array().cloned().unwrap_or_default())
        .filter(|x| x["bug"] == json!(true))
        .count();
    json!({ "schema": SCHEMA_VERSION, "variants": rows, "bugs": bugs })
}

pub fn corpus_json(checks: &[ExpectationCheck]) -> Value {
    let failed = checks.iter().filter(|c| !c.met).count();
    json!({
        "schema": SCHEMA_VERSION,
        "checks": checks,
        "total": checks.len(),
        "failed": failed,
    })
}
