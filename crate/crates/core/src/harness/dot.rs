use std::fmt::Write;

use crate::events::{Event, EventKind};
use crate::exec::Execution;
use crate::litmus::Annotation;
use crate::relation::Relation;

/// A named relation to draw; each name gets one edge style.
#[derive(Clone, Debug)]
pub struct DotRelation {
    pub name: String,
    pub relation: Relation,
}

impl DotRelation {
    pub fn new(name: impl Into<String>, relation: Relation) -> Self {
        DotRelation {
            name: name.into(),
            relation,
        }
    }
}

/// Drops edges implied by transitivity: `r \ (r ; r)`. For strict orders
/// this is the covering relation.
pub fn immediate(r: &Relation) -> Relation {
    r.difference(&r.compose(r))
}

fn edge_style(name: &str) -> &'static str {
    match name {
        "sb" | "po" => "color=black",
        "rf" | "rfe" | "rfi" => "color=red",
        "sw" => "color=darkgreen",
        "hb" => "color=gray50, style=dashed",
        "mo" | "co" => "color=blue",
        "fr" | "fre" => "color=orange",
        "sc_hb" => "color=purple, penwidth=2",
        "sc_mo" => "color=navy, penwidth=2",
        "sc_fr" => "color=darkred, penwidth=2",
        "sc" => "color=purple, style=dotted",
        "ppo" => "color=brown",
        "lwfence" => "color=cyan4",
        "ffence" => "color=magenta",
        "prop" => "color=darkorange, style=dashed",
        _ => "color=black, style=dotted",
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn node_label(exec: &Execution, e: &Event) -> String {
    let mut label = format!("{}: {}", e.name(), e.kind.letter());
    if let Some(loc) = &e.loc {
        let value = exec
            .value_of(e.id)
            .map_or("?".to_string(), |v| v.to_string());
        let _ = write!(label, " {loc}={value}");
    }
    if let Some(reg) = &e.reg {
        let _ = write!(label, " ({reg})");
    }
    match e.annotation {
        Annotation::Order(o) => {
            let _ = write!(label, " [{o}]");
        }
        Annotation::Fence(k) => {
            let _ = write!(label, " [{k}]");
        }
        Annotation::Plain => {}
    }
    label
}

/// Renders an execution as a DOT digraph. Nodes are grouped into one
/// cluster per thread (plus one for initial writes) and labelled
/// `name: kind loc=value [order]`; each relation is drawn with its own
/// edge style, in the order given.
pub fn emit_dot(title: &str, exec: &Execution, relations: &[DotRelation]) -> String {
    let g = &exec.graph;
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(title));
    out.push_str("  rankdir=TB;\n");
    out.push_str("  node [shape=box, fontname=\"monospace\"];\n");

    let mut clusters: Vec<(String, Vec<&Event>)> = Vec::new();
    let inits: Vec<&Event> = g.events.iter().filter(|e| e.is_init).collect();
    if !inits.is_empty() {
        clusters.push(("init".into(), inits));
    }
    for (ti, ids) in g.threads.iter().enumerate() {
        clusters.push((format!("T{ti}"), ids.iter().map(|&i| g.event(i)).collect()));
    }
    for (ci, (label, events)) in clusters.iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_{ci} {{");
        let _ = writeln!(out, "    label={};", quote(label));
        for e in events {
            let shape = if e.kind == EventKind::Fence {
                ", shape=ellipse"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "    {} [label={}{shape}];",
                e.name(),
                quote(&node_label(exec, e))
            );
        }
        out.push_str("  }\n");
    }

    for rel in relations {
        let style = edge_style(&rel.name);
        for (a, b) in rel.relation.iter() {
            let _ = writeln!(
                out,
                "  {} -> {} [label={}, {style}];",
                g.event(a).name(),
                g.event(b).name(),
                quote(&rel.name)
            );
        }
    }
    out.push_str("}\n");
    out
}
