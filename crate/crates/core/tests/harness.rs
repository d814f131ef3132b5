mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use mapcheck::c11::{check_execution, compute_hb, compute_sw};
use mapcheck::corpus::load_corpus;
use mapcheck::harness::{
    compare, comparison_json, corpus_json, emit_dot, immediate, parse_orders, run_corpus, sweep,
    sweep_json, Comparison, DotRelation, HarnessError, Position, SCHEMA_VERSION,
};
use mapcheck::hw::hw_consistent;
use mapcheck::mapping::builtin_mapping;
use mapcheck::{mapping_catalog, Execution, MemoryOrder};

fn compare_named(src: &str, mapping: &str) -> Comparison {
    compare(&c11(src), &builtin_mapping(mapping).unwrap()).unwrap()
}

#[test]
fn compare_flags_trailing_sync_iriw() {
    let c = compare_named("iriw_acq_acq.lit", "trailing-sync-power");
    let Comparison::Bug(b) = c else {
        panic!("expected a bug")
    };
    assert!(!b.source_verdict.allowed && b.target_verdict.allowed);
    assert!(b.forced_cycle.is_some());
    assert_eq!(b.loophole_gap, Some(true));
    assert_eq!(b.compiled.name, "IRIW-acq-acq+trailing-sync-power");
}

#[test]
fn compare_accepts_sound_mappings() {
    for src in [
        "iriw_acq_acq.lit",
        "rwc.lit",
        "mp.lit",
        "sb.lit",
        "sb_rlx.lit",
    ] {
        for m in ["leading-sync-power", "leading-sync-armv7", "gcc-armv7"] {
            assert!(!compare_named(src, m).is_bug(), "{src} under {m}");
        }
    }
    // allowed in C11: never a bug whatever the hardware does
    assert!(!compare_named("sb_rlx.lit", "trailing-sync-power").is_bug());
}

#[test]
fn bug_reports_recheck() {
    for t in all_c11_corpus() {
        for m in mapping_catalog() {
            let Comparison::Bug(b) = compare(&t, &m).unwrap() else {
                continue;
            };
            let w: &Execution = &b.target_witness;
            assert!(hw_consistent(w).unwrap().is_ok());
            assert!(w.satisfies(&b.compiled.outcome));
            let src = b.source_execution.as_ref().unwrap();
            assert!(src.execution.satisfies(&t.outcome));
            let again = check_execution(&src.execution);
            assert!(!again.is_consistent());
            assert_eq!(again.verdict, src.verdict);
            let regs: BTreeMap<_, _> = src.execution.registers.clone();
            assert_eq!(
                regs, w.registers,
                "source and target witness agree on registers"
            );
        }
    }
}

fn positions(s: &str) -> Vec<Position> {
    s.split(',').map(|p| p.parse().unwrap()).collect()
}

#[test]
fn iriw_sweep() {
    let rows = sweep(
        &c11("iriw_acq_acq.lit"),
        &positions("2:0,3:0"),
        &parse_orders("acquire,seq_cst").unwrap(),
        &mapping_catalog(),
        2,
    )
    .unwrap();
    assert_eq!(rows.len(), 4);
    let flagged = |m: &str| -> Vec<String> {
        rows.iter()
            .filter(|r| r.results.iter().any(|(n, c)| n == m && c.is_bug()))
            .map(|r| r.variant.name.clone())
            .collect()
    };
    assert_eq!(
        flagged("trailing-sync-power"),
        [
            "IRIW-acq-acq+acq+acq",
            "IRIW-acq-acq+acq+sc",
            "IRIW-acq-acq+sc+acq"
        ]
    );
    assert_eq!(flagged("trailing-sync-armv7").len(), 3);
    assert!(flagged("leading-sync-power").is_empty());
    assert!(flagged("leading-sync-armv7").is_empty());
    assert!(flagged("gcc-armv7").is_empty());
    assert_eq!(
        rows[3].orders,
        vec![MemoryOrder::SeqCst, MemoryOrder::SeqCst]
    );
}

#[test]
fn rwc_sweep() {
    let rows = sweep(
        &c11("rwc.lit"),
        &positions("1:0"),
        &parse_orders("acquire,seq_cst").unwrap(),
        &[builtin_mapping("trailing-sync-power").unwrap()],
        1,
    )
    .unwrap();
    let bugs: Vec<_> = rows.iter().map(|r| r.results[0].1.is_bug()).collect();
    assert_eq!(bugs, [true, false]);
}

#[test]
fn sweep_skips_invalid_orders_and_rejects_bad_positions() {
    let rows = sweep(
        &c11("rwc.lit"),
        &positions("0:0"),
        &parse_orders("relaxed,acquire,release,seq_cst").unwrap(),
        &[builtin_mapping("leading-sync-power").unwrap()],
        1,
    )
    .unwrap();
    // a store takes relaxed, release and seq_cst
    assert_eq!(rows.len(), 3);
    let err = sweep(
        &c11("rwc.lit"),
        &positions("9:0"),
        &[MemoryOrder::SeqCst],
        &mapping_catalog(),
        1,
    );
    assert!(matches!(err, Err(HarnessError::InvalidPosition { .. })));
    let err = sweep(
        &c11("rwc.lit"),
        &positions("1:0,1:0"),
        &[MemoryOrder::SeqCst],
        &mapping_catalog(),
        1,
    );
    assert!(matches!(err, Err(HarnessError::DuplicatePosition { .. })));
    assert!(parse_orders("acquire,bogus").is_err());
}

#[test]
fn parallel_results_are_deterministic() {
    let run = |jobs| {
        let rows = sweep(
            &c11("iriw_acq_acq.lit"),
            &positions("2:0,2:1,3:0"),
            &parse_orders("relaxed,acquire,seq_cst").unwrap(),
            &mapping_catalog(),
            jobs,
        )
        .unwrap();
        serde_json::to_string(&sweep_json(&rows)).unwrap()
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(8));
    let corpus = |jobs| {
        serde_json::to_string(&corpus_json(&run_corpus(&load_corpus(), jobs).unwrap())).unwrap()
    };
    assert_eq!(corpus(1), corpus(3));
}

#[test]
fn json_reports_carry_schema() {
    let bug = comparison_json(&compare_named("rwc.lit", "trailing-sync-armv7"));
    assert_eq!(bug["schema"], SCHEMA_VERSION);
    assert_eq!(bug["result"], "bug");
    assert_eq!(bug["forced_cycle"].as_array().unwrap().len(), 4);
    assert_eq!(bug["target_verdict"]["verdict"], "allowed");
    assert!(bug["target_witness"]["events"].is_array());
    let ok = comparison_json(&compare_named("rwc.lit", "leading-sync-armv7"));
    assert_eq!(ok["result"], "ok");
    assert_eq!(ok["schema"], SCHEMA_VERSION);
    let corpus = corpus_json(&run_corpus(&load_corpus(), 2).unwrap());
    assert_eq!(corpus["failed"], 0);
    assert_eq!(corpus["schema"], SCHEMA_VERSION);
}

/// Minimal DOT reader covering what the emitter produces: node statements,
/// edge statements and cluster subgraphs.
#[derive(Debug, Default)]
struct Dot {
    nodes: BTreeMap<String, String>,
    edges: BTreeSet<(String, String, String)>,
    clusters: usize,
}

fn tokens(src: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut s = String::from("\"");
            while let Some(c) = chars.next() {
                match c {
                    '\\' => s.push(chars.next().unwrap()),
                    '"' => break,
                    c => s.push(c),
                }
            }
            out.push(s);
        } else if c == '-' {
            chars.next();
            assert_eq!(chars.next(), Some('>'));
            out.push("->".into());
        } else if "{}[];=,".contains(c) {
            chars.next();
            out.push(c.to_string());
        } else {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_alphanumeric() || c == '_' || c == '.' {
                    s.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            assert!(!s.is_empty(), "unexpected {c:?}");
            out.push(s);
        }
    }
    out
}

fn attrs(toks: &[String], i: &mut usize) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    if toks.get(*i).map(String::as_str) != Some("[") {
        return m;
    }
    *i += 1;
    while toks[*i] != "]" {
        let k = toks[*i].clone();
        assert_eq!(toks[*i + 1], "=");
        m.insert(k, toks[*i + 2].trim_start_matches('"').to_string());
        *i += 3;
        if toks[*i] == "," {
            *i += 1;
        }
    }
    *i += 1;
    m
}

fn parse_dot(src: &str) -> Dot {
    let toks = tokens(src);
    assert_eq!(toks[0], "digraph");
    assert_eq!(toks[2], "{");
    let mut dot = Dot::default();
    let mut i = 3;
    let mut depth = 1;
    while depth > 0 {
        let t = toks[i].clone();
        match t.as_str() {
            "}" => {
                depth -= 1;
                i += 1;
            }
            "subgraph" => {
                assert!(toks[i + 1].starts_with("cluster_"));
                assert_eq!(toks[i + 2], "{");
                dot.clusters += 1;
                depth += 1;
                i += 3;
            }
            "node" => {
                i += 1;
                attrs(&toks, &mut i);
                assert_eq!(toks[i], ";");
                i += 1;
            }
            _ if toks[i + 1] == "=" => i += 4,
            _ if toks[i + 1] == "->" => {
                let to = toks[i + 2].clone();
                i += 3;
                let a = attrs(&toks, &mut i);
                dot.edges.insert((t, to, a["label"].clone()));
                assert_eq!(toks[i], ";");
                i += 1;
            }
            _ => {
                i += 1;
                let a = attrs(&toks, &mut i);
                dot.nodes.insert(t, a["label"].clone());
                assert_eq!(toks[i], ";");
                i += 1;
            }
        }
    }
    assert_eq!(i, toks.len());
    dot
}

#[test]
fn dot_output_parses_and_matches_relations() {
    let e = outcome_witness(&c11("iriw_acq_acq.lit"));
    let sw = compute_sw(&e);
    let hb = compute_hb(&e, &sw);
    let rels = vec![
        DotRelation::new("sb", immediate(&e.graph.sb)),
        DotRelation::new("rf", e.rf.clone()),
        DotRelation::new("sw", sw.clone()),
        DotRelation::new("fr", e.fr()),
    ];
    let dot = parse_dot(&emit_dot("IRIW", &e, &rels));
    assert_eq!(dot.nodes.len(), e.graph.events.len());
    assert_eq!(dot.clusters, e.graph.threads.len() + 1);
    assert_eq!(dot.nodes["c"], "c: W x=1 [seq_cst]");
    assert_eq!(dot.nodes["e"], "e: R x=1 (r1) [acquire]");
    let expected: BTreeSet<_> = rels
        .iter()
        .flat_map(|r| {
            r.relation
                .iter()
                .map(|(a, b)| {
                    (
                        e.graph.event(a).name(),
                        e.graph.event(b).name(),
                        r.name.clone(),
                    )
                })
                .collect::<Vec<_>>()
        })
        .collect();
    assert_eq!(dot.edges, expected);
    assert!(dot.edges.contains(&("c".into(), "e".into(), "sw".into())));
    assert!(!hb.is_empty());
}

#[test]
fn dot_with_no_relations_has_nodes_only() {
    let e = outcome_witness(&isa("mp_lwsync_ctrlisync.lit"));
    let text = emit_dot("MP \"quoted\"", &e, &[]);
    let dot = parse_dot(&text);
    assert!(dot.edges.is_empty());
    assert_eq!(dot.nodes.len(), e.graph.events.len());
    assert!(text.contains("shape=ellipse"));
}

#[test]
fn immediate_is_covering_relation() {
    let chain = parse_c11(
        "c11 test chain\nthread 0 { store(x, 1, relaxed); store(y, 1, relaxed); store(z, 1, relaxed) }\noutcome x=1\n",
    );
    let e = outcome_witness(&chain);
    assert_eq!(e.graph.sb.len(), 3);
    assert_eq!(immediate(&e.graph.sb).len(), 2);
}
