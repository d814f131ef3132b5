mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;

/// (sorted register values, per-location mo as value sequences).
type Shape = (Vec<(String, u64)>, Vec<(String, Vec<u64>)>);
use mapcheck::{
    build_events, compute_fr, enumerate_executions, filter_outcome, EventGraph, LitmusOp,
    LitmusTest, Loc, OpShape, Outcome, OutcomeTerm, Reg,
};

/// Naive oracle: walks the program text directly (not the event graph) and
/// recursively enumerates (reader -> source value) choices and per-location
/// store permutations. Returns the set of (read values, final mo value
/// sequences) so it can be compared against the implementation.
fn oracle<O: LitmusOp>(t: &LitmusTest<O>) -> BTreeSet<Shape> {
    let mut reads: Vec<(String, String)> = Vec::new();
    let mut stores: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for th in &t.threads {
        for op in &th.ops {
            match op.shape() {
                OpShape::Load { reg, loc } => reads.push((reg.0.clone(), loc.0.clone())),
                OpShape::Store { loc, value } => {
                    stores.entry(loc.0.clone()).or_default().push(value)
                }
                OpShape::Fence(_) => {}
            }
        }
    }
    let locs: Vec<String> = t.init.keys().map(|l| l.0.clone()).collect();

    fn rf_rec<O: LitmusOp>(
        t: &LitmusTest<O>,
        reads: &[(String, String)],
        stores: &BTreeMap<String, Vec<u64>>,
        acc: &mut Vec<(String, u64)>,
        out: &mut Vec<Vec<(String, u64)>>,
    ) {
        let Some(((reg, loc), rest)) = reads.split_first() else {
            out.push(acc.clone());
            return;
        };
        let mut values = vec![t.init[&Loc::new(loc.clone())]];
        values.extend(stores.get(loc).cloned().unwrap_or_default());
        for v in values {
            acc.push((reg.clone(), v));
            rf_rec(t, rest, stores, acc, out);
            acc.pop();
        }
    }

    fn perms(items: &[u64]) -> Vec<Vec<u64>> {
        if items.is_empty() {
            return vec![vec![]];
        }
        let mut out = vec![];
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let x = rest.remove(i);
            for mut p in perms(&rest) {
                p.insert(0, x);
                out.push(p);
            }
        }
        out
    }

    fn mo_rec(
        locs: &[String],
        init: &BTreeMap<String, u64>,
        stores: &BTreeMap<String, Vec<u64>>,
        acc: &mut Vec<(String, Vec<u64>)>,
        out: &mut Vec<Vec<(String, Vec<u64>)>>,
    ) {
        let Some((loc, rest)) = locs.split_first() else {
            out.push(acc.clone());
            return;
        };
        for p in perms(stores.get(loc).map(Vec::as_slice).unwrap_or(&[])) {
            let mut chain = vec![init[loc]];
            chain.extend(p);
            acc.push((loc.clone(), chain));
            mo_rec(rest, init, stores, acc, out);
            acc.pop();
        }
    }

    let init: BTreeMap<String, u64> = t.init.iter().map(|(l, v)| (l.0.clone(), *v)).collect();
    let mut rfs = vec![];
    rf_rec(t, &reads, &stores, &mut vec![], &mut rfs);
    let mut mos = vec![];
    mo_rec(&locs, &init, &stores, &mut vec![], &mut mos);
    let mut out = BTreeSet::new();
    for r in &rfs {
        for m in &mos {
            let mut r = r.clone();
            r.sort();
            out.insert((r, m.clone()));
        }
    }
    out
}

fn observed<O: LitmusOp>(t: &LitmusTest<O>) -> (usize, BTreeSet<Shape>) {
    let execs = enumerate_executions(t);
    let set = execs
        .iter()
        .map(|e| {
            let regs: Vec<(String, u64)> =
                e.registers.iter().map(|(r, v)| (r.0.clone(), *v)).collect();
            let mo: Vec<(String, Vec<u64>)> =
                e.mo.iter()
                    .map(|(l, c)| {
                        (
                            l.0.clone(),
                            c.iter().map(|&w| e.graph.event(w).value.unwrap()).collect(),
                        )
                    })
                    .collect();
            (regs, mo)
        })
        .collect();
    (execs.len(), set)
}

#[test]
fn enumeration_matches_recursive_oracle_on_corpus() {
    for t in all_c11_corpus() {
        let expected = oracle(&t);
        let (n, got) = observed(&t);
        assert_eq!(n, got.len(), "{}: duplicate executions", t.name);
        assert_eq!(got, expected, "{}", t.name);
    }
    for t in all_isa_corpus() {
        let expected = oracle(&t);
        let (n, got) = observed(&t);
        assert_eq!(n, got.len(), "{}: duplicate executions", t.name);
        assert_eq!(got, expected, "{}", t.name);
    }
}

#[test]
fn execution_counts() {
    // 4 reads with 2 candidate writes each; mo forced.
    assert_eq!(oracle(&c11("iriw_acq_acq.lit")).len(), 16);
    assert_eq!(enumerate_executions(&c11("iriw_acq_acq.lit")).len(), 16);
    // 3 reads with 2 candidates each.
    assert_eq!(oracle(&c11("rwc.lit")).len(), 8);
    assert_eq!(enumerate_executions(&c11("rwc.lit")).len(), 8);
    let single = parse_c11("c11 test one\nthread 0 { store(x, 1, relaxed) }\noutcome x=1\n");
    assert_eq!(enumerate_executions(&single).len(), 1);
    // two writers to x: 2 mo orders x 3 sources for the read
    let two = parse_c11(
        "c11 test two\nthread 0 { store(x, 1, relaxed) }\nthread 1 { store(x, 2, relaxed) }\n\
         thread 2 { r1 = load(x, relaxed) }\noutcome r1=0\n",
    );
    assert_eq!(enumerate_executions(&two).len(), 6);
}

#[test]
fn enumeration_is_deterministic() {
    let t = c11("iriw_acq_acq.lit");
    assert_eq!(enumerate_executions(&t), enumerate_executions(&t));
}

#[test]
fn events_and_sb() {
    let iriw = c11("iriw_acq_acq.lit");
    let (events, sb) = build_events(&iriw);
    assert_eq!(events.iter().filter(|e| e.is_init).count(), 2);
    assert_eq!(events.iter().filter(|e| !e.is_init).count(), 6);
    assert_eq!(sb.len(), 2);
    let g = EventGraph::build(&iriw);
    assert_eq!(g.sb, edges(&g, &["e->f", "g->h"]));
    assert!(g.event(ev(&g, "a")).is_init && g.event(ev(&g, "a")).loc == Some(Loc::new("x")));

    let rwc = c11("rwc.lit");
    let (events, sb) = build_events(&rwc);
    assert_eq!(events.iter().filter(|e| !e.is_init).count(), 5);
    assert_eq!(sb.len(), 2);

    let chain = parse_c11(
        "c11 test chain\nthread 0 { store(x, 1, relaxed); store(y, 1, relaxed); r1 = load(x, relaxed) }\noutcome r1=1\n",
    );
    let (_, sb) = build_events(&chain);
    assert_eq!(sb.len(), 3, "sb is stored transitively closed");
}

#[test]
fn sb_is_per_thread_strict_total_order() {
    for t in all_c11_corpus() {
        let g = EventGraph::build(&t);
        assert!(g.sb.is_irreflexive() && g.sb.is_transitive());
        for (a, b) in g.sb.iter() {
            assert!(g.same_thread(a, b));
        }
        for ids in &g.threads {
            for (i, &a) in ids.iter().enumerate() {
                for &b in &ids[i + 1..] {
                    assert!(g.sb.contains(a, b));
                }
            }
        }
    }
}

#[test]
fn executions_are_well_formed() {
    for t in all_c11_corpus() {
        for e in enumerate_executions(&t) {
            let g = &e.graph;
            for r in g.reads() {
                let w = e.source(r.id).unwrap();
                assert!(g.same_location(w, r.id));
                assert!(g.event(w).is_write());
                assert_eq!(e.rf.iter().filter(|&(_, rr)| rr == r.id).count(), 1);
            }
            for (loc, chain) in &e.mo {
                assert_eq!(chain[0], g.inits[loc]);
                let distinct: BTreeSet<_> = chain.iter().collect();
                assert_eq!(distinct.len(), chain.len());
                assert_eq!(chain.len(), g.writes_to(loc).count());
            }
        }
    }
}

#[test]
fn filter_outcome_examples() {
    let iriw = c11("iriw_acq_acq.lit");
    assert_eq!(
        filter_outcome(enumerate_executions(&iriw), &iriw.outcome).len(),
        1
    );
    let rwc = c11("rwc.lit");
    assert_eq!(
        filter_outcome(enumerate_executions(&rwc), &rwc.outcome).len(),
        1
    );
    let unsat = Outcome::new(vec![OutcomeTerm::Reg(Reg::new("r1"), 7)]);
    assert!(filter_outcome(enumerate_executions(&iriw), &unsat).is_empty());
}

#[test]
fn full_register_outcomes_match_at_most_one_execution() {
    for t in all_c11_corpus() {
        let regs = t.registers();
        let execs = enumerate_executions(&t);
        let mut seen = BTreeSet::new();
        for e in &execs {
            if e.mo.values().all(|c| c.len() <= 2) {
                let key: Vec<_> = regs.iter().map(|r| e.registers[r]).collect();
                assert!(
                    seen.insert(key),
                    "{}: two executions share register values",
                    t.name
                );
            }
        }
    }
}

#[test]
fn final_memory_outcome_terms() {
    let t = parse_c11(
        "c11 test ww\nthread 0 { store(x, 1, relaxed) }\nthread 1 { store(x, 2, relaxed) }\noutcome x=2\n",
    );
    let execs = filter_outcome(enumerate_executions(&t), &t.outcome);
    assert_eq!(execs.len(), 1);
    let e = &execs[0];
    let g = &e.graph;
    assert_eq!(
        e.mo[&Loc::new("x")],
        vec![ev(g, "a"), ev(g, "b"), ev(g, "c")]
    );
}

#[test]
fn fr_examples() {
    let iriw = c11("iriw_acq_acq.lit");
    let e = outcome_witness(&iriw);
    let g = &e.graph;
    assert_eq!(compute_fr(&e), edges(g, &["f->d", "h->c"]));

    let rwc = c11("rwc.lit");
    let e = outcome_witness(&rwc);
    let g = &e.graph;
    let fr = compute_fr(&e);
    assert!(fr.contains(ev(g, "e"), ev(g, "f")) && fr.contains(ev(g, "g"), ev(g, "c")));
    // d reads the mo-maximal write of x
    assert_eq!(fr.successors(ev(g, "d")).count(), 0);
}
