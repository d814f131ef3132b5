#![allow(dead_code)]

use mapcheck::corpus::corpus_test;
use mapcheck::events::EventGraph;
use mapcheck::{AnyTest, C11Test, EventId, Execution, IsaTest, Relation};

pub fn c11(name: &str) -> C11Test {
    match corpus_test(name).expect("bundled").expect("parses") {
        AnyTest::C11(t) => t,
        AnyTest::Isa(_) => panic!("{name} is not a C11 test"),
    }
}

pub fn isa(name: &str) -> IsaTest {
    match corpus_test(name).expect("bundled").expect("parses") {
        AnyTest::Isa(t) => t,
        AnyTest::C11(_) => panic!("{name} is not an ISA test"),
    }
}

pub fn parse_c11(text: &str) -> C11Test {
    match mapcheck::parse_litmus(text).unwrap() {
        AnyTest::C11(t) => t,
        _ => panic!("not c11"),
    }
}

pub fn parse_isa(text: &str) -> IsaTest {
    match mapcheck::parse_litmus(text).unwrap() {
        AnyTest::Isa(t) => t,
        _ => panic!("not isa"),
    }
}

/// Event id from its letter name.
pub fn ev(graph: &EventGraph, name: &str) -> EventId {
    graph
        .events
        .iter()
        .find(|e| e.name() == name)
        .unwrap_or_else(|| panic!("no event {name}"))
        .id
}

/// Relation from `"c->f"` style edges.
pub fn edges(graph: &EventGraph, list: &[&str]) -> Relation {
    list.iter()
        .map(|s| {
            let (a, b) = s.split_once("->").unwrap();
            (ev(graph, a.trim()), ev(graph, b.trim()))
        })
        .collect()
}

/// The unique execution of a test producing its outcome (panics otherwise).
pub fn outcome_witness<O: mapcheck::LitmusOp>(t: &mapcheck::LitmusTest<O>) -> Execution {
    let mut execs = mapcheck::filter_outcome(mapcheck::enumerate_executions(t), &t.outcome);
    assert_eq!(
        execs.len(),
        1,
        "{}: expected exactly one outcome execution",
        t.name
    );
    execs.remove(0)
}

pub fn all_c11_corpus() -> Vec<C11Test> {
    mapcheck::corpus::load_corpus()
        .into_iter()
        .filter_map(|e| match e.test {
            AnyTest::C11(t) => Some(t),
            _ => None,
        })
        .collect()
}

pub fn all_isa_corpus() -> Vec<IsaTest> {
    mapcheck::corpus::load_corpus()
        .into_iter()
        .filter_map(|e| match e.test {
            AnyTest::Isa(t) => Some(t),
            _ => None,
        })
        .collect()
}
