//! Candidate executions: every choice of reads-from and modification order.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::events::EventGraph;
use crate::litmus::{LitmusOp, LitmusTest, Loc, Outcome, Reg, Value};
use crate::relation::{EventId, Relation};

/// A candidate execution witness: the events of a test together with one
/// choice of rf and mo.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    pub graph: Arc<EventGraph>,
    /// Write → read pairs; every read has exactly one source.
    pub rf: Relation,
    /// Per-location modification order, initial write first.
    pub mo: BTreeMap<Loc, Vec<EventId>>,
    pub registers: BTreeMap<Reg, Value>,
    sources: BTreeMap<EventId, EventId>,
}

impl Execution {
    /// Assembles an execution from explicit choices. `sources` maps each
    /// read to the write it reads from.
    pub fn new(
        graph: Arc<EventGraph>,
        sources: BTreeMap<EventId, EventId>,
        mo: BTreeMap<Loc, Vec<EventId>>,
    ) -> Execution {
        let rf = sources.iter().map(|(&r, &w)| (w, r)).collect();
        let registers = sources
            .iter()
            .filter_map(|(&r, &w)| {
                let reg = graph.event(r).reg.clone()?;
                Some((reg, graph.event(w).value?))
            })
            .collect();
        Execution {
            graph,
            rf,
            mo,
            registers,
            sources,
        }
    }

    pub fn source(&self, read: EventId) -> Option<EventId> {
        self.sources.get(&read).copied()
    }

    pub fn read_value(&self, read: EventId) -> Option<Value> {
        self.source(read).and_then(|w| self.graph.event(w).value)
    }

    /// Value observed by `id` if it is a read, written if it is a write.
    pub fn value_of(&self, id: EventId) -> Option<Value> {
        let e = self.graph.event(id);
        if e.is_read() {
            self.read_value(id)
        } else {
            e.value
        }
    }

    /// mo as a relation (union of the per-location strict total orders).
    pub fn mo_relation(&self) -> Relation {
        let mut r = Relation::new();
        for chain in self.mo.values() {
            r.extend(Relation::total_order(chain).iter());
        }
        r
    }

    pub fn fr(&self) -> Relation {
        compute_fr(self)
    }

    /// Reads-from between different threads (initial writes count as
    /// external to every thread).
    pub fn rfe(&self) -> Relation {
        self.rf.filter(|w, r| !self.graph.same_thread(w, r))
    }

    pub fn rfi(&self) -> Relation {
        self.rf.filter(|w, r| self.graph.same_thread(w, r))
    }

    /// Final memory: the value of each location's mo-maximal write.
    pub fn final_memory(&self) -> BTreeMap<Loc, Value> {
        self.mo
            .iter()
            .filter_map(|(loc, chain)| {
                let last = *chain.last()?;
                Some((loc.clone(), self.graph.event(last).value?))
            })
            .collect()
    }

    pub fn satisfies(&self, outcome: &Outcome) -> bool {
        outcome.holds(&self.registers, &self.final_memory())
    }
}

/// fr = rf⁻¹ ; mo: each read to every write mo-after its source.
pub fn compute_fr(exec: &Execution) -> Relation {
    exec.rf.inverse().compose(&exec.mo_relation())
}

/// All orderings of `items`, in lexicographic order of positions.
pub(crate) fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Cartesian product; the last coordinate varies fastest.
pub(crate) fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    choices.iter().fold(vec![Vec::new()], |acc, options| {
        acc.iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut v = prefix.clone();
                    v.push(o.clone());
                    v
                })
            })
            .collect()
    })
}

/// Every candidate execution of a test: each read may take any same-location
/// write as its source, and each location's non-initial writes may appear in
/// any order after the initial write. Results are in a deterministic order:
/// rf choices outermost, mo choices innermost.
pub fn enumerate_executions<O: LitmusOp>(test: &LitmusTest<O>) -> Vec<Execution> {
    enumerate_graph(Arc::new(EventGraph::build(test)))
}

pub fn enumerate_graph(graph: Arc<EventGraph>) -> Vec<Execution> {
    let reads: Vec<EventId> = graph.reads().map(|e| e.id).collect();
    let rf_choices: Vec<Vec<EventId>> = reads
        .iter()
        .map(|&r| {
            let loc = graph.event(r).loc.as_ref().expect("read without location");
            graph.writes_to(loc).map(|w| w.id).collect()
        })
        .collect();

    let locs: Vec<&Loc> = graph.inits.keys().collect();
    let mo_choices: Vec<Vec<Vec<EventId>>> = locs
        .iter()
        .map(|loc| {
            let init = graph.inits[*loc];
            let others: Vec<EventId> = graph
                .writes_to(loc)
                .filter(|w| !w.is_init)
                .map(|w| w.id)
                .collect();
            permutations(&others)
                .into_iter()
                .map(|p| std::iter::once(init).chain(p).collect())
                .collect()
        })
        .collect();

    let rf_product = cartesian(&rf_choices);
    let mo_product = cartesian(&mo_choices);
    let mut out = Vec::with_capacity(rf_product.len() * mo_product.len());
    for srcs in &rf_product {
        let sources: BTreeMap<EventId, EventId> =
            reads.iter().copied().zip(srcs.iter().copied()).collect();
        for chains in &mo_product {
            let mo = locs
                .iter()
                .map(|l| (*l).clone())
                .zip(chains.iter().cloned())
                .collect();
            out.push(Execution::new(graph.clone(), sources.clone(), mo));
        }
    }
    out
}

/// Executions whose registers and final memory satisfy the outcome.
pub fn filter_outcome(execs: Vec<Execution>, outcome: &Outcome) -> Vec<Execution> {
    execs.into_iter().filter(|e| e.satisfies(outcome)).collect()
}
