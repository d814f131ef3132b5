//! C/C++11 consistency of candidate executions.
//!
//! The checks run in this order on an execution that satisfies the outcome:
//!
//! 1. `hb = (sb ∪ sw ∪ initVis)⁺` must be irreflexive.
//! 2. Coherence: hb must agree with mo, rf and fr on every location
//!    (the shapes are listed on [`CoherenceShape`]).
//! 3. A total order on the seq_cst events must exist that contains
//!    `hb ∩ (SC×SC)` and `mo ∩ (SC×SC)` and lets every SC read observe
//!    either the last SC write before it, or a non-SC write that does not
//!    happen-before that last SC write. When no SC write to the location
//!    precedes the read, any source is admitted.
//!
//! Release sequences are not modelled: sw only relates a release (or
//! seq_cst) store to an acquire (or seq_cst) load reading from it.
//! Initial writes are relaxed and happen-before every program event.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::events::{event_name, EventGraph};
use crate::exec::{enumerate_executions, filter_outcome, Execution};
use crate::litmus::{C11Test, Outcome};
use crate::relation::{EventId, Relation};

/// sw: rf edges from a release/seq_cst store to an acquire/seq_cst load.
pub fn compute_sw(exec: &Execution) -> Relation {
    let g = &exec.graph;
    exec.rf.filter(|w, r| {
        let released = g.event(w).order().is_some_and(|o| o.is_release());
        let acquired = g.event(r).order().is_some_and(|o| o.is_acquire());
        released && acquired
    })
}

/// Every initial write happens-before every program event.
pub fn init_visibility(graph: &EventGraph) -> Relation {
    let inits: Vec<EventId> = graph.inits.values().copied().collect();
    let program: Vec<EventId> = graph.program_events().map(|e| e.id).collect();
    Relation::cross(&inits, &program)
}

/// hb = (sb ∪ sw ∪ initVis)⁺.
pub fn compute_hb(exec: &Execution, sw: &Relation) -> Relation {
    exec.graph
        .sb
        .union(sw)
        .union(&init_visibility(&exec.graph))
        .plus()
}

/// Coherence shapes; each names a forbidden cycle through one hb edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CoherenceShape {
    /// `w1 mo w2` but `w2 hb w1`.
    CoWW,
    /// `w hb r` but `r` reads a write mo-before `w` (cycle `r fr w hb r`).
    CoWR,
    /// `r hb w` but `r` reads a write mo-after `w` (cycle `w' rf r hb w mo w'`).
    CoRW,
    /// `r1 hb r2` but `r2` reads a write mo-before `r1`'s source.
    CoRR,
    /// A read happens-before the write it reads from.
    RfHb,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CoherenceViolation {
    pub shape: CoherenceShape,
    /// The hb edge that contradicts mo/rf/fr.
    pub edge: (EventId, EventId),
}

impl fmt::Display for CoherenceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.edge;
        write!(
            f,
            "{:?} via hb edge {}->{}",
            self.shape,
            event_name(a),
            event_name(b)
        )
    }
}

pub fn check_coherence(exec: &Execution, hb: &Relation) -> Result<(), CoherenceViolation> {
    let g = &exec.graph;
    let mo = exec.mo_relation();
    let violation = |shape, a, b| {
        Err(CoherenceViolation {
            shape,
            edge: (a, b),
        })
    };
    for (a, b) in hb.iter() {
        if !g.same_location(a, b) {
            continue;
        }
        let (ea, eb) = (g.event(a), g.event(b));
        match (ea.is_write(), eb.is_write()) {
            (true, true) => {
                if mo.contains(b, a) {
                    return violation(CoherenceShape::CoWW, a, b);
                }
            }
            (true, false) => {
                let src = exec.source(b).expect("read without source");
                if mo.contains(src, a) {
                    return violation(CoherenceShape::CoWR, a, b);
                }
            }
            (false, true) => {
                let src = exec.source(a).expect("read without source");
                if src == b {
                    return violation(CoherenceShape::RfHb, a, b);
                }
                if mo.contains(b, src) {
                    return violation(CoherenceShape::CoRW, a, b);
                }
            }
            (false, false) => {
                let (s1, s2) = (exec.source(a).unwrap(), exec.source(b).unwrap());
                if mo.contains(s2, s1) {
                    return violation(CoherenceShape::CoRR, a, b);
                }
            }
        }
    }
    Ok(())
}

fn sc_events(exec: &Execution) -> Vec<EventId> {
    exec.graph
        .events
        .iter()
        .filter(|e| e.is_seq_cst())
        .map(|e| e.id)
        .collect()
}

/// Searches for a valid total order on the seq_cst events.
///
/// Orders are explored in lexicographic order of event ids, so the result is
/// the first valid permutation. Candidates violating hb or mo are pruned as
/// soon as they are placed; the SC-read rule is checked when each read is
/// placed, since it only depends on the prefix before the read.
pub fn find_sc_order(exec: &Execution, hb: &Relation) -> Option<Vec<EventId>> {
    let sc = sc_events(exec);
    let sc_set: BTreeSet<EventId> = sc.iter().copied().collect();
    let must = hb
        .union(&exec.mo_relation())
        .restrict(|e| sc_set.contains(&e));

    fn extend(
        exec: &Execution,
        hb: &Relation,
        must: &Relation,
        remaining: &mut Vec<EventId>,
        prefix: &mut Vec<EventId>,
    ) -> bool {
        if remaining.is_empty() {
            return true;
        }
        for i in 0..remaining.len() {
            let e = remaining[i];
            if remaining.iter().any(|&o| o != e && must.contains(o, e)) {
                continue;
            }
            if !sc_read_ok(exec, hb, prefix, e) {
                continue;
            }
            remaining.remove(i);
            prefix.push(e);
            if extend(exec, hb, must, remaining, prefix) {
                return true;
            }
            prefix.pop();
            remaining.insert(i, e);
        }
        false
    }

    let mut remaining = sc;
    let mut prefix = Vec::new();
    extend(exec, hb, &must, &mut remaining, &mut prefix).then_some(prefix)
}

/// The SC-read rule for `e` placed right after `prefix`.
fn sc_read_ok(exec: &Execution, hb: &Relation, prefix: &[EventId], e: EventId) -> bool {
    let g = &exec.graph;
    let ev = g.event(e);
    if !ev.is_read() {
        return true;
    }
    let last_sc_write = prefix
        .iter()
        .rev()
        .copied()
        .find(|&w| g.event(w).is_write() && g.same_location(w, e));
    let Some(wl) = last_sc_write else {
        return true;
    };
    let src = exec.source(e).expect("read without source");
    src == wl || (!g.event(src).is_seq_cst() && !hb.contains(src, wl))
}

/// Checks that `order` is a valid SC order for the execution.
pub fn is_valid_sc_order(exec: &Execution, hb: &Relation, order: &[EventId]) -> bool {
    let sc: BTreeSet<EventId> = sc_events(exec).into_iter().collect();
    let placed: BTreeSet<EventId> = order.iter().copied().collect();
    if placed != sc || placed.len() != order.len() {
        return false;
    }
    let total = Relation::total_order(order);
    let must = hb.union(&exec.mo_relation()).restrict(|e| sc.contains(&e));
    must.is_subset(&total) && (0..order.len()).all(|i| sc_read_ok(exec, hb, &order[..i], order[i]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScEdgeKind {
    ScHb,
    ScMo,
    ScFr,
}

impl ScEdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScEdgeKind::ScHb => "sc_hb",
            ScEdgeKind::ScMo => "sc_mo",
            ScEdgeKind::ScFr => "sc_fr",
        }
    }
}

/// Edges every valid SC order must contain.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ForcedScEdges {
    pub sc_hb: Relation,
    pub sc_mo: Relation,
    pub sc_fr: Relation,
}

impl ForcedScEdges {
    pub fn union(&self) -> Relation {
        self.sc_hb.union(&self.sc_mo).union(&self.sc_fr)
    }

    pub fn labeled(&self) -> [(ScEdgeKind, &Relation); 3] {
        [
            (ScEdgeKind::ScHb, &self.sc_hb),
            (ScEdgeKind::ScMo, &self.sc_mo),
            (ScEdgeKind::ScFr, &self.sc_fr),
        ]
    }

    /// A cycle in the forced edges proves no SC order exists.
    pub fn cycle(&self) -> Option<Vec<EventId>> {
        self.union().find_cycle()
    }

    pub fn is_empty(&self) -> bool {
        self.sc_hb.is_empty() && self.sc_mo.is_empty() && self.sc_fr.is_empty()
    }
}

/// Forced SC edges: hb and mo restricted to SC events, plus the sc_fr edges
/// implied by the SC-read rule.
///
/// `(r, w')` is an sc_fr edge when SC read `r` reads from `w`, SC write `w'`
/// is mo-after `w`, and either `w` is SC, or `w` happens-before every SC
/// write to the location from `w'` onwards in mo. Placing `w'` before `r`
/// would make one of those writes the last SC write before `r`, which `r`
/// may then not skip.
pub fn forced_sc_edges(exec: &Execution, hb: &Relation) -> ForcedScEdges {
    let g = &exec.graph;
    let sc: BTreeSet<EventId> = sc_events(exec).into_iter().collect();
    let is_sc = |e: EventId| sc.contains(&e);
    let mo = exec.mo_relation();

    let sc_hb = hb.restrict(is_sc);
    let sc_mo = mo.restrict(is_sc);
    let mut sc_fr = Relation::new();
    for (w, r) in exec.rf.iter() {
        if !is_sc(r) {
            continue;
        }
        for w2 in mo.successors(w).filter(|&w2| is_sc(w2)) {
            let forced = is_sc(w)
                || std::iter::once(w2)
                    .chain(mo.successors(w2))
                    .filter(|&w3| is_sc(w3))
                    .all(|w3| hb.contains(w, w3));
            if forced {
                sc_fr.insert(r, w2);
            }
        }
    }
    debug_assert!(sc_fr.iter().all(|(r, w)| g.same_location(r, w)));
    ForcedScEdges {
        sc_hb,
        sc_mo,
        sc_fr,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum C11Failure {
    /// hb has a cycle (shown as event ids).
    HbCycle {
        cycle: Vec<EventId>,
    },
    Incoherent {
        violation: CoherenceViolation,
    },
    /// No SC order exists; `forced_cycle` is a cycle in the forced edges
    /// when one explains it.
    NoScOrder {
        forced_cycle: Option<Vec<EventId>>,
    },
}

impl fmt::Display for C11Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            C11Failure::HbCycle { cycle } => write!(f, "hb cycle {}", cycle_string(cycle)),
            C11Failure::Incoherent { violation } => write!(f, "incoherent: {violation}"),
            C11Failure::NoScOrder {
                forced_cycle: Some(c),
            } => {
                write!(f, "no sc order: forced cycle {}", cycle_string(c))
            }
            C11Failure::NoScOrder { forced_cycle: None } => f.write_str("no sc order"),
        }
    }
}

/// `c -> f -> d -> h -> c`.
pub fn cycle_string(cycle: &[EventId]) -> String {
    let mut names: Vec<String> = cycle.iter().map(|&e| event_name(e)).collect();
    if let Some(first) = names.first().cloned() {
        names.push(first);
    }
    names.join(" -> ")
}

/// All derived C11 relations for one execution, plus its verdict.
#[derive(Clone, Debug)]
pub struct C11Witness {
    pub execution: Execution,
    pub sw: Relation,
    pub hb: Relation,
    pub sc_order: Option<Vec<EventId>>,
    pub forced: ForcedScEdges,
    pub verdict: Result<(), C11Failure>,
}

impl C11Witness {
    pub fn is_consistent(&self) -> bool {
        self.verdict.is_ok()
    }
}

/// Runs the full C11 consistency check on one execution.
pub fn check_execution(exec: &Execution) -> C11Witness {
    let sw = compute_sw(exec);
    let hb = compute_hb(exec, &sw);
    let mut w = C11Witness {
        execution: exec.clone(),
        forced: ForcedScEdges::default(),
        sc_order: None,
        verdict: Ok(()),
        sw,
        hb,
    };
    if let Some(cycle) = w.hb.find_cycle() {
        w.verdict = Err(C11Failure::HbCycle { cycle });
        return w;
    }
    if let Err(violation) = check_coherence(exec, &w.hb) {
        w.verdict = Err(C11Failure::Incoherent { violation });
        return w;
    }
    w.forced = forced_sc_edges(exec, &w.hb);
    w.sc_order = find_sc_order(exec, &w.hb);
    if w.sc_order.is_none() {
        w.verdict = Err(C11Failure::NoScOrder {
            forced_cycle: w.forced.cycle(),
        });
    }
    w
}

/// Result of checking an outcome against the C11 model.
#[derive(Clone, Debug)]
pub struct C11Verdict {
    pub allowed: bool,
    /// First consistent execution satisfying the outcome.
    pub witness: Option<C11Witness>,
    /// Every execution satisfying the outcome that was rejected, with why.
    pub rejected: Vec<C11Witness>,
}

pub fn c11_allows(test: &C11Test) -> C11Verdict {
    c11_allows_outcome(test, &test.outcome)
}

/// As [`c11_allows`], for an arbitrary outcome over the same program.
pub fn c11_allows_outcome(test: &C11Test, outcome: &Outcome) -> C11Verdict {
    let mut rejected = Vec::new();
    for exec in filter_outcome(enumerate_executions(test), outcome) {
        let w = check_execution(&exec);
        if w.is_consistent() {
            return C11Verdict {
                allowed: true,
                witness: Some(w),
                rejected,
            };
        }
        rejected.push(w);
    }
    C11Verdict {
        allowed: false,
        witness: None,
        rejected,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum GapError {
    #[error("execution has no seq_cst events")]
    NoScEvents,
}

/// Comparison between the linearisation used by the classic mapping proof
/// and the real SC-order axioms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearizationGap {
    /// `(sb ∪ mo ∪ fr ∪ rfe) ∩ (SC×SC)`.
    pub proof_relation: Relation,
    /// Whether `proof_relation⁺` is acyclic, i.e. the proof would linearise it.
    pub proof_acyclic: bool,
    pub sc_order_exists: bool,
    /// SC-to-SC hb edges the proof relation does not imply.
    pub missing_hb: Relation,
    /// Proof admits an SC order the axioms reject.
    pub gap: bool,
}

pub fn batty_linearization_gap(
    exec: &Execution,
    hb: &Relation,
) -> Result<LinearizationGap, GapError> {
    let sc: BTreeSet<EventId> = sc_events(exec).into_iter().collect();
    if sc.is_empty() {
        return Err(GapError::NoScEvents);
    }
    let proof_relation = exec
        .graph
        .sb
        .union(&exec.mo_relation())
        .union(&exec.fr())
        .union(&exec.rfe())
        .restrict(|e| sc.contains(&e));
    let proof_acyclic = proof_relation.is_acyclic();
    let sc_order_exists = find_sc_order(exec, hb).is_some();
    let missing_hb = hb
        .restrict(|e| sc.contains(&e))
        .difference(&proof_relation.plus());
    Ok(LinearizationGap {
        gap: proof_acyclic && !sc_order_exists,
        proof_relation,
        proof_acyclic,
        sc_order_exists,
        missing_hb,
    })
}
