//! Axiomatic Power/ARMv7 model in the style of herd's Power model.
//!
//! Power and ARMv7 share one model: `sync` and `dmbish` are full fences,
//! `lwsync` is a lightweight fence, and `ctrlisync`/`ctrlisb` order the load
//! before them with every later access of the thread. No address or data
//! dependencies are modelled.
//!
//! ```text
//! fence     = lwfence ∪ ffence
//! hb        = ppo ∪ fence ∪ rfe
//! prop-base = (fence ∪ rfe;fence) ; hb*
//! prop      = (prop-base ∩ W×W) ∪ (com* ; prop-base* ; ffence ; hb*)
//!
//! sc-per-location  acyclic(po-loc ∪ com)
//! no-thin-air      acyclic(hb)
//! observation      irreflexive(fre ; prop ; hb*)
//! propagation      acyclic(co ∪ prop)
//! ```

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::events::{event_name, EventGraph, EventKind};
use crate::exec::{enumerate_executions, filter_outcome, Execution};
use crate::litmus::{FenceKind, IsaTest};
use crate::relation::{EventId, Relation};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum HwError {
    #[error("{fence} at event {event} does not directly follow a load")]
    MisplacedControlFence { fence: FenceKind, event: String },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HwRelations {
    pub po: Relation,
    pub po_loc: Relation,
    pub rf: Relation,
    pub rfe: Relation,
    pub rfi: Relation,
    pub co: Relation,
    pub fr: Relation,
    pub fre: Relation,
    pub com: Relation,
    pub ppo: Relation,
    pub lwfence: Relation,
    pub ffence: Relation,
    pub hb: Relation,
    pub prop_base: Relation,
    pub prop: Relation,
}

/// Pairs of accesses `(a, b)` in one thread with a fence satisfying `pick`
/// po-between them.
fn fence_pairs<F>(graph: &EventGraph, pick: F) -> Relation
where
    F: Fn(FenceKind) -> bool,
{
    let mut r = Relation::new();
    for thread in &graph.threads {
        for (i, &f) in thread.iter().enumerate() {
            match graph.event(f).fence() {
                Some(k) if pick(k) => {}
                _ => continue,
            }
            let before = thread[..i].iter().filter(|&&e| graph.event(e).is_access());
            for &a in before {
                for &b in thread[i + 1..]
                    .iter()
                    .filter(|&&e| graph.event(e).is_access())
                {
                    r.insert(a, b);
                }
            }
        }
    }
    r
}

/// Builds every relation the model needs from an ISA execution.
pub fn hw_relations(exec: &Execution) -> Result<HwRelations, HwError> {
    let g = &exec.graph;
    let accesses: Vec<EventId> = g
        .events
        .iter()
        .filter(|e| e.is_access())
        .map(|e| e.id)
        .collect();
    let is_access = |e: EventId| g.event(e).is_access();

    let po = g.sb.restrict(is_access);
    let po_loc = po.filter(|a, b| g.same_location(a, b));
    let rf = exec.rf.clone();
    let rfe = exec.rfe();
    let rfi = exec.rfi();
    let co = exec.mo_relation();
    let fr = exec.fr();
    let fre = fr.filter(|a, b| !g.same_thread(a, b));
    let com = rf.union(&co).union(&fr);

    let mut ppo = Relation::new();
    for thread in &g.threads {
        for (i, &f) in thread.iter().enumerate() {
            let Some(k) = g.event(f).fence().filter(|k| k.is_control()) else {
                continue;
            };
            let load = match i.checked_sub(1).map(|j| thread[j]) {
                Some(l) if g.event(l).kind == EventKind::Read => l,
                _ => {
                    return Err(HwError::MisplacedControlFence {
                        fence: k,
                        event: event_name(f),
                    })
                }
            };
            for &e in thread[i + 1..].iter().filter(|&&e| is_access(e)) {
                ppo.insert(load, e);
            }
        }
    }

    let lwfence = fence_pairs(g, FenceKind::is_lightweight)
        .filter(|a, b| !(g.event(a).is_write() && g.event(b).is_read()));
    let ffence = fence_pairs(g, FenceKind::is_full);
    let fence = lwfence.union(&ffence);
    let hb = ppo.union(&fence).union(&rfe);
    let hb_star = hb.star(accesses.iter().copied());
    let prop_base = fence.union(&rfe.compose(&fence)).compose(&hb_star);
    let is_write = |e: EventId| g.event(e).is_write();
    let prop = prop_base.restrict(is_write).union(&Relation::seq(&[
        &com.star(accesses.iter().copied()),
        &prop_base.star(accesses.iter().copied()),
        &ffence,
        &hb_star,
    ]));

    Ok(HwRelations {
        po,
        po_loc,
        rf,
        rfe,
        rfi,
        co,
        fr,
        fre,
        com,
        ppo,
        lwfence,
        ffence,
        hb,
        prop_base,
        prop,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HwAxiom {
    ScPerLocation,
    NoThinAir,
    Observation,
    Propagation,
}

impl HwAxiom {
    pub fn as_str(self) -> &'static str {
        match self {
            HwAxiom::ScPerLocation => "sc-per-location",
            HwAxiom::NoThinAir => "no-thin-air",
            HwAxiom::Observation => "observation",
            HwAxiom::Propagation => "propagation",
        }
    }
}

impl fmt::Display for HwAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HwViolation {
    pub axiom: HwAxiom,
    /// Events on a cycle witnessing the violation.
    pub cycle: Vec<EventId>,
}

/// Checks the four axioms in order, returning the first violated one.
pub fn check_axioms(exec: &Execution, rel: &HwRelations) -> Result<(), HwViolation> {
    let fail = |axiom, cycle| Err(HwViolation { axiom, cycle });
    if let Some(c) = rel.po_loc.union(&rel.com).find_cycle() {
        return fail(HwAxiom::ScPerLocation, c);
    }
    if let Some(c) = rel.hb.find_cycle() {
        return fail(HwAxiom::NoThinAir, c);
    }
    let universe = exec
        .graph
        .events
        .iter()
        .filter(|e| e.is_access())
        .map(|e| e.id);
    let back = rel.prop.compose(&rel.hb.star(universe));
    for (r, w) in rel.fre.iter() {
        if back.contains(w, r) {
            return fail(HwAxiom::Observation, vec![r, w]);
        }
    }
    if let Some(c) = rel.co.union(&rel.prop).find_cycle() {
        return fail(HwAxiom::Propagation, c);
    }
    Ok(())
}

pub fn hw_consistent(exec: &Execution) -> Result<Result<(), HwViolation>, HwError> {
    let rel = hw_relations(exec)?;
    Ok(check_axioms(exec, &rel))
}

#[derive(Clone, Debug)]
pub struct HwVerdict {
    pub allowed: bool,
    /// First consistent execution satisfying the outcome.
    pub witness: Option<Execution>,
    /// Executions satisfying the outcome that the model rejects.
    pub rejected: Vec<(Execution, HwViolation)>,
}

impl HwVerdict {
    /// Axiom that rejected the first outcome-satisfying execution, if any.
    pub fn reason(&self) -> Option<HwAxiom> {
        self.rejected.first().map(|(_, v)| v.axiom)
    }
}

pub fn hw_allows(test: &IsaTest) -> Result<HwVerdict, HwError> {
    let mut rejected = Vec::new();
    for exec in filter_outcome(enumerate_executions(test), &test.outcome) {
        match hw_consistent(&exec)? {
            Ok(()) => {
                return Ok(HwVerdict {
                    allowed: true,
                    witness: Some(exec),
                    rejected,
                })
            }
            Err(v) => rejected.push((exec, v)),
        }
    }
    Ok(HwVerdict {
        allowed: false,
        witness: None,
        rejected,
    })
}
