//! End-to-end comparison of C11 verdicts against compiled hardware verdicts.

mod dot;
mod report;
mod sweep;

pub use dot::{emit_dot, immediate, DotRelation};
pub use report::{
    comparison_json, corpus_json, sweep_json, verdict_json, witness_json, SCHEMA_VERSION,
};
pub use sweep::{sweep, Position, SweepRow};

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::c11::{self, batty_linearization_gap, C11Failure, C11Verdict, C11Witness};
use crate::corpus::CorpusEntry;
use crate::exec::Execution;
use crate::hw::{hw_allows, HwError, HwVerdict};
use crate::litmus::{AnyTest, Arch, C11Test, Expectation, IsaTest, MemoryOrder};
use crate::mapping::{compile, mapping_catalog, MappingError, MappingTable};
use crate::relation::EventId;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Hw(#[from] HwError),
    #[error("position {thread}:{index} does not name an access in the test")]
    InvalidPosition { thread: usize, index: usize },
    #[error("no order in the sweep set is valid for the access at {thread}:{index}")]
    NoValidOrder { thread: usize, index: usize },
    #[error("position {thread}:{index} is listed twice")]
    DuplicatePosition { thread: usize, index: usize },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// Which model a verdict was computed under.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    C11,
    Hw { arch: Arch, mapping: Option<String> },
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::C11 => f.write_str("c11"),
            Model::Hw {
                arch,
                mapping: Some(m),
            } => write!(f, "hw({arch}, {m})"),
            Model::Hw {
                arch,
                mapping: None,
            } => write!(f, "hw({arch})"),
        }
    }
}

/// Allowed/forbidden decision for one outcome under one model.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub model: Model,
    pub allowed: bool,
    /// Present exactly when `allowed`.
    pub witness: Option<Execution>,
    pub reason: String,
}

impl Verdict {
    pub fn expectation(&self) -> Expectation {
        Expectation::from_allowed(self.allowed)
    }
}

fn c11_reason(v: &C11Verdict) -> String {
    if v.allowed {
        return "consistent execution found".into();
    }
    match v.rejected.first() {
        None => "no candidate execution produces the outcome".into(),
        Some(w) => match &w.verdict {
            Err(f) => f.to_string(),
            Ok(()) => unreachable!("rejected witness is consistent"),
        },
    }
}

fn hw_reason(v: &HwVerdict) -> String {
    if v.allowed {
        return "consistent execution found".into();
    }
    match v.rejected.first() {
        None => "no candidate execution produces the outcome".into(),
        Some((_, violation)) => format!(
            "{} violated: {}",
            violation.axiom,
            c11::cycle_string(&violation.cycle)
        ),
    }
}

pub fn c11_verdict(test: &C11Test) -> (Verdict, C11Verdict) {
    let raw = c11::c11_allows(test);
    let v = Verdict {
        model: Model::C11,
        allowed: raw.allowed,
        witness: raw.witness.as_ref().map(|w| w.execution.clone()),
        reason: c11_reason(&raw),
    };
    (v, raw)
}

pub fn hw_verdict(test: &IsaTest, mapping: Option<&str>) -> Result<Verdict, HwError> {
    let raw = hw_allows(test)?;
    Ok(Verdict {
        model: Model::Hw {
            arch: test.arch.unwrap_or(Arch::Power),
            mapping: mapping.map(str::to_owned),
        },
        allowed: raw.allowed,
        reason: hw_reason(&raw),
        witness: raw.witness,
    })
}

/// Verdict for a test of either level under its own model.
pub fn check(test: &AnyTest) -> Result<Verdict, HarnessError> {
    Ok(match test {
        AnyTest::C11(t) => c11_verdict(t).0,
        AnyTest::Isa(t) => hw_verdict(t, None)?,
    })
}

/// A C11-forbidden outcome that the compiled program allows.
#[derive(Clone, Debug)]
pub struct BugReport {
    pub source: C11Test,
    pub mapping: String,
    pub compiled: IsaTest,
    pub source_verdict: Verdict,
    pub target_verdict: Verdict,
    pub target_witness: Execution,
    /// The rejected C11 execution the diagnostics below refer to.
    pub source_execution: Option<C11Witness>,
    /// Cycle among the forced SC edges of the rejected C11 execution.
    pub forced_cycle: Option<Vec<EventId>>,
    /// Whether the classic proof's linearisation admits that execution.
    pub loophole_gap: Option<bool>,
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Comparison {
    Bug(Box<BugReport>),
    Ok { source: Verdict, target: Verdict },
}

impl Comparison {
    pub fn is_bug(&self) -> bool {
        matches!(self, Comparison::Bug(_))
    }

    pub fn source_verdict(&self) -> &Verdict {
        match self {
            Comparison::Bug(b) => &b.source_verdict,
            Comparison::Ok { source, .. } => source,
        }
    }

    pub fn target_verdict(&self) -> &Verdict {
        match self {
            Comparison::Bug(b) => &b.target_verdict,
            Comparison::Ok { target, .. } => target,
        }
    }
}

/// Checks the source test under C11, compiles it, checks the result under
/// the hardware model, and reports a bug when C11 forbids the outcome but the
/// hardware allows it.
pub fn compare(test: &C11Test, mapping: &MappingTable) -> Result<Comparison, HarnessError> {
    compare_checked(test, &c11_verdict(test), mapping)
}

/// [`compare`] with the C11 side already computed.
pub(crate) fn compare_checked(
    test: &C11Test,
    checked: &(Verdict, C11Verdict),
    mapping: &MappingTable,
) -> Result<Comparison, HarnessError> {
    let compiled = compile(test, mapping)?;
    let (source, raw) = (checked.0.clone(), &checked.1);
    let target = hw_verdict(&compiled, Some(&mapping.name))?;
    if source.allowed || !target.allowed {
        return Ok(Comparison::Ok { source, target });
    }

    let explained = raw
        .rejected
        .iter()
        .find(|w| {
            matches!(
                w.verdict,
                Err(C11Failure::NoScOrder {
                    forced_cycle: Some(_)
                })
            )
        })
        .or_else(|| {
            raw.rejected
                .iter()
                .find(|w| matches!(w.verdict, Err(C11Failure::NoScOrder { .. })))
        })
        .or(raw.rejected.first())
        .cloned();
    let forced_cycle = explained.as_ref().and_then(|w| w.forced.cycle());
    let loophole_gap = explained.as_ref().and_then(|w| match w.verdict {
        Err(C11Failure::NoScOrder { .. }) => batty_linearization_gap(&w.execution, &w.hb)
            .ok()
            .map(|g| g.gap),
        _ => None,
    });
    let target_witness = target
        .witness
        .clone()
        .expect("allowed verdict has a witness");
    Ok(Comparison::Bug(Box::new(BugReport {
        source: test.clone(),
        mapping: mapping.name.clone(),
        compiled,
        source_verdict: source,
        target_verdict: target,
        target_witness,
        source_execution: explained,
        forced_cycle,
        loophole_gap,
    })))
}

/// Worker count from `MAPCHECK_JOBS`; defaults to the available parallelism.
pub fn jobs_from_env() -> usize {
    std::env::var("MAPCHECK_JOBS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Maps `f` over `items` on `jobs` workers, preserving input order.
pub(crate) fn par_map<T, R, F>(items: &[T], jobs: usize, f: F) -> Result<Vec<R>, HarnessError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    if jobs <= 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

/// One checked expectation from the corpus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExpectationCheck {
    pub test: String,
    pub path: String,
    /// `c11`, `hw`, or the mapping name for compiled forms.
    pub model: String,
    pub expected: Expectation,
    pub actual: Expectation,
    pub reason: String,
    pub met: bool,
}

/// Checks every expectation recorded in the corpus: each test's own verdict,
/// and for C11 tests the verdict of the compiled form under every mapping
/// the test lists.
pub fn run_corpus(
    entries: &[CorpusEntry],
    jobs: usize,
) -> Result<Vec<ExpectationCheck>, HarnessError> {
    let catalog = mapping_catalog();
    let per_entry = par_map(
        entries,
        jobs,
        |entry| -> Result<Vec<ExpectationCheck>, HarnessError> {
            let mut out = Vec::new();
            let name = entry.test.name().to_owned();
            let verdict = check(&entry.test)?;
            let own_model = match entry.test {
                AnyTest::C11(_) => "c11",
                AnyTest::Isa(_) => "hw",
            };
            let own_expectation = match &entry.test {
                AnyTest::C11(t) => t.expectation,
                AnyTest::Isa(t) => t.expectation,
            };
            if let Some(expected) = own_expectation {
                out.push(ExpectationCheck {
                    test: name.clone(),
                    path: entry.path.to_owned(),
                    model: own_model.into(),
                    expected,
                    actual: verdict.expectation(),
                    reason: verdict.reason.clone(),
                    met: expected == verdict.expectation(),
                });
            }
            if let AnyTest::C11(t) = &entry.test {
                for (mapping_name, &expected) in &t.expect {
                    let table = catalog.iter().find(|m| &m.name == mapping_name);
                    let Some(table) = table else {
                        out.push(ExpectationCheck {
                            test: name.clone(),
                            path: entry.path.to_owned(),
                            model: mapping_name.clone(),
                            expected,
                            actual: expected,
                            reason: "unknown mapping".into(),
                            met: false,
                        });
                        continue;
                    };
                    let compiled = compile(t, table)?;
                    let v = hw_verdict(&compiled, Some(&table.name))?;
                    out.push(ExpectationCheck {
                        test: name.clone(),
                        path: entry.path.to_owned(),
                        model: mapping_name.clone(),
                        expected,
                        actual: v.expectation(),
                        met: expected == v.expectation(),
                        reason: v.reason,
                    });
                }
            }
            Ok(out)
        },
    )?;
    let mut all = Vec::new();
    for r in per_entry {
        all.extend(r?);
    }
    Ok(all)
}

/// Parses a memory-order list such as `acquire,seq_cst`.
pub fn parse_orders(s: &str) -> Result<Vec<MemoryOrder>, String> {
    s.split(',').map(|o| o.trim().parse()).collect()
}
