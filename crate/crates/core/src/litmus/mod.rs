//! Litmus tests at the C11 and ISA levels.
//!
//! A test is a set of threads of straight-line memory operations, an initial
//! memory state and an outcome predicate. C11 tests carry memory orders on
//! every access; ISA tests carry plain loads and stores interleaved with
//! fences. The text format is handled by [`parse_litmus`] and the
//! [`Display`](std::fmt::Display) impl of [`LitmusTest`].

mod parse;
mod render;

pub use parse::{parse_litmus, ParseError};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

pub type Value = u64;

/// Memory order of a C11 atomic access.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryOrder {
    Relaxed,
    Acquire,
    Release,
    SeqCst,
}

impl MemoryOrder {
    pub const ALL: [MemoryOrder; 4] = [
        MemoryOrder::Relaxed,
        MemoryOrder::Acquire,
        MemoryOrder::Release,
        MemoryOrder::SeqCst,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MemoryOrder::Relaxed => "relaxed",
            MemoryOrder::Acquire => "acquire",
            MemoryOrder::Release => "release",
            MemoryOrder::SeqCst => "seq_cst",
        }
    }

    pub fn valid_for_load(self) -> bool {
        self != MemoryOrder::Release
    }

    pub fn valid_for_store(self) -> bool {
        self != MemoryOrder::Acquire
    }

    pub fn is_acquire(self) -> bool {
        matches!(self, MemoryOrder::Acquire | MemoryOrder::SeqCst)
    }

    pub fn is_release(self) -> bool {
        matches!(self, MemoryOrder::Release | MemoryOrder::SeqCst)
    }

    pub fn is_seq_cst(self) -> bool {
        self == MemoryOrder::SeqCst
    }
}

impl fmt::Display for MemoryOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MemoryOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relaxed" | "rlx" => Ok(MemoryOrder::Relaxed),
            "acquire" | "acq" => Ok(MemoryOrder::Acquire),
            "release" | "rel" => Ok(MemoryOrder::Release),
            "seq_cst" | "sc" => Ok(MemoryOrder::SeqCst),
            _ => Err(format!("unknown memory order `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    Power,
    Armv7,
}

impl Arch {
    pub fn as_str(self) -> &'static str {
        match self {
            Arch::Power => "power",
            Arch::Armv7 => "armv7",
        }
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Arch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "power" => Ok(Arch::Power),
            "armv7" => Ok(Arch::Armv7),
            _ => Err(format!("unknown architecture `{s}`")),
        }
    }
}

/// ISA-level fence. `CtrlIsync`/`CtrlIsb` stand for the
/// compare-branch-isync idiom bound to the load right before it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FenceKind {
    Sync,
    Lwsync,
    DmbIsh,
    CtrlIsync,
    CtrlIsb,
}

impl FenceKind {
    pub const ALL: [FenceKind; 5] = [
        FenceKind::Sync,
        FenceKind::Lwsync,
        FenceKind::DmbIsh,
        FenceKind::CtrlIsync,
        FenceKind::CtrlIsb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FenceKind::Sync => "sync",
            FenceKind::Lwsync => "lwsync",
            FenceKind::DmbIsh => "dmbish",
            FenceKind::CtrlIsync => "ctrlisync",
            FenceKind::CtrlIsb => "ctrlisb",
        }
    }

    /// Orders everything before it with everything after it, cumulatively.
    pub fn is_full(self) -> bool {
        matches!(self, FenceKind::Sync | FenceKind::DmbIsh)
    }

    pub fn is_lightweight(self) -> bool {
        self == FenceKind::Lwsync
    }

    pub fn is_control(self) -> bool {
        matches!(self, FenceKind::CtrlIsync | FenceKind::CtrlIsb)
    }
}

impl fmt::Display for FenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FenceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FenceKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown fence `{s}`"))
    }
}

/// Shared memory location name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Loc(pub String);

/// Thread-local register name (`r<digits>`), unique across the whole test.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Reg(pub String);

impl Loc {
    pub fn new(s: impl Into<String>) -> Self {
        Loc(s.into())
    }
}

impl Reg {
    pub fn new(s: impl Into<String>) -> Self {
        Reg(s.into())
    }

    pub fn is_register_name(s: &str) -> bool {
        s.len() > 1 && s.starts_with('r') && s[1..].bytes().all(|b| b.is_ascii_digit())
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum C11Op {
    Load {
        reg: Reg,
        loc: Loc,
        order: MemoryOrder,
    },
    Store {
        loc: Loc,
        value: Value,
        order: MemoryOrder,
    },
}

impl C11Op {
    pub fn order(&self) -> MemoryOrder {
        match self {
            C11Op::Load { order, .. } | C11Op::Store { order, .. } => *order,
        }
    }

    pub fn set_order(&mut self, new: MemoryOrder) {
        match self {
            C11Op::Load { order, .. } | C11Op::Store { order, .. } => *order = new,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IsaOp {
    Ld { reg: Reg, loc: Loc },
    St { loc: Loc, value: Value },
    Fence(FenceKind),
}

/// Level-independent view of an operation, used to build events.
#[derive(Clone, Copy, Debug)]
pub enum OpShape<'a> {
    Load { reg: &'a Reg, loc: &'a Loc },
    Store { loc: &'a Loc, value: Value },
    Fence(FenceKind),
}

/// Ordering annotation an event carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(untagged)]
pub enum Annotation {
    Order(MemoryOrder),
    Fence(FenceKind),
    Plain,
}

pub trait LitmusOp: Clone + fmt::Debug + PartialEq + Send + Sync {
    const LEVEL: Level;
    fn shape(&self) -> OpShape<'_>;
    fn annotation(&self) -> Annotation;
}

impl LitmusOp for C11Op {
    const LEVEL: Level = Level::C11;

    fn shape(&self) -> OpShape<'_> {
        match self {
            C11Op::Load { reg, loc, .. } => OpShape::Load { reg, loc },
            C11Op::Store { loc, value, .. } => OpShape::Store { loc, value: *value },
        }
    }

    fn annotation(&self) -> Annotation {
        Annotation::Order(self.order())
    }
}

impl LitmusOp for IsaOp {
    const LEVEL: Level = Level::Isa;

    fn shape(&self) -> OpShape<'_> {
        match self {
            IsaOp::Ld { reg, loc } => OpShape::Load { reg, loc },
            IsaOp::St { loc, value } => OpShape::Store { loc, value: *value },
            IsaOp::Fence(k) => OpShape::Fence(*k),
        }
    }

    fn annotation(&self) -> Annotation {
        match self {
            IsaOp::Fence(k) => Annotation::Fence(*k),
            _ => Annotation::Plain,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    C11,
    Isa,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Thread<O> {
    pub id: u32,
    pub ops: Vec<O>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutcomeTerm {
    Reg(Reg, Value),
    Loc(Loc, Value),
}

impl fmt::Display for OutcomeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeTerm::Reg(r, v) => write!(f, "{r}={v}"),
            OutcomeTerm::Loc(l, v) => write!(f, "{l}={v}"),
        }
    }
}

/// Conjunction of register and final-memory equalities.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Outcome {
    pub terms: Vec<OutcomeTerm>,
}

impl Outcome {
    pub fn new(terms: Vec<OutcomeTerm>) -> Self {
        Outcome { terms }
    }

    /// Evaluates the predicate against final register and memory values.
    pub fn holds(&self, regs: &BTreeMap<Reg, Value>, memory: &BTreeMap<Loc, Value>) -> bool {
        self.terms.iter().all(|t| match t {
            OutcomeTerm::Reg(r, v) => regs.get(r) == Some(v),
            OutcomeTerm::Loc(l, v) => memory.get(l) == Some(v),
        })
    }

    /// The same outcome with one conjunct removed.
    pub fn without(&self, index: usize) -> Outcome {
        let mut terms = self.terms.clone();
        terms.remove(index);
        Outcome { terms }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" /\\ ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Allowed,
    Forbidden,
}

impl Expectation {
    pub fn from_allowed(allowed: bool) -> Self {
        if allowed {
            Expectation::Allowed
        } else {
            Expectation::Forbidden
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Expectation::Allowed => "allowed",
            Expectation::Forbidden => "forbidden",
        }
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LitmusTest<O> {
    pub name: String,
    /// Target architecture hint; present exactly for ISA tests.
    pub arch: Option<Arch>,
    pub init: BTreeMap<Loc, Value>,
    pub threads: Vec<Thread<O>>,
    pub outcome: Outcome,
    /// Expected verdict of the outcome under this test's own model.
    pub expectation: Option<Expectation>,
    /// Expected verdicts under other models, keyed by model name
    /// (for C11 tests: the compiled form under the named mapping).
    pub expect: BTreeMap<String, Expectation>,
}

pub type C11Test = LitmusTest<C11Op>;
pub type IsaTest = LitmusTest<IsaOp>;

/// A parsed test of either level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnyTest {
    C11(C11Test),
    Isa(IsaTest),
}

impl AnyTest {
    pub fn name(&self) -> &str {
        match self {
            AnyTest::C11(t) => &t.name,
            AnyTest::Isa(t) => &t.name,
        }
    }

    pub fn level(&self) -> Level {
        match self {
            AnyTest::C11(_) => Level::C11,
            AnyTest::Isa(_) => Level::Isa,
        }
    }

    pub fn as_c11(&self) -> Option<&C11Test> {
        match self {
            AnyTest::C11(t) => Some(t),
            AnyTest::Isa(_) => None,
        }
    }

    pub fn as_isa(&self) -> Option<&IsaTest> {
        match self {
            AnyTest::Isa(t) => Some(t),
            AnyTest::C11(_) => None,
        }
    }
}

impl fmt::Display for AnyTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnyTest::C11(t) => t.fmt(f),
            AnyTest::Isa(t) => t.fmt(f),
        }
    }
}

/// Position of a construct inside a test, used to attach source positions
/// to validation errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Site {
    Header,
    Op { thread: usize, index: usize },
    Outcome { term: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LitmusError {
    #[error("no threads")]
    NoThreads,
    #[error("duplicate thread id {0}")]
    DuplicateThread(u32),
    #[error("duplicate register `{0}`")]
    DuplicateRegister(Reg),
    #[error("store value collision: `{loc}` is written with {value} more than once (or equals its initial value)")]
    ValueCollision { loc: Loc, value: Value },
    #[error("outcome references unknown register `{0}`")]
    UnknownRegister(Reg),
    #[error("outcome references uninitialized location `{0}`")]
    UninitializedLocation(Loc),
    #[error("outcome is empty")]
    EmptyOutcome,
    #[error("memory order {order} is not valid for a {kind}")]
    InvalidOrder {
        kind: &'static str,
        order: MemoryOrder,
    },
    #[error("{0} must immediately follow a load")]
    MisplacedControlFence(FenceKind),
    #[error("ISA test has no architecture")]
    MissingArch,
    #[error("C11 test cannot carry an architecture")]
    UnexpectedArch,
}

impl<O: LitmusOp> LitmusTest<O> {
    pub fn level(&self) -> Level {
        O::LEVEL
    }

    /// Every location touched by the program or named in `init`.
    pub fn locations(&self) -> BTreeSet<Loc> {
        let mut locs: BTreeSet<Loc> = self.init.keys().cloned().collect();
        for t in &self.threads {
            for op in &t.ops {
                match op.shape() {
                    OpShape::Load { loc, .. } | OpShape::Store { loc, .. } => {
                        locs.insert(loc.clone());
                    }
                    OpShape::Fence(_) => {}
                }
            }
        }
        locs
    }

    pub fn registers(&self) -> Vec<Reg> {
        self.threads
            .iter()
            .flat_map(|t| t.ops.iter())
            .filter_map(|op| match op.shape() {
                OpShape::Load { reg, .. } => Some(reg.clone()),
                _ => None,
            })
            .collect()
    }

    /// Initial value of `loc`; absent entries default to zero.
    pub fn init_value(&self, loc: &Loc) -> Value {
        self.init.get(loc).copied().unwrap_or(0)
    }

    /// Gives every program location an explicit initial value.
    pub fn fill_default_init(&mut self) {
        for loc in self.locations() {
            self.init.entry(loc).or_insert(0);
        }
    }

    /// Checks the structural invariants every test must satisfy.
    pub fn validate(&self) -> Result<(), (Site, LitmusError)> {
        match (O::LEVEL, self.arch) {
            (Level::Isa, None) => return Err((Site::Header, LitmusError::MissingArch)),
            (Level::C11, Some(_)) => return Err((Site::Header, LitmusError::UnexpectedArch)),
            _ => {}
        }
        if self.threads.is_empty() {
            return Err((Site::Header, LitmusError::NoThreads));
        }
        let mut ids = BTreeSet::new();
        for t in &self.threads {
            if !ids.insert(t.id) {
                return Err((Site::Header, LitmusError::DuplicateThread(t.id)));
            }
        }

        let mut regs = BTreeSet::new();
        let mut written: BTreeMap<&Loc, BTreeSet<Value>> = BTreeMap::new();
        for (ti, t) in self.threads.iter().enumerate() {
            let mut prev_is_load = false;
            for (oi, op) in t.ops.iter().enumerate() {
                let site = Site::Op {
                    thread: ti,
                    index: oi,
                };
                match op.shape() {
                    OpShape::Load { reg, .. } => {
                        if !regs.insert(reg.clone()) {
                            return Err((site, LitmusError::DuplicateRegister(reg.clone())));
                        }
                    }
                    OpShape::Store { loc, value } => {
                        let seen = written
                            .entry(loc)
                            .or_insert_with(|| BTreeSet::from([self.init_value(loc)]));
                        if !seen.insert(value) {
                            return Err((
                                site,
                                LitmusError::ValueCollision {
                                    loc: loc.clone(),
                                    value,
                                },
                            ));
                        }
                    }
                    OpShape::Fence(k) => {
                        if k.is_control() && !prev_is_load {
                            return Err((site, LitmusError::MisplacedControlFence(k)));
                        }
                    }
                }
                if let Annotation::Order(order) = op.annotation() {
                    let (kind, ok) = match op.shape() {
                        OpShape::Load { .. } => ("load", order.valid_for_load()),
                        _ => ("store", order.valid_for_store()),
                    };
                    if !ok {
                        return Err((site, LitmusError::InvalidOrder { kind, order }));
                    }
                }
                prev_is_load = matches!(op.shape(), OpShape::Load { .. });
            }
        }

        if self.outcome.terms.is_empty() {
            return Err((Site::Outcome { term: 0 }, LitmusError::EmptyOutcome));
        }
        let locs = self.locations();
        for (i, term) in self.outcome.terms.iter().enumerate() {
            let site = Site::Outcome { term: i };
            match term {
                OutcomeTerm::Reg(r, _) if !regs.contains(r) => {
                    return Err((site, LitmusError::UnknownRegister(r.clone())))
                }
                OutcomeTerm::Loc(l, _) if !locs.contains(l) => {
                    return Err((site, LitmusError::UninitializedLocation(l.clone())))
                }
                _ => {}
            }
        }
        Ok(())
    }
}
