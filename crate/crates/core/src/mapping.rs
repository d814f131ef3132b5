//! Compiler mappings from C11 atomics to Power/ARMv7 instruction sequences.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::litmus::{
    Arch, C11Op, C11Test, FenceKind, IsaOp, IsaTest, LitmusTest, MemoryOrder, Thread,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AccessKind {
    Load,
    Store,
}

impl AccessKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AccessKind::Load => "load",
            AccessKind::Store => "store",
        }
    }

    fn instruction(self) -> &'static str {
        match self {
            AccessKind::Load => "ld",
            AccessKind::Store => "st",
        }
    }
}

/// One slot of an expansion: the access itself or an inserted fence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Template {
    Access,
    Fence(FenceKind),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("mapping `{mapping}` has no rule for {kind} {order}")]
    Unmapped {
        mapping: String,
        kind: &'static str,
        order: MemoryOrder,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("rule for {kind} {order} must contain the access exactly once")]
    BadTemplate {
        kind: &'static str,
        order: MemoryOrder,
    },
    #[error("rule for {kind} {order}: {fence} must directly follow the load")]
    MisplacedControlFence {
        kind: &'static str,
        order: MemoryOrder,
        fence: FenceKind,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MappingTable {
    /// Identifier used on the command line, e.g. `trailing-sync-power`.
    pub name: String,
    pub arch: Arch,
    pub rules: BTreeMap<(AccessKind, MemoryOrder), Vec<Template>>,
}

fn fence(k: FenceKind) -> Template {
    Template::Fence(k)
}

impl MappingTable {
    pub fn new(name: impl Into<String>, arch: Arch) -> Self {
        MappingTable {
            name: name.into(),
            arch,
            rules: BTreeMap::new(),
        }
    }

    /// Adds a rule after checking the template shape.
    pub fn with_rule(
        mut self,
        kind: AccessKind,
        order: MemoryOrder,
        template: Vec<Template>,
    ) -> Result<Self, MappingError> {
        check_template(kind, order, &template)?;
        self.rules.insert((kind, order), template);
        Ok(self)
    }

    fn rule(mut self, kind: AccessKind, order: MemoryOrder, template: &[Template]) -> Self {
        check_template(kind, order, template).expect("built-in mapping rule");
        self.rules.insert((kind, order), template.to_vec());
        self
    }

    pub fn template(&self, kind: AccessKind, order: MemoryOrder) -> Option<&[Template]> {
        self.rules.get(&(kind, order)).map(Vec::as_slice)
    }

    /// Rules whose expansion differs between two tables.
    pub fn differing_rules(&self, other: &MappingTable) -> Vec<(AccessKind, MemoryOrder)> {
        let keys: std::collections::BTreeSet<_> = self
            .rules
            .keys()
            .chain(other.rules.keys())
            .copied()
            .collect();
        keys.into_iter()
            .filter(|k| self.rules.get(k) != other.rules.get(k))
            .collect()
    }
}

fn check_template(
    kind: AccessKind,
    order: MemoryOrder,
    template: &[Template],
) -> Result<(), MappingError> {
    let kind_str = kind.as_str();
    if template.iter().filter(|t| **t == Template::Access).count() != 1 {
        return Err(MappingError::BadTemplate {
            kind: kind_str,
            order,
        });
    }
    for (i, t) in template.iter().enumerate() {
        if let Template::Fence(k) = t {
            let after_load =
                kind == AccessKind::Load && i > 0 && template[i - 1] == Template::Access;
            if k.is_control() && !after_load {
                return Err(MappingError::MisplacedControlFence {
                    kind: kind_str,
                    order,
                    fence: *k,
                });
            }
        }
    }
    Ok(())
}

fn base_table(name: &str, arch: Arch) -> MappingTable {
    use AccessKind::*;
    use MemoryOrder::*;
    MappingTable::new(name, arch)
        .rule(Load, Relaxed, &[Template::Access])
        .rule(Store, Relaxed, &[Template::Access])
}

/// The five built-in mappings.
pub fn mapping_catalog() -> Vec<MappingTable> {
    use AccessKind::*;
    use FenceKind::*;
    use MemoryOrder::*;
    use Template::Access;

    let leading_power = base_table("leading-sync-power", Arch::Power)
        .rule(Load, Acquire, &[Access, fence(CtrlIsync)])
        .rule(Load, SeqCst, &[fence(Sync), Access, fence(CtrlIsync)])
        .rule(Store, Release, &[fence(Lwsync), Access])
        .rule(Store, SeqCst, &[fence(Sync), Access]);
    let leading_armv7 = base_table("leading-sync-armv7", Arch::Armv7)
        .rule(Load, Acquire, &[Access, fence(CtrlIsb)])
        .rule(Load, SeqCst, &[fence(DmbIsh), Access, fence(CtrlIsb)])
        .rule(Store, Release, &[fence(DmbIsh), Access])
        .rule(Store, SeqCst, &[fence(DmbIsh), Access]);
    let trailing_power = base_table("trailing-sync-power", Arch::Power)
        .rule(Load, Acquire, &[Access, fence(CtrlIsync)])
        .rule(Load, SeqCst, &[Access, fence(Sync)])
        .rule(Store, Release, &[fence(Lwsync), Access])
        .rule(Store, SeqCst, &[fence(Lwsync), Access, fence(Sync)]);
    let trailing_armv7 = base_table("trailing-sync-armv7", Arch::Armv7)
        .rule(Load, Acquire, &[Access, fence(CtrlIsb)])
        .rule(Load, SeqCst, &[Access, fence(DmbIsh)])
        .rule(Store, Release, &[fence(DmbIsh), Access])
        .rule(Store, SeqCst, &[fence(DmbIsh), Access, fence(DmbIsh)]);
    let mut gcc_armv7 = trailing_armv7.clone();
    gcc_armv7.name = "gcc-armv7".into();
    let gcc_armv7 = gcc_armv7.rule(Load, Acquire, &[Access, fence(DmbIsh)]);

    vec![
        leading_power,
        leading_armv7,
        trailing_power,
        trailing_armv7,
        gcc_armv7,
    ]
}

/// Looks a built-in mapping up by name.
pub fn builtin_mapping(name: &str) -> Option<MappingTable> {
    mapping_catalog().into_iter().find(|m| m.name == name)
}

/// Compiles a C11 test: each access is expanded in place according to its
/// (kind, order) rule; registers, values and the outcome carry over.
pub fn compile(test: &C11Test, table: &MappingTable) -> Result<IsaTest, MappingError> {
    let mut threads = Vec::with_capacity(test.threads.len());
    for t in &test.threads {
        let mut ops = Vec::new();
        for op in &t.ops {
            let (kind, order) = match op {
                C11Op::Load { order, .. } => (AccessKind::Load, *order),
                C11Op::Store { order, .. } => (AccessKind::Store, *order),
            };
            let template = table
                .template(kind, order)
                .ok_or_else(|| MappingError::Unmapped {
                    mapping: table.name.clone(),
                    kind: kind.as_str(),
                    order,
                })?;
            for slot in template {
                ops.push(match (slot, op) {
                    (Template::Fence(k), _) => IsaOp::Fence(*k),
                    (Template::Access, C11Op::Load { reg, loc, .. }) => IsaOp::Ld {
                        reg: reg.clone(),
                        loc: loc.clone(),
                    },
                    (Template::Access, C11Op::Store { loc, value, .. }) => IsaOp::St {
                        loc: loc.clone(),
                        value: *value,
                    },
                });
            }
        }
        threads.push(Thread { id: t.id, ops });
    }
    Ok(LitmusTest {
        name: format!("{}+{}", test.name, table.name),
        arch: Some(table.arch),
        init: test.init.clone(),
        threads,
        outcome: test.outcome.clone(),
        expectation: test.expect.get(&table.name).copied(),
        expect: BTreeMap::new(),
    })
}

impl fmt::Display for MappingTable {
    /// Text form accepted by [`parse_mapping`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mapping {} arch {}", self.name, self.arch)?;
        for ((kind, order), template) in &self.rules {
            let ops: Vec<&str> = template
                .iter()
                .map(|t| match t {
                    Template::Access => kind.instruction(),
                    Template::Fence(k) => k.as_str(),
                })
                .collect();
            writeln!(f, "map {} {} -> {}", kind.as_str(), order, ops.join("; "))?;
        }
        Ok(())
    }
}

/// Parses a mapping file:
///
/// ```text
/// mapping my-mapping arch power
/// map load acquire -> ld; ctrlisync
/// map store seq_cst -> sync; st
/// ```
pub fn parse_mapping(text: &str) -> Result<MappingTable, MappingError> {
    let mut table: Option<MappingTable> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| MappingError::Syntax {
            line: i + 1,
            message,
        };
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.first().copied() {
            Some("mapping") => {
                if table.is_some() {
                    return Err(err("duplicate `mapping` header".into()));
                }
                let [_, name, "arch", arch] = words.as_slice() else {
                    return Err(err("expected `mapping <name> arch <power|armv7>`".into()));
                };
                let arch: Arch = arch.parse().map_err(err)?;
                table = Some(MappingTable::new(*name, arch));
            }
            Some("map") => {
                let t = table
                    .take()
                    .ok_or_else(|| err("`map` before `mapping` header".into()))?;
                let (lhs, rhs) = line
                    .split_once("->")
                    .ok_or_else(|| err("expected `map <kind> <order> -> <ops>`".into()))?;
                let lhs: Vec<&str> = lhs.split_whitespace().collect();
                let [_, kind, order] = lhs.as_slice() else {
                    return Err(err("expected `map <kind> <order> -> <ops>`".into()));
                };
                let kind = match *kind {
                    "load" => AccessKind::Load,
                    "store" => AccessKind::Store,
                    other => return Err(err(format!("unknown access kind `{other}`"))),
                };
                let order: MemoryOrder = order.parse().map_err(err)?;
                let mut template = Vec::new();
                for op in rhs.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                    if op == kind.instruction() {
                        template.push(Template::Access);
                    } else {
                        template.push(Template::Fence(op.parse().map_err(err)?));
                    }
                }
                if t.rules.contains_key(&(kind, order)) {
                    return Err(err(format!("duplicate rule for {} {order}", kind.as_str())));
                }
                table = Some(t.with_rule(kind, order, template)?);
            }
            Some(other) => return Err(err(format!("unexpected `{other}`"))),
            None => {}
        }
    }
    table.ok_or(MappingError::Syntax {
        line: 1,
        message: "missing `mapping` header".into(),
    })
}
