use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{c11_verdict, compare_checked, par_map, Comparison, HarnessError};
use crate::exec::cartesian;
use crate::litmus::{C11Op, C11Test, MemoryOrder};
use crate::mapping::MappingTable;

/// An access in a test: thread id (as written in the file) and the index of
/// the operation inside that thread.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Position {
    pub thread: usize,
    pub index: usize,
}

impl FromStr for Position {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (t, i) = s
            .split_once(':')
            .ok_or_else(|| format!("position `{s}` must be <thread>:<index>"))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| format!("position `{s}` must be <thread>:<index>"))
        };
        Ok(Position {
            thread: parse(t)?,
            index: parse(i)?,
        })
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.thread, self.index)
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub variant: C11Test,
    /// Order assigned at each swept position, in position order.
    pub orders: Vec<MemoryOrder>,
    /// One comparison per mapping, in mapping order.
    pub results: Vec<(String, Comparison)>,
}

fn short(order: MemoryOrder) -> &'static str {
    match order {
        MemoryOrder::Relaxed => "rlx",
        MemoryOrder::Acquire => "acq",
        MemoryOrder::Release => "rel",
        MemoryOrder::SeqCst => "sc",
    }
}

fn locate(test: &mut C11Test, p: Position) -> Option<&mut C11Op> {
    test.threads
        .iter_mut()
        .find(|t| t.id as usize == p.thread)
        .and_then(|t| t.ops.get_mut(p.index))
}

/// Runs every combination of `orders` over the chosen positions through
/// [`compare`](super::compare) for each mapping. Orders that are invalid for
/// an access (release loads, acquire stores) are skipped at that position.
/// Rows come back in the order of the Cartesian product, with the last
/// position varying fastest, regardless of `jobs`.
pub fn sweep(
    skeleton: &C11Test,
    positions: &[Position],
    orders: &[MemoryOrder],
    mappings: &[MappingTable],
    jobs: usize,
) -> Result<Vec<SweepRow>, HarnessError> {
    let mut choices = Vec::with_capacity(positions.len());
    for (i, &p) in positions.iter().enumerate() {
        if positions[..i].contains(&p) {
            return Err(HarnessError::DuplicatePosition {
                thread: p.thread,
                index: p.index,
            });
        }
        let mut probe = skeleton.clone();
        let op = locate(&mut probe, p).ok_or(HarnessError::InvalidPosition {
            thread: p.thread,
            index: p.index,
        })?;
        let valid: Vec<MemoryOrder> = orders
            .iter()
            .copied()
            .filter(|o| match op {
                C11Op::Load { .. } => o.valid_for_load(),
                C11Op::Store { .. } => o.valid_for_store(),
            })
            .collect();
        if valid.is_empty() {
            return Err(HarnessError::NoValidOrder {
                thread: p.thread,
                index: p.index,
            });
        }
        choices.push(valid);
    }

    let variants: Vec<(C11Test, Vec<MemoryOrder>)> = cartesian(&choices)
        .into_iter()
        .map(|assignment| {
            let mut v = skeleton.clone();
            for (&p, &o) in positions.iter().zip(&assignment) {
                locate(&mut v, p).expect("position checked").set_order(o);
            }
            let suffix: Vec<&str> = assignment.iter().map(|&o| short(o)).collect();
            if !suffix.is_empty() {
                v.name = format!("{}+{}", skeleton.name, suffix.join("+"));
            }
            v.expectation = None;
            v.expect.clear();
            (v, assignment)
        })
        .collect();

    let rows = par_map(&variants, jobs, |(variant, assignment)| {
        let checked = c11_verdict(variant);
        let results = mappings
            .iter()
            .map(|m| Ok((m.name.clone(), compare_checked(variant, &checked, m)?)))
            .collect::<Result<Vec<_>, HarnessError>>()?;
        Ok(SweepRow {
            variant: variant.clone(),
            orders: assignment.clone(),
            results,
        })
    })?;
    rows.into_iter().collect()
}
