//! Checks whether compiler mappings from C/C++11 atomics to Power and ARMv7
//! preserve the outcomes C11 forbids.
//!
//! A [`C11Test`] is checked against the C11 model ([`c11::c11_allows`]),
//! compiled under a [`MappingTable`] ([`mapping::compile`]) and the result is
//! checked against the hardware model ([`hw::hw_allows`]). A mapping bug is
//! an outcome C11 forbids but the compiled program allows
//! ([`harness::compare`]).

pub mod c11;
pub mod corpus;
pub mod events;
pub mod exec;
pub mod harness;
pub mod hw;
pub mod litmus;
pub mod mapping;
pub mod relation;

pub use events::{build_events, Event, EventGraph, EventKind};
pub use exec::{compute_fr, enumerate_executions, filter_outcome, Execution};
pub use litmus::{
    parse_litmus, AnyTest, Arch, C11Op, C11Test, Expectation, FenceKind, IsaOp, IsaTest, LitmusOp,
    LitmusTest, Loc, MemoryOrder, OpShape, Outcome, OutcomeTerm, Reg, Value,
};
pub use mapping::{compile, mapping_catalog, MappingTable};
pub use relation::{EventId, Relation};
