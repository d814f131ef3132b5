//! Events and program order.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::litmus::{
    Annotation, FenceKind, Level, LitmusOp, LitmusTest, Loc, MemoryOrder, OpShape, Reg, Value,
};
use crate::relation::{EventId, Relation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum EventKind {
    #[serde(rename = "R")]
    Read,
    #[serde(rename = "W")]
    Write,
    #[serde(rename = "F")]
    Fence,
}

impl EventKind {
    pub fn letter(self) -> char {
        match self {
            EventKind::Read => 'R',
            EventKind::Write => 'W',
            EventKind::Fence => 'F',
        }
    }
}

/// One dynamic memory access or fence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Event {
    pub id: EventId,
    /// Index of the owning thread in the test; `None` for initial writes.
    pub thread: Option<usize>,
    /// Position inside the thread (0 for initial writes).
    pub index: usize,
    pub kind: EventKind,
    pub loc: Option<Loc>,
    /// Written value; reads get their value from an execution.
    pub value: Option<Value>,
    pub reg: Option<Reg>,
    pub annotation: Annotation,
    pub is_init: bool,
}

impl Event {
    /// Short alphabetic name: `a`..`z`, then `aa`, `ab`, ...
    pub fn name(&self) -> String {
        event_name(self.id)
    }

    pub fn is_read(&self) -> bool {
        self.kind == EventKind::Read
    }

    pub fn is_write(&self) -> bool {
        self.kind == EventKind::Write
    }

    pub fn is_access(&self) -> bool {
        self.kind != EventKind::Fence
    }

    pub fn order(&self) -> Option<MemoryOrder> {
        match self.annotation {
            Annotation::Order(o) => Some(o),
            _ => None,
        }
    }

    pub fn fence(&self) -> Option<FenceKind> {
        match self.annotation {
            Annotation::Fence(k) => Some(k),
            _ => None,
        }
    }

    pub fn is_seq_cst(&self) -> bool {
        self.order() == Some(MemoryOrder::SeqCst)
    }
}

pub fn event_name(id: EventId) -> String {
    let mut n = id;
    let mut s = Vec::new();
    loop {
        s.push(b'a' + (n % 26) as u8);
        if n < 26 {
            break;
        }
        n = n / 26 - 1;
    }
    s.reverse();
    String::from_utf8(s).unwrap()
}

/// The static event structure of a test: events plus program order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventGraph {
    pub level: Level,
    pub events: Vec<Event>,
    /// Sequenced-before / program order, transitively closed. Initial
    /// writes are not in it.
    pub sb: Relation,
    /// Program events of each thread, in program order.
    pub threads: Vec<Vec<EventId>>,
    pub inits: BTreeMap<Loc, EventId>,
}

impl EventGraph {
    /// Builds events with dense deterministic ids: one initial write per
    /// location (sorted by name), then each thread's operations in order.
    pub fn build<O: LitmusOp>(test: &LitmusTest<O>) -> EventGraph {
        let init_annotation = match O::LEVEL {
            Level::C11 => Annotation::Order(MemoryOrder::Relaxed),
            Level::Isa => Annotation::Plain,
        };
        let mut events = Vec::new();
        let mut inits = BTreeMap::new();
        for loc in test.locations() {
            let id = events.len();
            inits.insert(loc.clone(), id);
            events.push(Event {
                id,
                thread: None,
                index: 0,
                kind: EventKind::Write,
                value: Some(test.init_value(&loc)),
                loc: Some(loc),
                reg: None,
                annotation: init_annotation,
                is_init: true,
            });
        }

        let mut sb = Relation::new();
        let mut threads = Vec::new();
        for (ti, t) in test.threads.iter().enumerate() {
            let mut ids = Vec::new();
            for (oi, op) in t.ops.iter().enumerate() {
                let id = events.len();
                let (kind, loc, value, reg) = match op.shape() {
                    OpShape::Load { reg, loc } => {
                        (EventKind::Read, Some(loc.clone()), None, Some(reg.clone()))
                    }
                    OpShape::Store { loc, value } => {
                        (EventKind::Write, Some(loc.clone()), Some(value), None)
                    }
                    OpShape::Fence(_) => (EventKind::Fence, None, None, None),
                };
                events.push(Event {
                    id,
                    thread: Some(ti),
                    index: oi,
                    kind,
                    loc,
                    value,
                    reg,
                    annotation: op.annotation(),
                    is_init: false,
                });
                ids.push(id);
            }
            sb.extend(Relation::total_order(&ids).iter());
            threads.push(ids);
        }
        EventGraph {
            level: O::LEVEL,
            events,
            sb,
            threads,
            inits,
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn ids(&self) -> std::ops::Range<EventId> {
        0..self.events.len()
    }

    pub fn event(&self, id: EventId) -> &Event {
        &self.events[id]
    }

    pub fn program_events(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| !e.is_init)
    }

    pub fn reads(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.is_read())
    }

    pub fn writes(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.is_write())
    }

    /// Writes to `loc`, initial write first.
    pub fn writes_to<'a>(&'a self, loc: &'a Loc) -> impl Iterator<Item = &'a Event> + 'a {
        self.writes().filter(move |e| e.loc.as_ref() == Some(loc))
    }

    pub fn same_thread(&self, a: EventId, b: EventId) -> bool {
        let (ta, tb) = (self.events[a].thread, self.events[b].thread);
        ta.is_some() && ta == tb
    }

    pub fn same_location(&self, a: EventId, b: EventId) -> bool {
        let (la, lb) = (&self.events[a].loc, &self.events[b].loc);
        la.is_some() && la == lb
    }
}

/// Builds the event list and the (transitively closed) sequenced-before
/// relation of a test.
pub fn build_events<O: LitmusOp>(test: &LitmusTest<O>) -> (Vec<Event>, Relation) {
    let g = EventGraph::build(test);
    (g.events, g.sb)
}
