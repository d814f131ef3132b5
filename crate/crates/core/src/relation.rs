//! Finite binary relations over event ids.
//!
//! Every memory-model relation (sb, rf, mo, hb, ppo, prop, ...) is a
//! [`Relation`]. Pairs are kept in a `BTreeSet` so iteration order, and
//! therefore every report derived from it, is deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Dense index of an event inside one event graph.
pub type EventId = usize;

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Relation {
    pairs: BTreeSet<(EventId, EventId)>,
}

impl Relation {
    pub fn new() -> Self {
        Self::default()
    }

    /// `{ (e, e) : e ∈ domain }`.
    pub fn identity<I: IntoIterator<Item = EventId>>(domain: I) -> Self {
        domain.into_iter().map(|e| (e, e)).collect()
    }

    /// Cartesian product `from × to`.
    pub fn cross(from: &[EventId], to: &[EventId]) -> Self {
        from.iter()
            .flat_map(|&a| to.iter().map(move |&b| (a, b)))
            .collect()
    }

    /// The strict total order `chain[0] < chain[1] < ...`, transitively closed.
    pub fn total_order(chain: &[EventId]) -> Self {
        let mut r = Relation::new();
        for (i, &a) in chain.iter().enumerate() {
            for &b in &chain[i + 1..] {
                r.insert(a, b);
            }
        }
        r
    }

    pub fn insert(&mut self, a: EventId, b: EventId) -> bool {
        self.pairs.insert((a, b))
    }

    pub fn contains(&self, a: EventId, b: EventId) -> bool {
        self.pairs.contains(&(a, b))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (EventId, EventId)> + '_ {
        self.pairs.iter().copied()
    }

    /// Events appearing on either side of some pair.
    pub fn nodes(&self) -> BTreeSet<EventId> {
        self.pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
    }

    pub fn successors(&self, a: EventId) -> impl Iterator<Item = EventId> + '_ {
        self.pairs
            .range((a, EventId::MIN)..=(a, EventId::MAX))
            .map(|&(_, b)| b)
    }

    pub fn union(&self, other: &Relation) -> Relation {
        self.pairs.union(&other.pairs).copied().collect()
    }

    pub fn intersection(&self, other: &Relation) -> Relation {
        self.pairs.intersection(&other.pairs).copied().collect()
    }

    pub fn difference(&self, other: &Relation) -> Relation {
        self.pairs.difference(&other.pairs).copied().collect()
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.pairs.is_subset(&other.pairs)
    }

    pub fn inverse(&self) -> Relation {
        self.iter().map(|(a, b)| (b, a)).collect()
    }

    /// Relational composition `self ; other`.
    pub fn compose(&self, other: &Relation) -> Relation {
        let adj = other.adjacency();
        let mut out = Relation::new();
        for (a, b) in self.iter() {
            if let Some(cs) = adj.get(&b) {
                for &c in cs {
                    out.insert(a, c);
                }
            }
        }
        out
    }

    /// Composition of a sequence of relations, left to right.
    pub fn seq(parts: &[&Relation]) -> Relation {
        let mut it = parts.iter();
        let first = match it.next() {
            Some(r) => (*r).clone(),
            None => return Relation::new(),
        };
        it.fold(first, |acc, r| acc.compose(r))
    }

    /// Transitive closure `R⁺`.
    pub fn plus(&self) -> Relation {
        let adj = self.adjacency();
        let mut out = Relation::new();
        for &start in adj.keys() {
            let mut stack: Vec<EventId> = adj[&start].clone();
            let mut seen = BTreeSet::new();
            while let Some(n) = stack.pop() {
                if seen.insert(n) {
                    out.insert(start, n);
                    if let Some(next) = adj.get(&n) {
                        stack.extend(next.iter().copied());
                    }
                }
            }
        }
        out
    }

    /// Reflexive-transitive closure `R*` over the given universe.
    pub fn star<I: IntoIterator<Item = EventId>>(&self, universe: I) -> Relation {
        self.plus().union(&Relation::identity(universe))
    }

    /// Reflexive closure `R?` over the given universe.
    pub fn optional<I: IntoIterator<Item = EventId>>(&self, universe: I) -> Relation {
        self.union(&Relation::identity(universe))
    }

    /// Keep pairs whose both ends satisfy `keep`.
    pub fn restrict<F: Fn(EventId) -> bool>(&self, keep: F) -> Relation {
        self.iter().filter(|&(a, b)| keep(a) && keep(b)).collect()
    }

    /// Keep pairs `(a, b)` with `keep_from(a) && keep_to(b)`.
    pub fn restrict_ends<F, G>(&self, keep_from: F, keep_to: G) -> Relation
    where
        F: Fn(EventId) -> bool,
        G: Fn(EventId) -> bool,
    {
        self.iter()
            .filter(|&(a, b)| keep_from(a) && keep_to(b))
            .collect()
    }

    pub fn filter<F: Fn(EventId, EventId) -> bool>(&self, keep: F) -> Relation {
        self.iter().filter(|&(a, b)| keep(a, b)).collect()
    }

    pub fn is_irreflexive(&self) -> bool {
        self.iter().all(|(a, b)| a != b)
    }

    pub fn is_acyclic(&self) -> bool {
        self.plus().is_irreflexive()
    }

    pub fn is_transitive(&self) -> bool {
        self.compose(self).is_subset(self)
    }

    /// Some cycle `[e0, e1, ..., ek]` with `(ei, ei+1)` and `(ek, e0)` in the
    /// relation, or `None` if the relation is acyclic. The returned cycle is
    /// the lexicographically first one found by DFS, so it is deterministic.
    pub fn find_cycle(&self) -> Option<Vec<EventId>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Open,
            Done,
        }
        let adj = self.adjacency();
        let mut marks: BTreeMap<EventId, Mark> = BTreeMap::new();

        fn visit(
            n: EventId,
            adj: &BTreeMap<EventId, Vec<EventId>>,
            marks: &mut BTreeMap<EventId, Mark>,
            path: &mut Vec<EventId>,
        ) -> Option<Vec<EventId>> {
            marks.insert(n, Mark::Open);
            path.push(n);
            for &m in adj.get(&n).map(Vec::as_slice).unwrap_or(&[]) {
                match marks.get(&m) {
                    Some(Mark::Open) => {
                        let start = path.iter().position(|&p| p == m).unwrap();
                        return Some(path[start..].to_vec());
                    }
                    Some(Mark::Done) => {}
                    None => {
                        if let Some(c) = visit(m, adj, marks, path) {
                            return Some(c);
                        }
                    }
                }
            }
            path.pop();
            marks.insert(n, Mark::Done);
            None
        }

        for &n in adj.keys() {
            if !marks.contains_key(&n) {
                let mut path = Vec::new();
                if let Some(c) = visit(n, &adj, &mut marks, &mut path) {
                    return Some(c);
                }
            }
        }
        None
    }

    fn adjacency(&self) -> BTreeMap<EventId, Vec<EventId>> {
        let mut adj: BTreeMap<EventId, Vec<EventId>> = BTreeMap::new();
        for (a, b) in self.iter() {
            adj.entry(a).or_default().push(b);
        }
        adj
    }
}

impl FromIterator<(EventId, EventId)> for Relation {
    fn from_iter<T: IntoIterator<Item = (EventId, EventId)>>(iter: T) -> Self {
        Relation {
            pairs: iter.into_iter().collect(),
        }
    }
}

impl Extend<(EventId, EventId)> for Relation {
    fn extend<T: IntoIterator<Item = (EventId, EventId)>>(&mut self, iter: T) {
        self.pairs.extend(iter)
    }
}

impl<'a> IntoIterator for &'a Relation {
    type Item = (EventId, EventId);
    type IntoIter = std::iter::Copied<std::collections::btree_set::Iter<'a, (EventId, EventId)>>;

    fn into_iter(self) -> Self::IntoIter {
        self.pairs.iter().copied()
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.pairs.iter()).finish()
    }
}
