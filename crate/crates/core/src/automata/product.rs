use std::collections::BTreeMap;
use std::sync::Arc;

use super::{DistAutomaton, Init, Move, StateId, SymbolId, TransitionRule};
use crate::budget::Budget;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductMode {
    Union,
    Intersection,
}

/// A decoded product state: both component states and, per component, whether
/// it has visited an accepting state so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProductState {
    pub left: StateId,
    pub right: StateId,
    pub left_accepted: bool,
    pub right_accepted: bool,
}

impl ProductState {
    pub fn encode(self, right_count: usize) -> StateId {
        let base = self.left.index() * right_count + self.right.index();
        StateId::from(base * 4 + (self.left_accepted as usize) * 2 + self.right_accepted as usize)
    }

    pub fn decode(id: StateId, right_count: usize) -> Self {
        let i = id.index();
        let base = i / 4;
        ProductState {
            left: StateId::from(base / right_count),
            right: StateId::from(base % right_count),
            left_accepted: i & 2 != 0,
            right_accepted: i & 1 != 0,
        }
    }
}

/// Synchronous product. Each component reads the projection of the neighbor
/// state sets onto its own states. Acceptance ("visits an accepting state at
/// some point") is tracked by flags that only ever switch on, which keeps the
/// product quasi-acyclic when both components are.
#[derive(Debug)]
pub struct ProductRule {
    left: DistAutomaton,
    right: DistAutomaton,
    /// Right-hand symbol for each left-hand symbol.
    right_symbol: Vec<SymbolId>,
    mode: ProductMode,
}

impl ProductRule {
    pub fn left(&self) -> &DistAutomaton {
        &self.left
    }

    pub fn right(&self) -> &DistAutomaton {
        &self.right
    }

    pub fn decode(&self, q: StateId) -> ProductState {
        ProductState::decode(q, self.right.state_count())
    }

    fn encode(&self, s: ProductState) -> StateId {
        s.encode(self.right.state_count())
    }

    fn entering(&self, left: StateId, right: StateId, prev: Option<ProductState>) -> ProductState {
        let (la, ra) = prev.map_or((false, false), |p| (p.left_accepted, p.right_accepted));
        ProductState {
            left,
            right,
            left_accepted: la || self.left.is_accepting(left),
            right_accepted: ra || self.right.is_accepting(right),
        }
    }
}

impl TransitionRule for ProductRule {
    fn state_count(&self) -> usize {
        self.left.state_count() * self.right.state_count() * 4
    }

    fn state_name(&self, q: StateId) -> String {
        let s = self.decode(q);
        format!(
            "({},{}|{}{})",
            self.left.state_name(s.left),
            self.right.state_name(s.right),
            s.left_accepted as u8,
            s.right_accepted as u8
        )
    }

    fn is_accepting(&self, q: StateId) -> bool {
        let s = self.decode(q);
        match self.mode {
            ProductMode::Union => s.left_accepted || s.right_accepted,
            ProductMode::Intersection => s.left_accepted && s.right_accepted,
        }
    }

    fn next(&self, label: SymbolId, current: StateId, neighbors: &[Vec<StateId>]) -> StateId {
        let s = self.decode(current);
        let project = |f: fn(&ProductState) -> StateId| -> Vec<Vec<StateId>> {
            neighbors
                .iter()
                .map(|set| {
                    let mut v: Vec<StateId> = set.iter().map(|&q| f(&self.decode(q))).collect();
                    v.sort_unstable();
                    v.dedup();
                    v
                })
                .collect()
        };
        let left = self.left.next(label, s.left, &project(|p| p.left));
        let right = self
            .right
            .next(self.right_symbol[label.index()], s.right, &project(|p| p.right));
        self.encode(self.entering(left, right, Some(s)))
    }

    fn moves(&self, current: StateId) -> Option<Vec<Move>> {
        // Any pair of component neighbor tuples with the same emptiness pattern is
        // realized by some product tuple, so joining on (label, pattern) is exact
        // whenever the component move lists are.
        let budget = Budget::default();
        let s = self.decode(current);
        let right_moves = self.right.moves(s.right, &budget).ok()?;
        let mut by_key: BTreeMap<(SymbolId, u32), Vec<StateId>> = BTreeMap::new();
        for m in right_moves {
            by_key.entry((m.label, m.nonempty)).or_default().push(m.target);
        }
        let mut out = Vec::new();
        for m in self.left.moves(s.left, &budget).ok()? {
            let key = (self.right_symbol[m.label.index()], m.nonempty);
            if let Some(targets) = by_key.get(&key) {
                for &t in targets {
                    out.push(Move {
                        label: m.label,
                        nonempty: m.nonempty,
                        target: self.encode(self.entering(m.target, t, Some(s))),
                    });
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        Some(out)
    }
}

/// Product automaton accepting the union or intersection of the two languages.
pub fn product(a1: &DistAutomaton, a2: &DistAutomaton, mode: ProductMode) -> Result<DistAutomaton> {
    if a1.relation_count() != a2.relation_count() {
        return Err(Error::Incompatible(format!(
            "relation counts differ: {} vs {}",
            a1.relation_count(),
            a2.relation_count()
        )));
    }
    let mut left_sorted = a1.alphabet().to_vec();
    let mut right_sorted = a2.alphabet().to_vec();
    left_sorted.sort();
    right_sorted.sort();
    if left_sorted != right_sorted {
        return Err(Error::Incompatible("alphabets differ".into()));
    }
    let count = (a1.state_count() as u128) * (a2.state_count() as u128) * 4;
    if count > u32::MAX as u128 {
        return Err(Error::BudgetExceeded {
            what: "product state space",
            needed: count,
            limit: u32::MAX as u128,
        });
    }
    let right_symbol = a1
        .alphabet()
        .iter()
        .map(|s| a2.symbol(s).expect("alphabets agree"))
        .collect();
    let rule = ProductRule {
        left: a1.clone(),
        right: a2.clone(),
        right_symbol,
        mode,
    };
    let init = match (a1.init(), a2.init()) {
        (Init::State(p), Init::State(q)) => Init::State(rule.encode(rule.entering(*p, *q, None))),
        _ => Init::Map(
            a1.symbols()
                .map(|sym| {
                    let p = a1.initial_state(sym);
                    let q = a2.initial_state(rule.right_symbol[sym.index()]);
                    rule.encode(rule.entering(p, q, None))
                })
                .collect(),
        ),
    };
    DistAutomaton::from_rule(
        a1.alphabet().to_vec(),
        a1.relation_count(),
        init,
        Arc::new(rule),
    )
}
