//! Deterministic distributed automata.
//!
//! An automaton has a finite state universe `0..state_count`, an alphabet, a
//! relation count `r`, an initial state (or one per label), a transition that maps
//! `(label, own state, r-tuple of neighbor state sets)` to a state, and an
//! accepting set. Transitions are either tabulated ([`TransitionTable`]) or
//! computed by a pure [`TransitionRule`]; the latter is how the reduction
//! compilers describe state spaces far too large to tabulate.

mod analysis;
mod monovision;
mod product;
mod space;
mod table;

use std::fmt;
use std::sync::Arc;

pub use analysis::{
    is_forgetful, is_monovisioned, is_quasi_acyclic, state_diagram, DiagramScope, StateDiagram,
};
pub use monovision::monovisionize;
pub use product::{product, ProductMode, ProductRule, ProductState};
pub use space::StateSpace;
pub use table::{make_table_automaton, InitNames, TableEntry, TransitionTable};

use crate::budget::Budget;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for StateId {
    fn from(i: usize) -> Self {
        StateId(u32::try_from(i).expect("state index fits in u32"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// How nodes are initialized: one state everywhere, or a state chosen by the node label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Init {
    State(StateId),
    /// Indexed by [`SymbolId`].
    Map(Vec<StateId>),
}

/// One outgoing edge of the state diagram together with the label and the set of
/// relations whose neighbor sets were nonempty (bit `k` for relation `k`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Move {
    pub label: SymbolId,
    pub nonempty: u32,
    pub target: StateId,
}

/// A transition computed on demand. Implementations must be pure: the same
/// arguments always produce the same state.
pub trait TransitionRule: Send + Sync + fmt::Debug {
    fn state_count(&self) -> usize;

    fn state_name(&self, q: StateId) -> String;

    fn is_accepting(&self, q: StateId) -> bool;

    /// `neighbors[k]` is the sorted, duplicate-free set of states of the incoming
    /// `k`-neighbors.
    fn next(&self, label: SymbolId, current: StateId, neighbors: &[Vec<StateId>]) -> StateId;

    /// Moves out of `current` over the whole transition domain, possibly
    /// over-approximated. `None` asks the caller to enumerate the domain.
    fn moves(&self, _current: StateId) -> Option<Vec<Move>> {
        None
    }
}

#[derive(Debug, Clone)]
pub enum Backing {
    Table(Arc<TransitionTable>),
    Rule(Arc<dyn TransitionRule>),
}

#[derive(Debug, Clone)]
pub struct DistAutomaton {
    alphabet: Arc<[String]>,
    relation_count: usize,
    init: Init,
    backing: Backing,
}

impl DistAutomaton {
    pub(crate) fn assemble(
        alphabet: Vec<String>,
        relation_count: usize,
        init: Init,
        backing: Backing,
    ) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::InvalidAutomaton("alphabet is empty".into()));
        }
        let mut sorted = alphabet.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != alphabet.len() {
            return Err(Error::InvalidAutomaton("alphabet has duplicate symbols".into()));
        }
        if relation_count == 0 || relation_count > 32 {
            return Err(Error::InvalidAutomaton(format!(
                "relation count {relation_count} outside 1..=32"
            )));
        }
        let a = DistAutomaton {
            alphabet: alphabet.into(),
            relation_count,
            init,
            backing,
        };
        let n = a.state_count();
        if n == 0 {
            return Err(Error::InvalidAutomaton("state set is empty".into()));
        }
        let inits: Vec<StateId> = match &a.init {
            Init::State(q) => vec![*q],
            Init::Map(m) => {
                if m.len() != a.alphabet.len() {
                    return Err(Error::InvalidAutomaton(format!(
                        "initialization map covers {} of {} symbols",
                        m.len(),
                        a.alphabet.len()
                    )));
                }
                m.clone()
            }
        };
        if let Some(q) = inits.iter().find(|q| q.index() >= n) {
            return Err(Error::InvalidAutomaton(format!(
                "initial state {} outside the state set",
                q.0
            )));
        }
        Ok(a)
    }

    /// Wraps a rule-backed transition.
    pub fn from_rule(
        alphabet: Vec<String>,
        relation_count: usize,
        init: Init,
        rule: Arc<dyn TransitionRule>,
    ) -> Result<Self> {
        Self::assemble(alphabet, relation_count, init, Backing::Rule(rule))
    }

    /// Tabulates `delta` over the full domain `Σ × Q × (2^Q)^r`.
    pub fn from_fn<F>(
        alphabet: Vec<String>,
        relation_count: usize,
        state_names: Vec<String>,
        init: Init,
        accepting: &[StateId],
        delta: F,
    ) -> Result<Self>
    where
        F: FnMut(SymbolId, StateId, &[Vec<StateId>]) -> StateId,
    {
        let table =
            TransitionTable::tabulate(alphabet.len(), relation_count, state_names, accepting, delta)?;
        Self::assemble(alphabet, relation_count, init, Backing::Table(Arc::new(table)))
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn symbol(&self, name: &str) -> Option<SymbolId> {
        self.alphabet
            .iter()
            .position(|s| s == name)
            .map(|i| SymbolId(i as u32))
    }

    pub fn symbols(&self) -> impl Iterator<Item = SymbolId> {
        (0..self.alphabet.len() as u32).map(SymbolId)
    }

    pub fn relation_count(&self) -> usize {
        self.relation_count
    }

    pub fn init(&self) -> &Init {
        &self.init
    }

    pub fn backing(&self) -> &Backing {
        &self.backing
    }

    pub fn is_table(&self) -> bool {
        matches!(self.backing, Backing::Table(_))
    }

    pub fn table(&self) -> Option<&TransitionTable> {
        match &self.backing {
            Backing::Table(t) => Some(t),
            Backing::Rule(_) => None,
        }
    }

    pub fn state_count(&self) -> usize {
        match &self.backing {
            Backing::Table(t) => t.state_count(),
            Backing::Rule(r) => r.state_count(),
        }
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.state_count()).map(StateId::from)
    }

    pub fn state_name(&self, q: StateId) -> String {
        match &self.backing {
            Backing::Table(t) => t.state_name(q).to_owned(),
            Backing::Rule(r) => r.state_name(q),
        }
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        match &self.backing {
            Backing::Table(t) => t.state_by_name(name),
            Backing::Rule(_) => self.states().find(|&q| self.state_name(q) == name),
        }
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        match &self.backing {
            Backing::Table(t) => t.is_accepting(q),
            Backing::Rule(r) => r.is_accepting(q),
        }
    }

    pub fn accepting_states(&self) -> Vec<StateId> {
        self.states().filter(|&q| self.is_accepting(q)).collect()
    }

    pub fn initial_state(&self, label: SymbolId) -> StateId {
        match &self.init {
            Init::State(q) => *q,
            Init::Map(m) => m[label.index()],
        }
    }

    /// Distinct initial states, in symbol order.
    pub fn initial_states(&self) -> Vec<StateId> {
        let mut v: Vec<StateId> = match &self.init {
            Init::State(q) => vec![*q],
            Init::Map(m) => m.clone(),
        };
        v.sort();
        v.dedup();
        v
    }

    pub fn next(&self, label: SymbolId, current: StateId, neighbors: &[Vec<StateId>]) -> StateId {
        debug_assert_eq!(neighbors.len(), self.relation_count);
        match &self.backing {
            Backing::Table(t) => t.lookup(label, current, neighbors),
            Backing::Rule(r) => r.next(label, current, neighbors),
        }
    }

    /// Size of the full transition domain `|Σ|·|Q|·2^(|Q|·r)`, saturating.
    pub fn domain_size(&self) -> u128 {
        let bits = self.state_count() as u128 * self.relation_count as u128;
        let subsets = if bits >= 100 { u128::MAX } else { 1u128 << bits };
        (self.alphabet.len() as u128)
            .saturating_mul(self.state_count() as u128)
            .saturating_mul(subsets)
    }

    pub(crate) fn check_domain(&self, budget: &Budget, what: &'static str) -> Result<()> {
        let needed = self.domain_size();
        if needed > budget.max_domain {
            return Err(Error::BudgetExceeded {
                what,
                needed,
                limit: budget.max_domain,
            });
        }
        Ok(())
    }

    /// Calls `f` for every neighbor tuple in `(2^Q)^r`. Callers check the budget first.
    pub(crate) fn for_each_neighbor_tuple(&self, mut f: impl FnMut(u32, &[Vec<StateId>])) {
        let n = self.state_count();
        let r = self.relation_count;
        let mut masks = vec![0u64; r];
        let mut sets = vec![Vec::new(); r];
        let limit = 1u64 << n;
        loop {
            let mut nonempty = 0u32;
            for k in 0..r {
                sets[k] = mask_states(masks[k]);
                if masks[k] != 0 {
                    nonempty |= 1 << k;
                }
            }
            f(nonempty, &sets);
            let mut k = 0;
            loop {
                if k == r {
                    return;
                }
                masks[k] += 1;
                if masks[k] < limit {
                    break;
                }
                masks[k] = 0;
                k += 1;
            }
        }
    }

    /// Moves out of `q`. Exact for tables; rules may supply their own
    /// (over-approximating) enumeration, otherwise the domain is enumerated.
    pub fn moves(&self, q: StateId, budget: &Budget) -> Result<Vec<Move>> {
        if let Backing::Rule(rule) = &self.backing {
            if let Some(moves) = rule.moves(q) {
                return Ok(moves);
            }
        }
        self.check_domain(budget, "transition domain enumeration")?;
        let mut out = Vec::new();
        for label in self.symbols() {
            self.for_each_neighbor_tuple(|nonempty, sets| {
                out.push(Move {
                    label,
                    nonempty,
                    target: self.next(label, q, sets),
                });
            });
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Names of the states in `set`, for diagnostics.
    pub fn describe_set(&self, set: &[StateId]) -> String {
        let names: Vec<String> = set.iter().map(|&q| self.state_name(q)).collect();
        format!("{{{}}}", names.join(","))
    }
}

/// States whose bits are set in `mask`, ascending.
pub(crate) fn mask_states(mut mask: u64) -> Vec<StateId> {
    let mut v = Vec::with_capacity(mask.count_ones() as usize);
    while mask != 0 {
        let i = mask.trailing_zeros();
        v.push(StateId(i));
        mask &= mask - 1;
    }
    v
}

pub(crate) fn states_mask(set: &[StateId]) -> u64 {
    set.iter().fold(0u64, |m, q| m | (1u64 << q.0))
}
