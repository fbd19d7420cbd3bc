use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::{mask_states, states_mask, Backing, DistAutomaton, Init, StateId, SymbolId};
use crate::error::{Error, Result};

/// Largest number of table cells we are willing to allocate.
const MAX_TABLE_CELLS: u128 = 1 << 26;

/// Fully enumerated transition function over `Σ × Q × (2^Q)^r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionTable {
    state_names: Vec<String>,
    by_name: HashMap<String, StateId>,
    accepting: Vec<bool>,
    symbol_count: usize,
    relation_count: usize,
    cells: Vec<StateId>,
}

impl TransitionTable {
    fn cell_count(symbols: usize, states: usize, relations: usize) -> Result<usize> {
        let bits = states as u128 * relations as u128;
        let cells = if bits >= 100 {
            u128::MAX
        } else {
            (symbols as u128) * (states as u128) * (1u128 << bits)
        };
        if states > 30 || cells > MAX_TABLE_CELLS {
            return Err(Error::BudgetExceeded {
                what: "transition table",
                needed: cells,
                limit: MAX_TABLE_CELLS,
            });
        }
        Ok(cells as usize)
    }

    fn index(&self, label: SymbolId, current: StateId, masks: impl Iterator<Item = u64>) -> usize {
        let n = self.state_names.len();
        let mut idx = label.index() * n + current.index();
        for m in masks {
            idx = (idx << n) | m as usize;
        }
        idx
    }

    pub(crate) fn tabulate<F>(
        symbol_count: usize,
        relation_count: usize,
        state_names: Vec<String>,
        accepting: &[StateId],
        mut delta: F,
    ) -> Result<Self>
    where
        F: FnMut(SymbolId, StateId, &[Vec<StateId>]) -> StateId,
    {
        let n = state_names.len();
        let cells = Self::cell_count(symbol_count, n, relation_count)?;
        let mut table = Self::skeleton(symbol_count, relation_count, state_names, accepting)?;
        table.cells = Vec::with_capacity(cells);
        let per_state = 1usize << (n * relation_count);
        let mut sets = vec![Vec::new(); relation_count];
        for label in 0..symbol_count as u32 {
            for q in 0..n {
                for combined in 0..per_state {
                    for (k, set) in sets.iter_mut().enumerate() {
                        let shift = n * (relation_count - 1 - k);
                        *set = mask_states(((combined >> shift) & ((1 << n) - 1)) as u64);
                    }
                    let target = delta(SymbolId(label), StateId::from(q), &sets);
                    if target.index() >= n {
                        return Err(Error::InvalidAutomaton(format!(
                            "transition target {} outside the state set",
                            target.0
                        )));
                    }
                    table.cells.push(target);
                }
            }
        }
        Ok(table)
    }

    fn skeleton(
        symbol_count: usize,
        relation_count: usize,
        state_names: Vec<String>,
        accepting: &[StateId],
    ) -> Result<Self> {
        let n = state_names.len();
        if n == 0 {
            return Err(Error::InvalidAutomaton("state set is empty".into()));
        }
        let mut by_name = HashMap::new();
        for (i, name) in state_names.iter().enumerate() {
            if by_name.insert(name.clone(), StateId::from(i)).is_some() {
                return Err(Error::InvalidAutomaton(format!("duplicate state {name:?}")));
            }
        }
        let mut acc = vec![false; n];
        for q in accepting {
            *acc.get_mut(q.index()).ok_or_else(|| {
                Error::InvalidAutomaton(format!("accepting state {} outside the state set", q.0))
            })? = true;
        }
        Ok(TransitionTable {
            state_names,
            by_name,
            accepting: acc,
            symbol_count,
            relation_count,
            cells: Vec::new(),
        })
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.state_names[q.index()]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.by_name.get(name).copied()
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q.index()]
    }

    pub fn lookup(&self, label: SymbolId, current: StateId, neighbors: &[Vec<StateId>]) -> StateId {
        let idx = self.index(label, current, neighbors.iter().map(|s| states_mask(s)));
        self.cells[idx]
    }

    /// Same as [`lookup`](Self::lookup) with neighbor sets given as bitmasks.
    pub fn lookup_masks(&self, label: SymbolId, current: StateId, masks: &[u64]) -> StateId {
        self.cells[self.index(label, current, masks.iter().copied())]
    }

    /// Every cell as `(label, state, neighbor sets, target)`.
    pub fn entries(&self) -> impl Iterator<Item = (SymbolId, StateId, Vec<Vec<StateId>>, StateId)> + '_ {
        let n = self.state_names.len();
        let r = self.relation_count;
        let per_state = 1usize << (n * r);
        self.cells.iter().enumerate().map(move |(i, &target)| {
            let combined = i % per_state;
            let q = (i / per_state) % n;
            let label = i / per_state / n;
            let sets = (0..r)
                .map(|k| {
                    let shift = n * (r - 1 - k);
                    mask_states(((combined >> shift) & ((1 << n) - 1)) as u64)
                })
                .collect();
            (SymbolId(label as u32), StateId::from(q), sets, target)
        })
    }
}

/// One explicitly listed transition, by names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableEntry {
    pub label: String,
    pub state: String,
    pub neighbors: Vec<Vec<String>>,
    pub next: String,
}

/// Initial state(s) by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitNames {
    State(String),
    Map(BTreeMap<String, String>),
}

/// Builds a table-backed automaton from explicitly listed transitions, which must
/// cover the whole domain `Σ × Q × (2^Q)^r` exactly once (repeats must agree).
pub fn make_table_automaton(
    states: Vec<String>,
    relation_count: usize,
    alphabet: Vec<String>,
    init: InitNames,
    entries: &[TableEntry],
    accepting: &[String],
) -> Result<DistAutomaton> {
    let lookup_state = |names: &HashMap<&str, StateId>, name: &str| {
        names
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidAutomaton(format!("unknown state {name:?}")))
    };
    let names: HashMap<&str, StateId> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), StateId::from(i)))
        .collect();
    let symbols: HashMap<&str, SymbolId> = alphabet
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), SymbolId(i as u32)))
        .collect();

    let accepting_ids = accepting
        .iter()
        .map(|s| lookup_state(&names, s))
        .collect::<Result<Vec<_>>>()?;
    let init = match init {
        InitNames::State(q) => Init::State(lookup_state(&names, &q)?),
        InitNames::Map(map) => {
            let mut v = Vec::with_capacity(alphabet.len());
            for sym in &alphabet {
                let q = map.get(sym).ok_or_else(|| {
                    Error::InvalidAutomaton(format!("no initial state for symbol {sym:?}"))
                })?;
                v.push(lookup_state(&names, q)?);
            }
            if let Some(extra) = map.keys().find(|k| !symbols.contains_key(k.as_str())) {
                return Err(Error::InvalidAutomaton(format!(
                    "initialization for unknown symbol {extra:?}"
                )));
            }
            Init::Map(v)
        }
    };

    let n = states.len();
    TransitionTable::cell_count(alphabet.len(), n, relation_count)?;
    let mut given: HashMap<(SymbolId, StateId, Vec<u64>), StateId> = HashMap::new();
    for e in entries {
        let label = *symbols
            .get(e.label.as_str())
            .ok_or_else(|| Error::InvalidAutomaton(format!("unknown symbol {:?}", e.label)))?;
        let state = lookup_state(&names, &e.state)?;
        if e.neighbors.len() != relation_count {
            return Err(Error::InvalidAutomaton(format!(
                "transition lists {} neighbor sets, expected {relation_count}",
                e.neighbors.len()
            )));
        }
        let masks = e
            .neighbors
            .iter()
            .map(|set| {
                set.iter()
                    .map(|s| lookup_state(&names, s).map(|q| 1u64 << q.0))
                    .try_fold(0u64, |m, b| b.map(|b| m | b))
            })
            .collect::<Result<Vec<u64>>>()?;
        let next = lookup_state(&names, &e.next)?;
        if let Some(prev) = given.insert((label, state, masks), next) {
            if prev != next {
                return Err(Error::InvalidAutomaton(format!(
                    "conflicting transitions for label {:?}, state {:?}",
                    e.label, e.state
                )));
            }
        }
    }

    let mut missing = None;
    let table = TransitionTable::tabulate(
        alphabet.len(),
        relation_count,
        states.clone(),
        &accepting_ids,
        |label, q, sets| {
            let key = (label, q, sets.iter().map(|s| states_mask(s)).collect::<Vec<_>>());
            match given.get(&key) {
                Some(&t) => t,
                None => {
                    if missing.is_none() {
                        missing = Some((label, q, sets.to_vec()));
                    }
                    q
                }
            }
        },
    )?;
    if let Some((label, q, sets)) = missing {
        let describe = |set: &Vec<StateId>| {
            let v: Vec<&str> = set.iter().map(|s| states[s.index()].as_str()).collect();
            format!("{{{}}}", v.join(","))
        };
        let nb: Vec<String> = sets.iter().map(describe).collect();
        return Err(Error::MissingTransition {
            label: alphabet[label.index()].clone(),
            state: states[q.index()].clone(),
            neighbors: format!("({})", nb.join(", ")),
        });
    }
    DistAutomaton::assemble(alphabet, relation_count, init, Backing::Table(Arc::new(table)))
}
