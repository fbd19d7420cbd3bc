//! Random small automata for property tests, oracles and benchmarks.

use std::collections::HashMap;

use rand::Rng;

use crate::automata::{DistAutomaton, Init, StateId, SymbolId};
use crate::classical::WordAutomaton;
use crate::error::Result;

/// Shape of a generated automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub symbols: usize,
    pub relations: usize,
    pub states: usize,
}

impl Shape {
    pub fn new(symbols: usize, relations: usize, states: usize) -> Self {
        Shape {
            symbols,
            relations,
            states,
        }
    }

    fn alphabet(&self) -> Vec<String> {
        (0..self.symbols)
            .map(|i| char::from(b'a' + i as u8).to_string())
            .collect()
    }

    fn state_names(&self) -> Vec<String> {
        (0..self.states).map(|i| format!("q{i}")).collect()
    }
}

fn random_accepting<R: Rng>(rng: &mut R, candidates: impl Iterator<Item = usize>) -> Vec<StateId> {
    candidates
        .filter(|_| rng.gen_bool(0.4))
        .map(StateId::from)
        .collect()
}

/// Initial state `q0` everywhere, or a random state per label.
fn random_init<R: Rng>(rng: &mut R, shape: Shape, per_label: bool) -> Init {
    if per_label {
        Init::Map(
            (0..shape.symbols)
                .map(|_| StateId::from(rng.gen_range(0..shape.states)))
                .collect(),
        )
    } else {
        Init::State(StateId(0))
    }
}

/// Uniformly random transition table.
pub fn random_automaton<R: Rng>(rng: &mut R, shape: Shape, per_label_init: bool) -> Result<DistAutomaton> {
    let init = random_init(rng, shape, per_label_init);
    let accepting = random_accepting(rng, 0..shape.states);
    let n = shape.states;
    DistAutomaton::from_fn(
        shape.alphabet(),
        shape.relations,
        shape.state_names(),
        init,
        &accepting,
        |_, _, _| StateId::from(rng.gen_range(0..n)),
    )
}

/// Random automaton whose next state depends only on the label and the neighbor sets.
pub fn random_forgetful<R: Rng>(rng: &mut R, shape: Shape) -> Result<DistAutomaton> {
    let accepting = random_accepting(rng, 0..shape.states);
    let n = shape.states;
    let mut chosen: HashMap<(SymbolId, Vec<Vec<StateId>>), StateId> = HashMap::new();
    DistAutomaton::from_fn(
        shape.alphabet(),
        shape.relations,
        shape.state_names(),
        Init::State(StateId(0)),
        &accepting,
        |label, _, sets| {
            *chosen
                .entry((label, sets.to_vec()))
                .or_insert_with(|| StateId::from(rng.gen_range(0..n)))
        },
    )
}

/// Random automaton whose transitions never decrease the state index, so its
/// only diagram cycles are self-loops.
pub fn random_quasi_acyclic<R: Rng>(rng: &mut R, shape: Shape) -> Result<DistAutomaton> {
    let init = random_init(rng, shape, true);
    let accepting = random_accepting(rng, 0..shape.states);
    let n = shape.states;
    DistAutomaton::from_fn(
        shape.alphabet(),
        shape.relations,
        shape.state_names(),
        init,
        &accepting,
        |_, q, _| StateId::from(rng.gen_range(q.index()..n)),
    )
}

/// Random 1-relational automaton with a rejecting sink (the last state) that is
/// entered whenever a node sees more than one state or the sink itself.
pub fn random_monovisioned<R: Rng>(rng: &mut R, symbols: usize, states: usize) -> Result<DistAutomaton> {
    let shape = Shape::new(symbols, 1, states.max(2));
    let sink = StateId::from(shape.states - 1);
    let init = random_init(rng, shape, true);
    let accepting = random_accepting(rng, 0..shape.states - 1);
    let n = shape.states;
    DistAutomaton::from_fn(
        shape.alphabet(),
        1,
        shape.state_names(),
        init,
        &accepting,
        |_, q, sets| {
            let seen = &sets[0];
            if q == sink || seen.len() > 1 || seen.contains(&sink) {
                sink
            } else {
                StateId::from(rng.gen_range(0..n))
            }
        },
    )
}

/// Random complete DFA with states `0..states` and initial state `0`.
pub fn random_word_automaton<R: Rng>(rng: &mut R, symbols: usize, states: usize) -> Result<WordAutomaton> {
    let shape = Shape::new(symbols, 1, states);
    let accepting: Vec<usize> = (0..states).filter(|_| rng.gen_bool(0.4)).collect();
    WordAutomaton::from_fn(shape.alphabet(), shape.state_names(), 0, &accepting, |_, _| {
        rng.gen_range(0..states)
    })
}
