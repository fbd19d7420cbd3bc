use std::sync::Arc;

use super::{Backing, DistAutomaton, Move, StateId, SymbolId, TransitionRule};
use crate::error::{Error, Result};

/// Adds a fresh rejecting sink entered whenever a node sees more than one
/// neighbor state, sees the sink, or is already in it. Elsewhere the original
/// transition is kept, so acceptance on dipaths is unchanged.
pub fn monovisionize(a: &DistAutomaton) -> Result<DistAutomaton> {
    if a.relation_count() != 1 {
        return Err(Error::RelationCount {
            expected: 1,
            found: a.relation_count(),
        });
    }
    let sink = StateId::from(a.state_count());
    let redirect = move |q: StateId, sets: &[Vec<StateId>]| {
        q == sink || sets[0].len() > 1 || sets[0].contains(&sink)
    };
    if let Backing::Table(t) = a.backing() {
        let mut names = t.state_names().to_vec();
        let mut sink_name = "rej".to_owned();
        while names.contains(&sink_name) {
            sink_name.push('\'');
        }
        names.push(sink_name);
        let widened = DistAutomaton::from_fn(
            a.alphabet().to_vec(),
            1,
            names,
            a.init().clone(),
            &a.accepting_states(),
            |label, q, sets| {
                if redirect(q, sets) {
                    sink
                } else {
                    a.next(label, q, sets)
                }
            },
        );
        if let Ok(widened) = widened {
            return Ok(widened);
        }
    }
    DistAutomaton::from_rule(
        a.alphabet().to_vec(),
        1,
        a.init().clone(),
        Arc::new(MonovisionRule { inner: a.clone() }),
    )
}

#[derive(Debug)]
struct MonovisionRule {
    inner: DistAutomaton,
}

impl MonovisionRule {
    fn sink(&self) -> StateId {
        StateId::from(self.inner.state_count())
    }
}

impl TransitionRule for MonovisionRule {
    fn state_count(&self) -> usize {
        self.inner.state_count() + 1
    }

    fn state_name(&self, q: StateId) -> String {
        if q == self.sink() {
            "rej".into()
        } else {
            self.inner.state_name(q)
        }
    }

    fn is_accepting(&self, q: StateId) -> bool {
        q != self.sink() && self.inner.is_accepting(q)
    }

    fn next(&self, label: SymbolId, current: StateId, neighbors: &[Vec<StateId>]) -> StateId {
        let sink = self.sink();
        if current == sink || neighbors[0].len() > 1 || neighbors[0].contains(&sink) {
            sink
        } else {
            self.inner.next(label, current, neighbors)
        }
    }

    fn moves(&self, current: StateId) -> Option<Vec<Move>> {
        let sink = self.sink();
        let to_sink = |label| Move {
            label,
            nonempty: 1,
            target: sink,
        };
        if current == sink {
            return Some(self.inner.symbols().map(to_sink).collect());
        }
        let budget = crate::budget::Budget::default();
        let mut moves = self.inner.moves(current, &budget).ok()?;
        moves.extend(self.inner.symbols().map(to_sink));
        moves.sort_unstable();
        moves.dedup();
        Some(moves)
    }
}
