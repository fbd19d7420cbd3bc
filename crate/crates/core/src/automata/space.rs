use std::collections::HashMap;
use std::hash::Hash;

use super::StateId;

/// A finite universe of structured states with dense ids, fixed at construction.
#[derive(Debug, Clone)]
pub struct StateSpace<S> {
    states: Vec<S>,
    ids: HashMap<S, StateId>,
}

impl<S: Clone + Eq + Hash> StateSpace<S> {
    /// Interns `states` in iteration order; repeated elements keep their first id.
    pub fn new(states: impl IntoIterator<Item = S>) -> Self {
        let mut space = StateSpace {
            states: Vec::new(),
            ids: HashMap::new(),
        };
        for s in states {
            if !space.ids.contains_key(&s) {
                space.ids.insert(s.clone(), StateId::from(space.states.len()));
                space.states.push(s);
            }
        }
        space
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Id of a state of the universe.
    ///
    /// # Panics
    /// If `s` is not part of the universe; rule implementations only produce
    /// states they declared.
    pub fn id(&self, s: &S) -> StateId {
        match self.ids.get(s) {
            Some(&id) => id,
            None => panic!("state outside the declared universe"),
        }
    }

    pub fn get(&self, id: StateId) -> &S {
        &self.states[id.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, &S)> {
        self.states
            .iter()
            .enumerate()
            .map(|(i, s)| (StateId::from(i), s))
    }
}
