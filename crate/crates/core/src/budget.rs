/// Resource limits for the procedures whose cost is exponential in the
/// automaton or graph size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of synchronous rounds a run may be stepped.
    pub max_rounds: usize,
    /// Maximum number of `(label, state, neighbor tuple)` points evaluated when a
    /// predicate has to enumerate a transition domain exhaustively.
    pub max_domain: u128,
    /// Largest declared state universe for which structural analyses range over
    /// every state; bigger automata are analysed over their reachable states.
    pub max_diagram_states: usize,
    /// Maximum number of states explored by a reachable-state closure.
    pub max_explored_states: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_rounds: 1 << 20,
            max_domain: 1 << 24,
            max_diagram_states: 4096,
            max_explored_states: 1 << 20,
        }
    }
}

impl Budget {
    pub fn with_rounds(max_rounds: usize) -> Self {
        Budget {
            max_rounds,
            ..Budget::default()
        }
    }
}
