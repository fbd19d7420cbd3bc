use std::collections::{BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;

use super::{Backing, DistAutomaton, StateId};
use crate::budget::Budget;
use crate::error::{Error, Result};

/// True iff the next state never depends on the current one.
///
/// Rule-backed automata are checked by exhaustive evaluation, which is refused
/// when `|Σ|·|Q|·2^(|Q|·r)` exceeds the budget.
pub fn is_forgetful(a: &DistAutomaton, budget: &Budget) -> Result<bool> {
    if a.state_count() == 1 {
        return Ok(true);
    }
    if !a.is_table() {
        a.check_domain(budget, "forgetfulness check")?;
    }
    let mut forgetful = true;
    for label in a.symbols() {
        a.for_each_neighbor_tuple(|_, sets| {
            if forgetful {
                let first = a.next(label, StateId(0), sets);
                forgetful = a.states().skip(1).all(|q| a.next(label, q, sets) == first);
            }
        });
        if !forgetful {
            break;
        }
    }
    Ok(forgetful)
}

/// Looks for a rejecting sink `q ∉ F` such that `δ(p, N) = q` whenever
/// `|N| > 1`, `q ∈ N` or `p = q`. Only defined for 1-relational automata.
pub fn is_monovisioned(a: &DistAutomaton, budget: &Budget) -> Result<Option<StateId>> {
    if a.relation_count() != 1 {
        return Err(Error::RelationCount {
            expected: 1,
            found: a.relation_count(),
        });
    }
    if !a.is_table() {
        a.check_domain(budget, "monovision check")?;
    }
    'candidate: for sink in a.states().filter(|&q| !a.is_accepting(q)) {
        for label in a.symbols() {
            let mut ok = true;
            a.for_each_neighbor_tuple(|_, sets| {
                if !ok {
                    return;
                }
                let n = &sets[0];
                let forced = n.len() > 1 || n.contains(&sink);
                for p in a.states() {
                    if (forced || p == sink) && a.next(label, p, sets) != sink {
                        ok = false;
                        return;
                    }
                }
            });
            if !ok {
                continue 'candidate;
            }
        }
        return Ok(Some(sink));
    }
    Ok(None)
}

/// Which states a state diagram ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagramScope {
    /// Every state of the declared universe.
    AllStates,
    /// States reachable from the initial states along diagram edges.
    Reachable,
}

impl DiagramScope {
    /// Whole universe when it fits `budget.max_diagram_states`, reachable part otherwise.
    pub fn for_automaton(a: &DistAutomaton, budget: &Budget) -> Self {
        if a.is_table() || a.state_count() <= budget.max_diagram_states {
            DiagramScope::AllStates
        } else {
            DiagramScope::Reachable
        }
    }
}

/// Directed graph on states with an edge `q → q'` whenever some label and
/// neighbor tuple send `q` to `q'`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDiagram {
    pub scope: DiagramScope,
    pub vertices: Vec<StateId>,
    pub edges: BTreeSet<(StateId, StateId)>,
}

impl StateDiagram {
    pub fn has_edge(&self, from: StateId, to: StateId) -> bool {
        self.edges.contains(&(from, to))
    }

    /// Strongly connected components with more than one state.
    pub fn nontrivial_components(&self) -> Vec<Vec<StateId>> {
        let mut g: DiGraphMap<u32, ()> = DiGraphMap::new();
        for v in &self.vertices {
            g.add_node(v.0);
        }
        for &(p, q) in &self.edges {
            g.add_edge(p.0, q.0, ());
        }
        tarjan_scc(&g)
            .into_iter()
            .filter(|c| c.len() > 1)
            .map(|c| {
                let mut c: Vec<StateId> = c.into_iter().map(StateId).collect();
                c.sort();
                c
            })
            .collect()
    }
}

pub fn state_diagram(a: &DistAutomaton, scope: DiagramScope, budget: &Budget) -> Result<StateDiagram> {
    let mut edges = BTreeSet::new();
    let vertices = match scope {
        DiagramScope::AllStates => {
            if a.state_count() > budget.max_explored_states {
                return Err(Error::BudgetExceeded {
                    what: "state diagram",
                    needed: a.state_count() as u128,
                    limit: budget.max_explored_states as u128,
                });
            }
            for q in a.states() {
                for m in a.moves(q, budget)? {
                    edges.insert((q, m.target));
                }
            }
            a.states().collect()
        }
        DiagramScope::Reachable => {
            let mut seen = vec![false; a.state_count()];
            let mut order = Vec::new();
            let mut queue: VecDeque<StateId> = a.initial_states().into();
            for q in &queue {
                seen[q.index()] = true;
            }
            while let Some(q) = queue.pop_front() {
                order.push(q);
                if order.len() > budget.max_explored_states {
                    return Err(Error::BudgetExceeded {
                        what: "reachable state diagram",
                        needed: order.len() as u128,
                        limit: budget.max_explored_states as u128,
                    });
                }
                for m in a.moves(q, budget)? {
                    edges.insert((q, m.target));
                    if !seen[m.target.index()] {
                        seen[m.target.index()] = true;
                        queue.push_back(m.target);
                    }
                }
            }
            order.sort();
            order
        }
    };
    Ok(StateDiagram {
        scope,
        vertices,
        edges,
    })
}

/// True iff the state diagram has no cycles other than self-loops.
pub fn is_quasi_acyclic(a: &DistAutomaton, budget: &Budget) -> Result<bool> {
    let scope = DiagramScope::for_automaton(a, budget);
    Ok(state_diagram(a, scope, budget)?.nontrivial_components().is_empty())
}

impl DistAutomaton {
    /// Short description of the backing for diagnostics.
    pub fn backing_kind(&self) -> &'static str {
        match self.backing() {
            Backing::Table(_) => "table",
            Backing::Rule(_) => "rule",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{monovisionize, Init};

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("q{i}")).collect()
    }

    fn constant(accept: bool) -> DistAutomaton {
        let acc = if accept { vec![StateId(0)] } else { vec![] };
        DistAutomaton::from_fn(
            vec!["a".into()],
            1,
            names(1),
            Init::State(StateId(0)),
            &acc,
            |_, q, _| q,
        )
        .unwrap()
    }

    fn swap() -> DistAutomaton {
        DistAutomaton::from_fn(
            vec!["a".into()],
            1,
            names(2),
            Init::State(StateId(0)),
            &[],
            |_, q, _| StateId(1 - q.0),
        )
        .unwrap()
    }

    #[test]
    fn forgetfulness() {
        let b = Budget::default();
        assert!(is_forgetful(&constant(true), &b).unwrap());
        // Copies its own state when nothing is seen.
        let copy = DistAutomaton::from_fn(
            vec!["a".into()],
            1,
            names(2),
            Init::State(StateId(0)),
            &[],
            |_, q, n| if n[0].is_empty() { q } else { StateId(0) },
        )
        .unwrap();
        assert!(!is_forgetful(&copy, &b).unwrap());
        let forget = DistAutomaton::from_fn(
            vec!["a".into()],
            2,
            names(3),
            Init::State(StateId(0)),
            &[],
            |_, _, n| StateId::from((n[0].len() + n[1].len()) % 3),
        )
        .unwrap();
        assert!(is_forgetful(&forget, &b).unwrap());
    }

    #[test]
    fn monovision_examples() {
        let b = Budget::default();
        assert_eq!(is_monovisioned(&constant(true), &b).unwrap(), None);
        let m = monovisionize(&swap()).unwrap();
        assert_eq!(is_monovisioned(&m, &b).unwrap(), Some(StateId(2)));
        // Seeing two distinct states does not force the sink.
        let lax = DistAutomaton::from_fn(
            vec!["a".into()],
            1,
            names(3),
            Init::State(StateId(0)),
            &[],
            |_, q, n| if n[0].len() > 1 { StateId(0) } else if n[0].contains(&StateId(2)) { StateId(2) } else { q },
        )
        .unwrap();
        assert_eq!(is_monovisioned(&lax, &b).unwrap(), None);

        let two = DistAutomaton::from_fn(
            vec!["a".into()],
            2,
            names(1),
            Init::State(StateId(0)),
            &[],
            |_, q, _| q,
        )
        .unwrap();
        assert!(matches!(
            is_monovisioned(&two, &b),
            Err(Error::RelationCount { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn diagrams_and_cycles() {
        let b = Budget::default();
        let d = state_diagram(&constant(true), DiagramScope::AllStates, &b).unwrap();
        assert_eq!(d.edges.iter().copied().collect::<Vec<_>>(), vec![(StateId(0), StateId(0))]);
        assert!(is_quasi_acyclic(&constant(false), &b).unwrap());

        let d = state_diagram(&swap(), DiagramScope::AllStates, &b).unwrap();
        assert!(d.has_edge(StateId(0), StateId(1)) && d.has_edge(StateId(1), StateId(0)));
        assert_eq!(d.nontrivial_components(), vec![vec![StateId(0), StateId(1)]]);
        assert!(!is_quasi_acyclic(&swap(), &b).unwrap());
    }

    #[test]
    fn unreachable_states_count_for_the_full_diagram() {
        // q1 ↔ q2 cycle is unreachable from q0.
        let a = DistAutomaton::from_fn(
            vec!["a".into()],
            1,
            names(3),
            Init::State(StateId(0)),
            &[],
            |_, q, _| match q.0 {
                0 => StateId(0),
                1 => StateId(2),
                _ => StateId(1),
            },
        )
        .unwrap();
        let b = Budget::default();
        assert!(!is_quasi_acyclic(&a, &b).unwrap());
        let reach = state_diagram(&a, DiagramScope::Reachable, &b).unwrap();
        assert_eq!(reach.vertices, vec![StateId(0)]);
        assert!(reach.nontrivial_components().is_empty());
    }

    #[test]
    fn adding_a_sink_keeps_quasi_acyclicity() {
        let b = Budget::default();
        for base in [constant(true), swap()] {
            let before = is_quasi_acyclic(&base, &b).unwrap();
            let n = base.state_count();
            let sink = StateId::from(n);
            let extended = DistAutomaton::from_fn(
                vec!["a".into()],
                1,
                names(n + 1),
                Init::State(StateId(0)),
                &[],
                |l, q, sets| {
                    if q == sink || sets[0].contains(&sink) {
                        sink
                    } else {
                        base.next(l, q, sets)
                    }
                },
            )
            .unwrap();
            assert_eq!(is_quasi_acyclic(&extended, &b).unwrap(), before);
        }
    }
}
