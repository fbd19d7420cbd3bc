//! Synchronous execution of a distributed automaton on a finite digraph.

use std::collections::HashMap;

use serde_json::json;

use crate::automata::{Backing, DistAutomaton, StateId, SymbolId};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graphs::{Digraph, PointedDigraph};

/// Global state of a run: one automaton state per node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub round: usize,
    pub states: Vec<StateId>,
}

impl Configuration {
    pub fn state(&self, v: usize) -> StateId {
        self.states[v]
    }
}

/// An automaton bound to a graph, with node labels resolved to symbols.
#[derive(Debug, Clone)]
pub struct Runner<'a> {
    automaton: &'a DistAutomaton,
    graph: &'a Digraph,
    symbols: Vec<SymbolId>,
}

impl<'a> Runner<'a> {
    pub fn new(automaton: &'a DistAutomaton, graph: &'a Digraph) -> Result<Self> {
        if automaton.relation_count() != graph.relation_count() {
            return Err(Error::Incompatible(format!(
                "automaton is {}-relational, graph is {}-relational",
                automaton.relation_count(),
                graph.relation_count()
            )));
        }
        let symbols = graph
            .labels()
            .iter()
            .enumerate()
            .map(|(v, l)| {
                automaton.symbol(l).ok_or_else(|| {
                    Error::Incompatible(format!("node {v} has label {l:?} outside the alphabet"))
                })
            })
            .collect::<Result<_>>()?;
        Ok(Runner {
            automaton,
            graph,
            symbols,
        })
    }

    pub fn automaton(&self) -> &DistAutomaton {
        self.automaton
    }

    pub fn graph(&self) -> &Digraph {
        self.graph
    }

    pub fn initial(&self) -> Configuration {
        Configuration {
            round: 0,
            states: self
                .symbols
                .iter()
                .map(|&s| self.automaton.initial_state(s))
                .collect(),
        }
    }

    pub fn step(&self, c: &Configuration) -> Configuration {
        let g = self.graph;
        let r = g.relation_count();
        let states = match self.automaton.backing() {
            Backing::Table(t) => {
                let mut masks = vec![0u64; r];
                (0..g.node_count())
                    .map(|v| {
                        for (k, m) in masks.iter_mut().enumerate() {
                            *m = g.incoming(k, v).iter().fold(0, |m, &u| m | 1 << c.states[u].0);
                        }
                        t.lookup_masks(self.symbols[v], c.states[v], &masks)
                    })
                    .collect()
            }
            Backing::Rule(_) => {
                let mut sets: Vec<Vec<StateId>> = vec![Vec::new(); r];
                (0..g.node_count())
                    .map(|v| {
                        for (k, set) in sets.iter_mut().enumerate() {
                            set.clear();
                            set.extend(g.incoming(k, v).iter().map(|&u| c.states[u]));
                            set.sort_unstable();
                            set.dedup();
                        }
                        self.automaton.next(self.symbols[v], c.states[v], &sets)
                    })
                    .collect()
            }
        };
        Configuration {
            round: c.round + 1,
            states,
        }
    }

    /// Iterator over `ρ₀, ρ₁, …` (unbounded).
    pub fn configurations(&self) -> impl Iterator<Item = Configuration> + '_ {
        std::iter::successors(Some(self.initial()), move |c| Some(self.step(c)))
    }
}

pub fn initial_configuration(a: &DistAutomaton, g: &Digraph) -> Result<Configuration> {
    Ok(Runner::new(a, g)?.initial())
}

/// One synchronous round. `c` must come from a run of `a` on `g`.
pub fn step(a: &DistAutomaton, g: &Digraph, c: &Configuration) -> Result<Configuration> {
    if c.states.len() != g.node_count() {
        return Err(Error::Incompatible(format!(
            "configuration has {} entries for {} nodes",
            c.states.len(),
            g.node_count()
        )));
    }
    if let Some(q) = c.states.iter().find(|q| q.index() >= a.state_count()) {
        return Err(Error::Incompatible(format!("state {} outside the automaton", q.0)));
    }
    Ok(Runner::new(a, g)?.step(c))
}

/// The configurations `ρ₀..ρ_T` of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunTrace {
    pub point: usize,
    pub configurations: Vec<Configuration>,
}

impl RunTrace {
    /// First round in which the point is in an accepting state.
    pub fn accepted_at(&self, a: &DistAutomaton) -> Option<usize> {
        self.configurations
            .iter()
            .position(|c| a.is_accepting(c.states[self.point]))
    }

    pub fn point_states(&self) -> Vec<StateId> {
        self.configurations.iter().map(|c| c.states[self.point]).collect()
    }

    /// One line per round, node state names separated by tabs.
    pub fn to_tsv(&self, a: &DistAutomaton) -> String {
        let mut out = String::new();
        for c in &self.configurations {
            let names: Vec<String> = c.states.iter().map(|&q| a.state_name(q)).collect();
            out.push_str(&names.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, a: &DistAutomaton) -> serde_json::Value {
        let rounds: Vec<Vec<String>> = self
            .configurations
            .iter()
            .map(|c| c.states.iter().map(|&q| a.state_name(q)).collect())
            .collect();
        json!({ "rounds": rounds, "accepted_at": self.accepted_at(a) })
    }
}

pub fn trace(a: &DistAutomaton, pg: &PointedDigraph, rounds: usize) -> Result<RunTrace> {
    let runner = Runner::new(a, pg.graph())?;
    Ok(RunTrace {
        point: pg.point(),
        configurations: runner.configurations().take(rounds + 1).collect(),
    })
}

/// Whether the point visits an accepting state in some round `0..=rounds`.
pub fn accepts_within(a: &DistAutomaton, pg: &PointedDigraph, rounds: usize) -> Result<bool> {
    let runner = Runner::new(a, pg.graph())?;
    let accepted = runner
        .configurations()
        .take(rounds + 1)
        .any(|c| a.is_accepting(c.states[pg.point()]));
    Ok(accepted)
}

/// States of the point in rounds `0..=rounds`.
pub fn visited_state_sequence(
    a: &DistAutomaton,
    pg: &PointedDigraph,
    rounds: usize,
) -> Result<Vec<StateId>> {
    let runner = Runner::new(a, pg.graph())?;
    let states = runner
        .configurations()
        .take(rounds + 1)
        .map(|c| c.states[pg.point()])
        .collect();
    Ok(states)
}

/// Proof of an acceptance verdict on a fixed graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    /// The point is accepting in this round (the first such round).
    Accepted { round: usize },
    /// `ρ_{start+length} = ρ_start` and the point is rejecting in every round before.
    Rejected { cycle_start: usize, cycle_length: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub accepted: bool,
    pub certificate: Certificate,
}

/// The lasso `ρ₀ … ρ_{p+l-1}` of a run, with preperiod `p` and period `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    pub configurations: Vec<Configuration>,
    pub preperiod: usize,
    pub period: usize,
}

impl Lasso {
    /// Configuration of round `t`, for any `t`.
    pub fn at(&self, t: usize) -> &Configuration {
        let i = if t < self.preperiod {
            t
        } else {
            self.preperiod + (t - self.preperiod) % self.period
        };
        &self.configurations[i]
    }
}

fn exceeded(a: &DistAutomaton, g: &Digraph, budget: &Budget) -> Error {
    let q = a.state_count() as u128;
    let needed = (0..g.node_count()).fold(1u128, |acc, _| acc.saturating_mul(q));
    Error::BudgetExceeded {
        what: "rounds until the run repeats",
        needed,
        limit: budget.max_rounds as u128,
    }
}

/// Runs until a global configuration repeats.
pub fn run_until_periodic(a: &DistAutomaton, g: &Digraph, budget: &Budget) -> Result<Lasso> {
    let runner = Runner::new(a, g)?;
    let mut seen: HashMap<Vec<StateId>, usize> = HashMap::new();
    let mut configurations = Vec::new();
    for c in runner.configurations() {
        if let Some(&start) = seen.get(&c.states) {
            return Ok(Lasso {
                period: c.round - start,
                preperiod: start,
                configurations,
            });
        }
        if c.round >= budget.max_rounds {
            return Err(exceeded(a, g, budget));
        }
        seen.insert(c.states.clone(), c.round);
        configurations.push(c);
    }
    unreachable!("the run is infinite")
}

/// Exact acceptance on a finite graph by cycle detection on global configurations.
pub fn decide_acceptance(a: &DistAutomaton, pg: &PointedDigraph, budget: &Budget) -> Result<Decision> {
    let runner = Runner::new(a, pg.graph())?;
    let mut seen: HashMap<Vec<StateId>, usize> = HashMap::new();
    for c in runner.configurations() {
        if a.is_accepting(c.states[pg.point()]) {
            return Ok(Decision {
                accepted: true,
                certificate: Certificate::Accepted { round: c.round },
            });
        }
        if let Some(&start) = seen.get(&c.states) {
            return Ok(Decision {
                accepted: false,
                certificate: Certificate::Rejected {
                    cycle_start: start,
                    cycle_length: c.round - start,
                },
            });
        }
        if c.round >= budget.max_rounds {
            return Err(exceeded(a, pg.graph(), budget));
        }
        seen.insert(c.states, c.round);
    }
    unreachable!("the run is infinite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::Init;
    use crate::graphs::dipath_of_word;

    /// Waits in `o` until the predecessor is active; a node without predecessor
    /// activates in round 1.
    fn wave() -> DistAutomaton {
        DistAutomaton::from_fn(
            vec!["a".into()],
            1,
            vec!["o".into(), "on".into()],
            Init::State(StateId(0)),
            &[StateId(1)],
            |_, q, n| {
                if q.0 == 1 || n[0].is_empty() || n[0].contains(&StateId(1)) {
                    StateId(1)
                } else {
                    q
                }
            },
        )
        .unwrap()
    }

    #[test]
    fn waiting_pattern_on_a_dipath() {
        let pg = dipath_of_word(&["a"; 4]).unwrap();
        let t = trace(&wave(), &pg, 4).unwrap();
        let on: Vec<Vec<u32>> = t
            .configurations
            .iter()
            .map(|c| c.states.iter().map(|q| q.0).collect())
            .collect();
        assert_eq!(on[0], vec![0, 0, 0, 0]);
        assert_eq!(on[1], vec![1, 0, 0, 0]);
        assert_eq!(on[2], vec![1, 1, 0, 0]);
        assert_eq!(on[4], vec![1, 1, 1, 1]);
        assert_eq!(t.accepted_at(&wave()), Some(4));
        assert!(!accepts_within(&wave(), &pg, 3).unwrap());
        assert!(accepts_within(&wave(), &pg, 4).unwrap());
    }

    #[test]
    fn initialization_map_and_label_errors() {
        let a = DistAutomaton::from_fn(
            vec!["a".into(), "b".into()],
            1,
            vec!["x".into(), "y".into()],
            Init::Map(vec![StateId(0), StateId(1)]),
            &[],
            |_, q, _| q,
        )
        .unwrap();
        let pg = dipath_of_word(&["a", "b"]).unwrap();
        let c = initial_configuration(&a, pg.graph()).unwrap();
        assert_eq!(c.states, vec![StateId(0), StateId(1)]);
        let bad = dipath_of_word(&["c"]).unwrap();
        assert!(matches!(initial_configuration(&a, bad.graph()), Err(Error::Incompatible(_))));
        let two = Digraph::new(2, vec![], vec!["a"]).unwrap();
        assert!(initial_configuration(&a, &two).is_err());
    }

    #[test]
    fn neighbor_sets_not_multisets() {
        // Counts distinct neighbor states: 1 → accept.
        let a = DistAutomaton::from_fn(
            vec!["a".into()],
            1,
            vec!["s".into(), "one".into(), "many".into()],
            Init::State(StateId(0)),
            &[StateId(1)],
            |_, q, n| match n[0].len() {
                0 => q,
                1 => StateId(1),
                _ => StateId(2),
            },
        )
        .unwrap();
        let g = Digraph::new(1, vec![vec![(0, 2), (1, 2)]], vec!["a"; 3]).unwrap();
        let pg = PointedDigraph::new(g, 2).unwrap();
        assert_eq!(visited_state_sequence(&a, &pg, 1).unwrap(), vec![StateId(0), StateId(1)]);
    }

    #[test]
    fn decisions_carry_certificates() {
        let b = Budget::default();
        let never = DistAutomaton::from_fn(
            vec!["a".into()],
            1,
            vec!["q".into()],
            Init::State(StateId(0)),
            &[],
            |_, q, _| q,
        )
        .unwrap();
        let pg = dipath_of_word(&["a"]).unwrap();
        let d = decide_acceptance(&never, &pg, &b).unwrap();
        assert_eq!(
            d.certificate,
            Certificate::Rejected {
                cycle_start: 0,
                cycle_length: 1
            }
        );
        let pg = dipath_of_word(&["a"; 3]).unwrap();
        let d = decide_acceptance(&wave(), &pg, &b).unwrap();
        assert_eq!(d.certificate, Certificate::Accepted { round: 3 });
        let lasso = run_until_periodic(&wave(), pg.graph(), &b).unwrap();
        assert_eq!((lasso.preperiod, lasso.period), (3, 1));
        assert_eq!(lasso.at(100).states, vec![StateId(1); 3]);
        assert!(decide_acceptance(&wave(), &pg, &Budget::with_rounds(1))
            .unwrap_err()
            .is_budget());
    }

    #[test]
    fn trace_output_formats() {
        let pg = dipath_of_word(&["a"; 2]).unwrap();
        let t = trace(&wave(), &pg, 2).unwrap();
        assert_eq!(t.to_tsv(&wave()), "o\to\non\to\non\ton\n");
        let j = t.to_json(&wave());
        assert_eq!(j["accepted_at"], 2);
        assert_eq!(j["rounds"][1][0], "on");
    }
}
