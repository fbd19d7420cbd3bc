//! Emptiness for forgetful automata via the reachable-state-set generator,
//! witness construction, and brute-force searches used as oracles.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use crate::automata::{is_forgetful, Backing, DistAutomaton, StateId, SymbolId, TransitionTable};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graphs::{enumerate_dipaths, Digraph, DigraphSpace, PointedDigraph};
use crate::runtime::Runner;

fn ensure_forgetful(a: &DistAutomaton, budget: &Budget) -> Result<()> {
    if is_forgetful(a, budget)? {
        Ok(())
    } else {
        Err(Error::NotForgetful)
    }
}

/// Calls `f(σ, T⃗, δ_σ(T⃗))` for every label and every `T⃗ ∈ (2^s)^r`.
fn for_each_image(
    a: &DistAutomaton,
    s: &[StateId],
    budget: &Budget,
    mut f: impl FnMut(SymbolId, &[Vec<StateId>], StateId),
) -> Result<()> {
    let r = a.relation_count();
    let bits = s.len() as u128 * r as u128;
    let needed = if bits >= 100 {
        u128::MAX
    } else {
        (a.alphabet().len() as u128) << bits
    };
    if needed > budget.max_domain {
        return Err(Error::BudgetExceeded {
            what: "neighbor tuples drawn from a state set",
            needed,
            limit: budget.max_domain,
        });
    }
    let subsets: Vec<Vec<StateId>> = (0..1u64 << s.len())
        .map(|m| {
            s.iter()
                .enumerate()
                .filter(|(i, _)| m >> i & 1 == 1)
                .map(|(_, &q)| q)
                .collect()
        })
        .collect();
    let any = StateId(0);
    for label in a.symbols() {
        let mut digits = vec![0usize; r];
        let mut tuple: Vec<Vec<StateId>> = vec![Vec::new(); r];
        loop {
            for (k, &d) in digits.iter().enumerate() {
                tuple[k].clone_from(&subsets[d]);
            }
            f(label, &tuple, a.next(label, any, &tuple));
            let mut k = 0;
            loop {
                if k == r {
                    break;
                }
                digits[k] += 1;
                if digits[k] < subsets.len() {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
            if k == r {
                break;
            }
        }
    }
    Ok(())
}

fn image(a: &DistAutomaton, s: &[StateId], budget: &Budget) -> Result<Vec<StateId>> {
    let mut out = vec![false; a.state_count()];
    for_each_image(a, s, budget, |_, _, q| out[q.index()] = true)?;
    Ok(a.states().filter(|q| out[q.index()]).collect())
}

/// `Γ(s) = {δ_σ(T⃗) : σ ∈ Σ, T⃗ ∈ (2^s)^r}`, sorted.
pub fn gamma(a: &DistAutomaton, s: &[StateId], budget: &Budget) -> Result<Vec<StateId>> {
    ensure_forgetful(a, budget)?;
    let mut s = s.to_vec();
    s.sort_unstable();
    s.dedup();
    image(a, &s, budget)
}

/// The sequence `S₀, S₁, …` of states visitable at round `t`, up to its first repetition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachableSets {
    /// `S₀ .. S_{preperiod + period - 1}`, each sorted.
    pub sets: Vec<Vec<StateId>>,
    pub preperiod: usize,
    pub period: usize,
}

impl ReachableSets {
    pub fn at(&self, t: usize) -> &[StateId] {
        let i = if t < self.preperiod {
            t
        } else {
            self.preperiod + (t - self.preperiod) % self.period
        };
        &self.sets[i]
    }
}

pub fn reachable_sets(a: &DistAutomaton, budget: &Budget) -> Result<ReachableSets> {
    ensure_forgetful(a, budget)?;
    let mut seen: HashMap<Vec<StateId>, usize> = HashMap::new();
    let mut sets = Vec::new();
    let mut current = a.initial_states();
    loop {
        if let Some(&start) = seen.get(&current) {
            return Ok(ReachableSets {
                preperiod: start,
                period: sets.len() - start,
                sets,
            });
        }
        seen.insert(current.clone(), sets.len());
        let next = image(a, &current, budget)?;
        sets.push(current);
        current = next;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmptinessVerdict {
    pub nonempty: bool,
    /// First `t` with `S_t ∩ F ≠ ∅`.
    pub first_hit_round: Option<usize>,
    /// Least accepting state of `S_t` for that round.
    pub hit_state: Option<StateId>,
    /// Accepted at `first_hit_round`; absent when the witness would exceed the
    /// node budget.
    pub witness: Option<PointedDigraph>,
}

/// Decides whether a forgetful automaton accepts some pointed digraph.
pub fn forgetful_empty(a: &DistAutomaton, budget: &Budget) -> Result<EmptinessVerdict> {
    let sets = reachable_sets(a, budget)?;
    // S₀ is checked before any application of Γ.
    let hit = sets.sets.iter().enumerate().find_map(|(t, s)| {
        s.iter().find(|&&q| a.is_accepting(q)).map(|&q| (t, q))
    });
    let Some((t, q)) = hit else {
        return Ok(EmptinessVerdict {
            nonempty: false,
            first_hit_round: None,
            hit_state: None,
            witness: None,
        });
    };
    let witness = match forgetful_witness(a, t, q, budget) {
        Ok(w) => Some(w),
        Err(e) if e.is_budget() => None,
        Err(e) => return Err(e),
    };
    Ok(EmptinessVerdict {
        nonempty: true,
        first_hit_round: Some(t),
        hit_state: Some(q),
        witness,
    })
}

/// Recipe for a witness: a fresh node with copies of smaller witnesses attached.
#[derive(Debug)]
struct Recipe {
    label: SymbolId,
    /// Child witness and the relations (bit `k`) through which its point feeds the node.
    children: Vec<(Rc<Recipe>, u32)>,
    size: u128,
}

/// A pointed digraph whose point is in state `q` at round `t`.
///
/// Built round by round: every state of `S_t` keeps one witness, and a state of
/// `S_{t+1}` produced by `δ_σ(T⃗)` gets a fresh `σ`-node fed by disjoint copies of
/// the witnesses of the states in `T⃗`. Among all realizing `(σ, T⃗)` the one with
/// the fewest nodes is kept.
pub fn forgetful_witness(
    a: &DistAutomaton,
    t: usize,
    q: StateId,
    budget: &Budget,
) -> Result<PointedDigraph> {
    ensure_forgetful(a, budget)?;
    let mut layer: BTreeMap<StateId, Rc<Recipe>> = BTreeMap::new();
    for label in a.symbols() {
        layer.entry(a.initial_state(label)).or_insert_with(|| {
            Rc::new(Recipe {
                label,
                children: Vec::new(),
                size: 1,
            })
        });
    }
    for _ in 0..t {
        let current: Vec<StateId> = layer.keys().copied().collect();
        let mut best: BTreeMap<StateId, (u128, SymbolId, Vec<Vec<StateId>>)> = BTreeMap::new();
        for_each_image(a, &current, budget, |label, tuple, target| {
            let mut members: Vec<StateId> = tuple.iter().flatten().copied().collect();
            members.sort_unstable();
            members.dedup();
            let size = members
                .iter()
                .fold(1u128, |acc, p| acc.saturating_add(layer[p].size));
            if best.get(&target).is_none_or(|(s, _, _)| size < *s) {
                best.insert(target, (size, label, tuple.to_vec()));
            }
        })?;
        layer = best
            .into_iter()
            .map(|(target, (size, label, tuple))| {
                let mut members: BTreeMap<StateId, u32> = BTreeMap::new();
                for (k, set) in tuple.iter().enumerate() {
                    for p in set {
                        *members.entry(*p).or_default() |= 1 << k;
                    }
                }
                let children = members
                    .into_iter()
                    .map(|(p, rel)| (Rc::clone(&layer[&p]), rel))
                    .collect();
                (
                    target,
                    Rc::new(Recipe {
                        label,
                        children,
                        size,
                    }),
                )
            })
            .collect();
    }
    let recipe = layer.get(&q).ok_or_else(|| {
        Error::InconsistentHit(format!(
            "state {} is not visitable at round {t}",
            a.state_name(q)
        ))
    })?;
    let limit = budget.max_explored_states as u128;
    if recipe.size > limit {
        return Err(Error::BudgetExceeded {
            what: "witness nodes",
            needed: recipe.size,
            limit,
        });
    }
    let mut labels = Vec::new();
    let mut edges = vec![Vec::new(); a.relation_count()];
    materialize(a, recipe, &mut labels, &mut edges);
    PointedDigraph::new(Digraph::new(a.relation_count(), edges, labels)?, 0)
}

fn materialize(
    a: &DistAutomaton,
    recipe: &Recipe,
    labels: &mut Vec<String>,
    edges: &mut [Vec<(usize, usize)>],
) -> usize {
    let node = labels.len();
    labels.push(a.alphabet()[recipe.label.index()].clone());
    for (child, relations) in &recipe.children {
        let point = materialize(a, child, labels, edges);
        for (k, list) in edges.iter_mut().enumerate() {
            if relations >> k & 1 == 1 {
                list.push((point, node));
            }
        }
    }
    node
}

/// An accepted pointed digraph and the first round its point accepts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchHit {
    pub graph: PointedDigraph,
    pub round: usize,
}

/// First pointed digraph (in enumeration order) with at most `max_nodes` nodes
/// whose point accepts within `max_rounds` rounds.
pub fn bounded_search(
    a: &DistAutomaton,
    max_nodes: usize,
    max_rounds: usize,
) -> Result<Option<SearchHit>> {
    if let Backing::Table(t) = a.backing() {
        if max_nodes * max_nodes * a.relation_count() < 64 {
            return Ok(table_search(a, t, max_nodes, max_rounds));
        }
    }
    let space = DigraphSpace::new(a.alphabet(), a.relation_count(), max_nodes);
    for g in space.digraphs() {
        let runner = Runner::new(a, &g)?;
        if let Some((point, round)) = first_acceptance(&runner, max_rounds) {
            return Ok(Some(SearchHit {
                graph: PointedDigraph::new(g, point)?,
                round,
            }));
        }
    }
    Ok(None)
}

/// Least node accepting within `max_rounds`, with its first accepting round.
fn first_acceptance(runner: &Runner<'_>, max_rounds: usize) -> Option<(usize, usize)> {
    let a = runner.automaton();
    let n = runner.graph().node_count();
    let mut first: Vec<Option<usize>> = vec![None; n];
    let mut c = runner.initial();
    loop {
        for v in 0..n {
            if first[v].is_none() && a.is_accepting(c.states[v]) {
                first[v] = Some(c.round);
            }
        }
        if c.round == max_rounds {
            break;
        }
        let next = runner.step(&c);
        if next.states == c.states {
            break;
        }
        c = next;
    }
    first.iter().enumerate().find_map(|(v, r)| r.map(|r| (v, r)))
}

/// [`bounded_search`] specialised to tables: graphs are kept as bitmasks and
/// only the hit is materialized.
fn table_search(
    a: &DistAutomaton,
    t: &TransitionTable,
    max_nodes: usize,
    max_rounds: usize,
) -> Option<SearchHit> {
    let r = a.relation_count();
    let sigma = a.alphabet().len();
    let accepting: Vec<bool> = a.states().map(|q| a.is_accepting(q)).collect();
    for n in 1..=max_nodes {
        let block = n * n;
        let bits = block * r;
        let labelings = sigma.pow(n as u32);
        let mut labels = vec![SymbolId(0); n];
        let mut incoming = vec![0u64; r * n];
        let mut states = vec![StateId(0); n];
        let mut next = vec![StateId(0); n];
        let mut first: Vec<Option<usize>> = vec![None; n];
        let mut masks = vec![0u64; r];
        for lab in 0..labelings {
            let mut rest = lab;
            for v in (0..n).rev() {
                labels[v] = SymbolId((rest % sigma) as u32);
                rest /= sigma;
            }
            for e in 0..1u64 << bits {
                for k in 0..r {
                    let base = (r - 1 - k) * block;
                    for v in 0..n {
                        let mut m = 0;
                        for u in 0..n {
                            m |= (e >> (base + u * n + v) & 1) << u;
                        }
                        incoming[k * n + v] = m;
                    }
                }
                for v in 0..n {
                    states[v] = a.initial_state(labels[v]);
                    first[v] = None;
                }
                let mut round = 0;
                loop {
                    for v in 0..n {
                        if first[v].is_none() && accepting[states[v].index()] {
                            first[v] = Some(round);
                        }
                    }
                    if round == max_rounds {
                        break;
                    }
                    for v in 0..n {
                        for (k, m) in masks.iter_mut().enumerate() {
                            let mut from = incoming[k * n + v];
                            *m = 0;
                            while from != 0 {
                                let u = from.trailing_zeros() as usize;
                                *m |= 1 << states[u].0;
                                from &= from - 1;
                            }
                        }
                        next[v] = t.lookup_masks(labels[v], states[v], &masks);
                    }
                    round += 1;
                    if next == states {
                        break;
                    }
                    std::mem::swap(&mut states, &mut next);
                }
                if let Some((point, round)) =
                    first.iter().enumerate().find_map(|(v, r)| r.map(|r| (v, r)))
                {
                    let mut lists = vec![Vec::new(); r];
                    for (k, list) in lists.iter_mut().enumerate() {
                        for v in 0..n {
                            for u in 0..n {
                                if incoming[k * n + v] >> u & 1 == 1 {
                                    list.push((u, v));
                                }
                            }
                        }
                    }
                    let names: Vec<String> = labels
                        .iter()
                        .map(|s| a.alphabet()[s.index()].clone())
                        .collect();
                    let g = Digraph::new(r, lists, names).expect("well-formed by construction");
                    return Some(SearchHit {
                        graph: PointedDigraph::new(g, point).expect("point in range"),
                        round,
                    });
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DipathHit {
    pub word: Vec<String>,
    pub graph: PointedDigraph,
    pub round: usize,
}

/// Shortest pointed dipath (then lexicographically least word) accepted within
/// `max_rounds`, among words of length at most `max_len`.
pub fn dipath_search(
    a: &DistAutomaton,
    max_len: usize,
    max_rounds: usize,
) -> Result<Option<DipathHit>> {
    if a.relation_count() != 1 {
        return Err(Error::RelationCount {
            expected: 1,
            found: a.relation_count(),
        });
    }
    for (word, pg) in enumerate_dipaths(a.alphabet(), max_len) {
        let runner = Runner::new(a, pg.graph())?;
        let point = pg.point();
        let round = runner
            .configurations()
            .take(max_rounds + 1)
            .position(|c| a.is_accepting(c.states[point]));
        if let Some(round) = round {
            return Ok(Some(DipathHit {
                word,
                graph: pg,
                round,
            }));
        }
    }
    Ok(None)
}
