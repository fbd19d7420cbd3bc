//! Deterministic word and bottom-up tree automata, and their translations to
//! forgetful distributed automata.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::automata::{is_forgetful, DistAutomaton, Init, StateId, SymbolId};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graphs::{classify, Digraph, PointedDigraph};

/// Name of the single symbol used for unlabeled inputs.
pub const UNLABELED: &str = "*";

fn index_of(names: &[String], name: &str, what: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| Error::InvalidClassical(format!("unknown {what} {name:?}")))
}

fn check_names(names: &[String], what: &str) -> Result<()> {
    if names.is_empty() {
        return Err(Error::InvalidClassical(format!("no {what}s")));
    }
    let mut sorted = names.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != names.len() {
        return Err(Error::InvalidClassical(format!("duplicate {what}")));
    }
    Ok(())
}

/// Name for an extra state that does not clash with `names`.
fn fresh_name(names: &[String], base: &str) -> String {
    let mut name = base.to_owned();
    while names.contains(&name) {
        name.push('\'');
    }
    name
}

/// Deterministic complete word automaton `⟨P, p₀, η, F′⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordAutomaton {
    pub alphabet: Vec<String>,
    pub states: Vec<String>,
    pub initial: String,
    /// `transitions[p][σ] = η(p, σ)`, as names.
    pub transitions: BTreeMap<String, BTreeMap<String, String>>,
    pub accepting: Vec<String>,
}

/// Index-based view of a validated [`WordAutomaton`].
#[derive(Debug, Clone)]
struct Dfa {
    initial: usize,
    delta: Vec<Vec<usize>>,
    accepting: Vec<bool>,
}

impl WordAutomaton {
    /// Builds a word automaton from `η` given on indices.
    pub fn from_fn(
        alphabet: Vec<String>,
        states: Vec<String>,
        initial: usize,
        accepting: &[usize],
        mut eta: impl FnMut(usize, usize) -> usize,
    ) -> Result<Self> {
        check_names(&alphabet, "symbol")?;
        check_names(&states, "state")?;
        let mut transitions = BTreeMap::new();
        for (p, pn) in states.iter().enumerate() {
            let row = alphabet
                .iter()
                .enumerate()
                .map(|(s, sn)| {
                    let target = eta(p, s);
                    states
                        .get(target)
                        .map(|t| (sn.clone(), t.clone()))
                        .ok_or_else(|| Error::InvalidClassical(format!("target {target} out of range")))
                })
                .collect::<Result<_>>()?;
            transitions.insert(pn.clone(), row);
        }
        let w = WordAutomaton {
            initial: states
                .get(initial)
                .ok_or_else(|| Error::InvalidClassical("initial state out of range".into()))?
                .clone(),
            accepting: accepting
                .iter()
                .map(|&p| {
                    states
                        .get(p)
                        .cloned()
                        .ok_or_else(|| Error::InvalidClassical("accepting state out of range".into()))
                })
                .collect::<Result<_>>()?,
            alphabet,
            states,
            transitions,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        self.compile().map(|_| ())
    }

    fn compile(&self) -> Result<Dfa> {
        check_names(&self.alphabet, "symbol")?;
        check_names(&self.states, "state")?;
        let initial = index_of(&self.states, &self.initial, "state")?;
        let mut accepting = vec![false; self.states.len()];
        for p in &self.accepting {
            accepting[index_of(&self.states, p, "state")?] = true;
        }
        for p in self.transitions.keys() {
            index_of(&self.states, p, "state")?;
        }
        let delta = self
            .states
            .iter()
            .map(|p| {
                let row = self.transitions.get(p);
                self.alphabet
                    .iter()
                    .map(|s| {
                        let target = row.and_then(|r| r.get(s)).ok_or_else(|| {
                            Error::InvalidClassical(format!("missing transition for ({p}, {s})"))
                        })?;
                        index_of(&self.states, target, "state")
                    })
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Dfa {
            initial,
            delta,
            accepting,
        })
    }

    /// State reached after reading `word`.
    pub fn run<S: AsRef<str>>(&self, word: &[S]) -> Result<String> {
        let dfa = self.compile()?;
        let mut p = dfa.initial;
        for s in word {
            let s = s.as_ref();
            let i = self.alphabet.iter().position(|x| x == s).ok_or_else(|| {
                Error::InvalidClassical(format!("symbol {s:?} outside the alphabet"))
            })?;
            p = dfa.delta[p][i];
        }
        Ok(self.states[p].clone())
    }
}

pub fn word_run<S: AsRef<str>>(w: &WordAutomaton, word: &[S]) -> Result<bool> {
    let p = w.run(word)?;
    Ok(w.accepting.contains(&p))
}

/// Forgetful 1-relational automaton equivalent to `w` on pointed dipaths.
///
/// States are `P ∪ {o}` with `o` initial. A node without predecessor moves to
/// `η(p₀, σ)`, a node seeing `{p}` moves to `η(p, σ)`, and every other
/// neighborhood yields `o`.
pub fn dfa_to_forgetful(w: &WordAutomaton) -> Result<DistAutomaton> {
    let dfa = w.compile()?;
    let n = w.states.len();
    let wait = StateId::from(n);
    let mut names = w.states.clone();
    names.push(fresh_name(&w.states, "o"));
    let accepting: Vec<StateId> = (0..n)
        .filter(|&p| dfa.accepting[p])
        .map(StateId::from)
        .collect();
    DistAutomaton::from_fn(
        w.alphabet.clone(),
        1,
        names,
        Init::State(wait),
        &accepting,
        |sigma, _, sets| match sets[0].as_slice() {
            [] => StateId::from(dfa.delta[dfa.initial][sigma.index()]),
            [p] if *p != wait => StateId::from(dfa.delta[p.index()][sigma.index()]),
            _ => wait,
        },
    )
}

/// Word automaton over the reachable subsets of `Q` whose state after the
/// `i`-th symbol is the set of states visited at the `i`-th node of a dipath.
///
/// `p₀ = ∅` and `η(p, σ) = {π(σ)} ∪ ({δ_σ(∅)} if p = ∅ else {δ_σ({q}) : q ∈ p})`,
/// where `π(σ)` is the initial state of a `σ`-labeled node. Only subsets
/// reachable from `∅` are materialized; `∅` itself is rejecting.
pub fn forgetful_to_dfa(a: &DistAutomaton, budget: &Budget) -> Result<WordAutomaton> {
    if a.relation_count() != 1 {
        return Err(Error::RelationCount {
            expected: 1,
            found: a.relation_count(),
        });
    }
    if !is_forgetful(a, budget)? {
        return Err(Error::NotForgetful);
    }
    let any = StateId(0);
    let eta = |p: &[StateId], sigma: SymbolId| -> Vec<StateId> {
        let mut out = vec![a.initial_state(sigma)];
        if p.is_empty() {
            out.push(a.next(sigma, any, &[vec![]]));
        } else {
            out.extend(p.iter().map(|&q| a.next(sigma, any, &[vec![q]])));
        }
        out.sort_unstable();
        out.dedup();
        out
    };
    let mut ids: HashMap<Vec<StateId>, usize> = HashMap::new();
    let mut subsets: Vec<Vec<StateId>> = Vec::new();
    let mut delta: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::from([Vec::new()]);
    ids.insert(Vec::new(), 0);
    subsets.push(Vec::new());
    while let Some(p) = queue.pop_front() {
        let mut row = Vec::new();
        for sigma in a.symbols() {
            let target = eta(&p, sigma);
            let next_id = ids.len();
            let id = *ids.entry(target.clone()).or_insert_with(|| {
                subsets.push(target.clone());
                queue.push_back(target);
                next_id
            });
            row.push(id);
        }
        delta.push(row);
    }
    let names: Vec<String> = subsets.iter().map(|s| a.describe_set(s)).collect();
    let accepting: Vec<usize> = subsets
        .iter()
        .enumerate()
        .filter(|(_, s)| s.iter().any(|&q| a.is_accepting(q)))
        .map(|(i, _)| i)
        .collect();
    WordAutomaton::from_fn(a.alphabet().to_vec(), names, 0, &accepting, |p, s| delta[p][s])
}

/// Deterministic bottom-up tree automaton `⟨P, (η_k)_{0≤k≤r}, F′⟩` on ordered
/// ditrees whose nodes have at most `arity` children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeAutomaton {
    alphabet: Vec<String>,
    states: Vec<String>,
    arity: usize,
    /// `eta[k]` is indexed by `(children in base |P|, most significant first) · |Σ| + σ`.
    eta: Vec<Vec<usize>>,
    accepting: Vec<bool>,
}

/// One tree transition `η_k(children, label) = next`, by names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeTransition {
    pub children: Vec<String>,
    pub label: String,
    pub next: String,
}

impl TreeAutomaton {
    pub fn from_fn(
        alphabet: Vec<String>,
        states: Vec<String>,
        arity: usize,
        accepting: &[usize],
        mut eta: impl FnMut(&[usize], usize) -> usize,
    ) -> Result<Self> {
        check_names(&alphabet, "symbol")?;
        check_names(&states, "state")?;
        let p = states.len();
        let sigma = alphabet.len();
        let mut tables = Vec::with_capacity(arity + 1);
        for k in 0..=arity {
            let combos = p.checked_pow(k as u32).filter(|c| c * sigma <= 1 << 24).ok_or_else(|| {
                Error::InvalidClassical("tree transition table too large".into())
            })?;
            let mut table = Vec::with_capacity(combos * sigma);
            let mut children = vec![0usize; k];
            for combo in 0..combos {
                let mut rest = combo;
                for c in children.iter_mut().rev() {
                    *c = rest % p;
                    rest /= p;
                }
                for s in 0..sigma {
                    let target = eta(&children, s);
                    if target >= p {
                        return Err(Error::InvalidClassical(format!("target {target} out of range")));
                    }
                    table.push(target);
                }
            }
            tables.push(table);
        }
        let mut acc = vec![false; p];
        for &q in accepting {
            *acc.get_mut(q)
                .ok_or_else(|| Error::InvalidClassical("accepting state out of range".into()))? = true;
        }
        Ok(TreeAutomaton {
            alphabet,
            states,
            arity,
            eta: tables,
            accepting: acc,
        })
    }

    /// Builds from named transitions, which must cover every arity `0..=arity`.
    pub fn from_transitions(
        alphabet: Vec<String>,
        states: Vec<String>,
        arity: usize,
        transitions: &[TreeTransition],
        accepting: &[String],
    ) -> Result<Self> {
        check_names(&alphabet, "symbol")?;
        check_names(&states, "state")?;
        let mut map: HashMap<(Vec<usize>, usize), usize> = HashMap::new();
        for t in transitions {
            if t.children.len() > arity {
                return Err(Error::InvalidClassical(format!(
                    "transition with {} children exceeds arity {arity}",
                    t.children.len()
                )));
            }
            let children = t
                .children
                .iter()
                .map(|c| index_of(&states, c, "state"))
                .collect::<Result<Vec<_>>>()?;
            let label = index_of(&alphabet, &t.label, "symbol")?;
            let next = index_of(&states, &t.next, "state")?;
            if map.insert((children, label), next).is_some_and(|old| old != next) {
                return Err(Error::InvalidClassical(format!(
                    "conflicting transitions for ({:?}, {})",
                    t.children, t.label
                )));
            }
        }
        let accepting = accepting
            .iter()
            .map(|p| index_of(&states, p, "state"))
            .collect::<Result<Vec<_>>>()?;
        let mut missing = None;
        let ta = Self::from_fn(alphabet, states, arity, &accepting, |children, s| {
            match map.get(&(children.to_vec(), s)) {
                Some(&p) => p,
                None => {
                    missing.get_or_insert((children.to_vec(), s));
                    0
                }
            }
        })?;
        if let Some((children, s)) = missing {
            let names: Vec<&str> = children.iter().map(|&c| ta.states[c].as_str()).collect();
            return Err(Error::InvalidClassical(format!(
                "missing transition for children {names:?} and label {:?}",
                ta.alphabet[s]
            )));
        }
        Ok(ta)
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_accepting(&self, p: usize) -> bool {
        self.accepting[p]
    }

    pub fn accepting(&self) -> Vec<String> {
        (0..self.states.len())
            .filter(|&p| self.accepting[p])
            .map(|p| self.states[p].clone())
            .collect()
    }

    /// `η_k(children, σ)` for `k = children.len() ≤ arity`.
    pub fn eval(&self, children: &[usize], sigma: usize) -> usize {
        let p = self.states.len();
        let combo = children.iter().fold(0, |acc, &c| acc * p + c);
        self.eta[children.len()][combo * self.alphabet.len() + sigma]
    }

    /// Every transition, by names.
    pub fn transitions(&self) -> Vec<TreeTransition> {
        let p = self.states.len();
        let mut out = Vec::new();
        for k in 0..=self.arity {
            for combo in 0..p.pow(k as u32) {
                let mut children = vec![0; k];
                let mut rest = combo;
                for c in children.iter_mut().rev() {
                    *c = rest % p;
                    rest /= p;
                }
                for s in 0..self.alphabet.len() {
                    out.push(TreeTransition {
                        children: children.iter().map(|&c| self.states[c].clone()).collect(),
                        label: self.alphabet[s].clone(),
                        next: self.states[self.eval(&children, s)].clone(),
                    });
                }
            }
        }
        out
    }
}

/// Nodes of an ordered pointed ditree, children first, with each node's
/// children listed by relation.
fn bottom_up(pg: &PointedDigraph, max_children: usize) -> Result<Vec<(usize, Vec<usize>)>> {
    let g = pg.graph();
    let class = classify(g);
    if !class.is_ordered {
        return Err(Error::NotOrderedDitree("not an ordered ditree".into()));
    }
    if class.root != Some(pg.point()) {
        return Err(Error::NotOrderedDitree("the point is not the root".into()));
    }
    let mut order = Vec::with_capacity(g.node_count());
    let mut queue = VecDeque::from([pg.point()]);
    while let Some(v) = queue.pop_front() {
        let children: Vec<usize> = (0..g.relation_count())
            .map_while(|k| g.incoming(k, v).first().copied())
            .collect();
        if children.len() > max_children {
            return Err(Error::NotOrderedDitree(format!(
                "node {v} has {} children, at most {max_children} allowed",
                children.len()
            )));
        }
        queue.extend(children.iter().copied());
        order.push((v, children));
    }
    order.reverse();
    Ok(order)
}

pub fn tree_accepts(ta: &TreeAutomaton, pg: &PointedDigraph) -> Result<bool> {
    let g = pg.graph();
    let mut state = vec![0usize; g.node_count()];
    for (v, children) in bottom_up(pg, ta.arity)? {
        let label = index_of(&ta.alphabet, g.label(v), "symbol")?;
        let kids: Vec<usize> = children.iter().map(|&c| state[c]).collect();
        state[v] = ta.eval(&kids, label);
    }
    Ok(ta.accepting[state[pg.point()]])
}

/// Forgetful `arity`-relational automaton equivalent to `ta` on ordered pointed
/// ditrees: `δ_σ(⟨{p₁},…,{p_k},∅,…,∅⟩) = η_k(p₁,…,p_k,σ)` and `o` elsewhere.
pub fn tree_to_forgetful(ta: &TreeAutomaton) -> Result<DistAutomaton> {
    let n = ta.states.len();
    let wait = StateId::from(n);
    let mut names = ta.states.clone();
    names.push(fresh_name(&ta.states, "o"));
    let accepting: Vec<StateId> = (0..n)
        .filter(|&p| ta.accepting[p])
        .map(StateId::from)
        .collect();
    DistAutomaton::from_fn(
        ta.alphabet.clone(),
        ta.arity.max(1),
        names,
        Init::State(wait),
        &accepting,
        |sigma, _, sets| {
            let k = sets.iter().take_while(|s| !s.is_empty()).count();
            let shaped = sets[..k].iter().all(|s| s.len() == 1 && s[0] != wait)
                && sets[k..].iter().all(|s| s.is_empty());
            if shaped && k <= ta.arity {
                let children: Vec<usize> = sets[..k].iter().map(|s| s[0].index()).collect();
                StateId::from(ta.eval(&children, sigma.index()))
            } else {
                wait
            }
        },
    )
}

/// The unlabeled 2-relational forgetful automaton over `{o, f, a}` that accepts
/// an ordered binary pointed ditree iff it is not perfectly balanced:
/// `δ(N₁, N₂)` is `o` if `N₁ = N₂ = {o}`, `f` if `N₁, N₂ ∈ {∅, {f}}`, and `a`
/// otherwise.
pub fn balanced_example() -> DistAutomaton {
    const O: StateId = StateId(0);
    const F: StateId = StateId(1);
    const A: StateId = StateId(2);
    DistAutomaton::from_fn(
        vec![UNLABELED.into()],
        2,
        vec!["o".into(), "f".into(), "a".into()],
        Init::State(O),
        &[A],
        |_, _, n| {
            let quiet = |s: &Vec<StateId>| s.is_empty() || s.as_slice() == [F];
            if n[0].as_slice() == [O] && n[1].as_slice() == [O] {
                O
            } else if quiet(&n[0]) && quiet(&n[1]) {
                F
            } else {
                A
            }
        },
    )
    .expect("fixed automaton is well-formed")
}

/// Whether every node of an ordered binary pointed ditree has either no
/// children or two children whose subtrees have equal height.
pub fn is_perfectly_balanced(pg: &PointedDigraph) -> Result<bool> {
    let mut height = vec![0usize; pg.graph().node_count()];
    for (v, children) in bottom_up(pg, 2)? {
        match children.as_slice() {
            [] => height[v] = 0,
            [l, r] if height[*l] == height[*r] => height[v] = height[*l] + 1,
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Shape of an ordered ditree with at most two children per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BinaryShape {
    Leaf,
    Unary(Rc<BinaryShape>),
    Binary(Rc<BinaryShape>, Rc<BinaryShape>),
}

impl BinaryShape {
    pub fn node_count(&self) -> usize {
        match self {
            BinaryShape::Leaf => 1,
            BinaryShape::Unary(c) => 1 + c.node_count(),
            BinaryShape::Binary(l, r) => 1 + l.node_count() + r.node_count(),
        }
    }

    /// Complete binary shape of the given height.
    pub fn complete(height: usize) -> Self {
        let mut s = BinaryShape::Leaf;
        for _ in 0..height {
            let c = Rc::new(s);
            s = BinaryShape::Binary(Rc::clone(&c), c);
        }
        s
    }

    /// 2-relational pointed ditree with every node labeled `label`; the root is
    /// node 0, a single child hangs on relation 1, and two children on relations
    /// 1 and 2 (0 and 1 in the API).
    pub fn to_pointed(&self, label: &str) -> PointedDigraph {
        let mut labels = Vec::new();
        let mut edges = vec![Vec::new(), Vec::new()];
        fn build(s: &BinaryShape, labels: &mut Vec<String>, edges: &mut [Vec<(usize, usize)>], label: &str) -> usize {
            let v = labels.len();
            labels.push(label.to_owned());
            match s {
                BinaryShape::Leaf => {}
                BinaryShape::Unary(c) => {
                    let u = build(c, labels, edges, label);
                    edges[0].push((u, v));
                }
                BinaryShape::Binary(l, r) => {
                    let u = build(l, labels, edges, label);
                    edges[0].push((u, v));
                    let w = build(r, labels, edges, label);
                    edges[1].push((w, v));
                }
            }
            v
        }
        build(self, &mut labels, &mut edges, label);
        let g = Digraph::new(2, edges, labels).expect("shape is well-formed");
        PointedDigraph::new(g, 0).expect("root exists")
    }
}

/// All shapes with exactly `n` nodes, for every `n` in `1..=max_nodes`.
pub fn binary_shapes(max_nodes: usize) -> Vec<Vec<Rc<BinaryShape>>> {
    let mut by_size: Vec<Vec<Rc<BinaryShape>>> = vec![Vec::new(); max_nodes + 1];
    if max_nodes >= 1 {
        by_size[1].push(Rc::new(BinaryShape::Leaf));
    }
    for n in 2..=max_nodes {
        let mut shapes: Vec<Rc<BinaryShape>> = by_size[n - 1]
            .iter()
            .map(|c| Rc::new(BinaryShape::Unary(Rc::clone(c))))
            .collect();
        for left in 1..n - 1 {
            let right = n - 1 - left;
            for l in &by_size[left] {
                for r in &by_size[right] {
                    shapes.push(Rc::new(BinaryShape::Binary(Rc::clone(l), Rc::clone(r))));
                }
            }
        }
        by_size[n] = shapes;
    }
    by_size
}

/// Every ordered binary pointed ditree with at most `max_nodes` nodes, by size.
pub fn ordered_binary_ditrees(label: &str, max_nodes: usize) -> impl Iterator<Item = PointedDigraph> {
    let label = label.to_owned();
    binary_shapes(max_nodes)
        .into_iter()
        .flatten()
        .map(move |s| s.to_pointed(&label))
}
