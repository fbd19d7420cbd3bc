//! Turing machines on a one-way infinite tape, and their compilation into a
//! 1-relational automaton in which node `u_t` of a dipath traverses the
//! configuration at time `t`, one cell per round.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::automata::{DistAutomaton, Init, Move, StateId, SymbolId, TransitionRule};
use crate::classical::UNLABELED;
use crate::error::{Error, Result};
use crate::graphs::dipath_of_word;
use crate::runtime::Runner;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    L,
    R,
}

/// A deterministic machine `⟨Q, Γ, q_init, b, δ, h⟩`. `delta` lists
/// `(q, s, q′, s′, move)` and must be total on `(Q \ {h}) × Γ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TuringMachine {
    pub states: Vec<String>,
    pub tape: Vec<String>,
    pub init: String,
    pub blank: String,
    pub halt: String,
    pub delta: Vec<(String, String, String, String, Direction)>,
}

/// Index form of a validated machine.
#[derive(Debug, Clone)]
struct Compiled {
    init: usize,
    blank: usize,
    halt: usize,
    symbols: usize,
    /// `delta[q * |Γ| + s]`, `None` exactly for `q = h`.
    delta: Vec<Option<(usize, usize, Direction)>>,
}

impl Compiled {
    fn step(&self, q: usize, s: usize) -> Option<(usize, usize, Direction)> {
        self.delta[q * self.symbols + s]
    }
}

fn position(names: &[String], name: &str, what: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| Error::InvalidMachine(format!("unknown {what} {name:?}")))
}

impl TuringMachine {
    pub fn validate(&self) -> Result<()> {
        self.compile().map(|_| ())
    }

    fn compile(&self) -> Result<Compiled> {
        for (names, what) in [(&self.states, "state"), (&self.tape, "tape symbol")] {
            if names.is_empty() {
                return Err(Error::InvalidMachine(format!("no {what}s")));
            }
            let mut sorted = names.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != names.len() {
                return Err(Error::InvalidMachine(format!("duplicate {what}")));
            }
        }
        let init = position(&self.states, &self.init, "state")?;
        let blank = position(&self.tape, &self.blank, "tape symbol")?;
        let halt = position(&self.states, &self.halt, "state")?;
        let symbols = self.tape.len();
        let mut delta = vec![None; self.states.len() * symbols];
        for (q, s, q2, s2, d) in &self.delta {
            let (q, s) = (position(&self.states, q, "state")?, position(&self.tape, s, "tape symbol")?);
            if q == halt {
                return Err(Error::InvalidMachine("transition out of the halting state".into()));
            }
            let entry = (
                position(&self.states, q2, "state")?,
                position(&self.tape, s2, "tape symbol")?,
                *d,
            );
            if delta[q * symbols + s].replace(entry).is_some_and(|old| old != entry) {
                return Err(Error::InvalidMachine(format!(
                    "conflicting transitions for ({}, {})",
                    self.states[q], self.tape[s]
                )));
            }
        }
        for q in (0..self.states.len()).filter(|&q| q != halt) {
            for s in 0..symbols {
                if delta[q * symbols + s].is_none() {
                    return Err(Error::InvalidMachine(format!(
                        "missing transition for ({}, {})",
                        self.states[q], self.tape[s]
                    )));
                }
            }
        }
        Ok(Compiled {
            init,
            blank,
            halt,
            symbols,
            delta,
        })
    }
}

/// Tape contents (blank beyond the end), 1-based head position, and state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmConfig {
    pub tape: Vec<String>,
    pub head: usize,
    pub state: String,
}

impl TmConfig {
    /// Content of cell `c` (1-based) in the traversal encoding.
    pub fn cell(&self, c: usize, blank: &str) -> SimCell {
        let symbol = self.tape.get(c - 1).map_or(blank, String::as_str).to_owned();
        if c == self.head {
            SimCell::Head {
                state: self.state.clone(),
                symbol,
            }
        } else {
            SimCell::Symbol(symbol)
        }
    }
}

/// Configurations `C₀, C₁, …` up to halting or `max_steps` steps.
pub fn tm_simulate(m: &TuringMachine, max_steps: usize) -> Result<Vec<TmConfig>> {
    let c = m.compile()?;
    let mut tape: Vec<usize> = Vec::new();
    let mut head = 1usize;
    let mut q = c.init;
    let snapshot = |tape: &[usize], head, q: usize| TmConfig {
        tape: tape.iter().map(|&s| m.tape[s].clone()).collect(),
        head,
        state: m.states[q].clone(),
    };
    let mut out = vec![snapshot(&tape, head, q)];
    for step in 1..=max_steps {
        if q == c.halt {
            break;
        }
        let read = tape.get(head - 1).copied().unwrap_or(c.blank);
        let (q2, s2, d) = c.step(q, read).expect("total off the halting state");
        if tape.len() < head {
            tape.resize(head, c.blank);
        }
        tape[head - 1] = s2;
        head = match d {
            Direction::R => head + 1,
            Direction::L if head == 1 => return Err(Error::HeadFellOff { step }),
            Direction::L => head - 1,
        };
        q = q2;
        out.push(snapshot(&tape, head, q));
    }
    Ok(out)
}

/// One component of a simulation state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SimCell {
    Wait,
    Head { state: String, symbol: String },
    Symbol(String),
}

impl fmt::Display for SimCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimCell::Wait => f.write_str("o"),
            SimCell::Head { state, symbol } => write!(f, "({state},{symbol})"),
            SimCell::Symbol(s) => f.write_str(s),
        }
    }
}

/// Cells are numbered `0` (waiting), `1 + q·|Γ| + s` (head), then plain symbols.
#[derive(Debug)]
struct TmRule {
    machine: TuringMachine,
    c: Compiled,
    cells: usize,
}

impl TmRule {
    fn head(&self, q: usize, s: usize) -> usize {
        1 + q * self.c.symbols + s
    }

    fn sym(&self, s: usize) -> usize {
        1 + self.machine.states.len() * self.c.symbols + s
    }

    /// `(state, symbol)` of a head cell.
    fn as_head(&self, cell: usize) -> Option<(usize, usize)> {
        let heads = self.machine.states.len() * self.c.symbols;
        (1..=heads)
            .contains(&cell)
            .then(|| ((cell - 1) / self.c.symbols, (cell - 1) % self.c.symbols))
    }

    /// Tape symbol of a non-waiting cell.
    fn raw(&self, cell: usize) -> usize {
        match self.as_head(cell) {
            Some((_, s)) => s,
            None => cell - 1 - self.machine.states.len() * self.c.symbols,
        }
    }

    fn error(&self) -> StateId {
        StateId::from(self.cells.pow(3))
    }

    fn encode(&self, t: [usize; 3]) -> StateId {
        StateId::from((t[0] * self.cells + t[1]) * self.cells + t[2])
    }

    fn decode(&self, q: StateId) -> Option<[usize; 3]> {
        let i = q.index();
        (q != self.error()).then(|| [i / (self.cells * self.cells), i / self.cells % self.cells, i % self.cells])
    }

    fn cell(&self, cell: usize) -> SimCell {
        if cell == 0 {
            SimCell::Wait
        } else if let Some((q, s)) = self.as_head(cell) {
            SimCell::Head {
                state: self.machine.states[q].clone(),
                symbol: self.machine.tape[s].clone(),
            }
        } else {
            SimCell::Symbol(self.machine.tape[self.raw(cell)].clone())
        }
    }

    /// Third component of the next state, from the predecessor's current triple
    /// (cells `c-1, c, c+1` of the previous configuration). `None` means the head
    /// left the tape.
    fn compute(&self, [c1, c2, c3]: [usize; 3]) -> Option<usize> {
        let moving = |cell: usize| {
            self.as_head(cell)
                .and_then(|(q, s)| self.c.step(q, s).map(|step| (q, s, step)))
        };
        if let Some((_, _, (_, s2, d))) = moving(c2) {
            if d == Direction::L && c1 == 0 {
                return None;
            }
            return Some(self.sym(s2));
        }
        if let Some((_, _, (q2, _, Direction::R))) = moving(c1) {
            return Some(self.head(q2, self.raw(c2)));
        }
        if let Some((_, _, (q2, _, Direction::L))) = moving(c3) {
            return Some(self.head(q2, self.raw(c2)));
        }
        // No head, or a halted head: copy.
        Some(c2)
    }

    fn transition(&self, current: StateId, pred: Option<StateId>) -> StateId {
        let Some([_, d2, d3]) = self.decode(current) else {
            return current;
        };
        let third = match pred {
            None if d3 == 0 => self.head(self.c.init, self.c.blank),
            None => self.sym(self.c.blank),
            Some(p) => match self.decode(p) {
                None => return self.error(),
                Some([_, 0, _]) if d3 == 0 => return current,
                Some(triple) => match self.compute(triple) {
                    Some(cell) => cell,
                    None => return self.error(),
                },
            },
        };
        self.encode([d2, d3, third])
    }
}

impl TransitionRule for TmRule {
    fn state_count(&self) -> usize {
        self.cells.pow(3) + 1
    }

    fn state_name(&self, q: StateId) -> String {
        match self.decode(q) {
            None => "error".into(),
            Some(t) => format!("<{},{},{}>", self.cell(t[0]), self.cell(t[1]), self.cell(t[2])),
        }
    }

    fn is_accepting(&self, q: StateId) -> bool {
        self.decode(q)
            .and_then(|t| self.as_head(t[2]))
            .is_some_and(|(state, _)| state == self.c.halt)
    }

    fn next(&self, _label: SymbolId, current: StateId, neighbors: &[Vec<StateId>]) -> StateId {
        match neighbors[0].as_slice() {
            [] => self.transition(current, None),
            [p] => self.transition(current, Some(*p)),
            // Never happens on dipaths.
            _ => current,
        }
    }

    fn moves(&self, current: StateId) -> Option<Vec<Move>> {
        let mv = |nonempty, target| Move {
            label: SymbolId(0),
            nonempty,
            target,
        };
        let mut out = vec![mv(0, self.transition(current, None)), mv(1, current)];
        for p in 0..self.state_count() {
            out.push(mv(1, self.transition(current, Some(StateId::from(p)))));
        }
        out.sort_unstable();
        out.dedup();
        Some(out)
    }
}

/// The compiled automaton together with a decoder for its states.
#[derive(Debug, Clone)]
pub struct TmReduction {
    pub automaton: DistAutomaton,
    rule: Arc<TmRule>,
}

impl TmReduction {
    pub fn new(m: &TuringMachine) -> Result<Self> {
        let c = m.compile()?;
        let cells = 1 + m.states.len() * m.tape.len() + m.tape.len();
        if (cells as u128).pow(3) >= u32::MAX as u128 {
            return Err(Error::InvalidMachine("machine too large to compile".into()));
        }
        let rule = Arc::new(TmRule {
            machine: m.clone(),
            c,
            cells,
        });
        let automaton = DistAutomaton::from_rule(
            vec![UNLABELED.into()],
            1,
            Init::State(StateId(0)),
            rule.clone(),
        )?;
        Ok(TmReduction { automaton, rule })
    }

    /// The three components of a state, or `None` for the error sink.
    pub fn decode(&self, q: StateId) -> Option<[SimCell; 3]> {
        self.rule
            .decode(q)
            .map(|t| [self.rule.cell(t[0]), self.rule.cell(t[1]), self.rule.cell(t[2])])
    }
}

pub fn tm_to_automaton(m: &TuringMachine) -> Result<DistAutomaton> {
    Ok(TmReduction::new(m)?.automaton)
}

/// Runs the compiled automaton on the `n_nodes`-node dipath for `horizon`
/// rounds and checks that the cells traversed by node `u_t` spell `C_t`.
/// After halting, later nodes are compared with the halting configuration.
pub fn tm_traversal_check(m: &TuringMachine, n_nodes: usize, horizon: usize) -> Result<bool> {
    let configs = tm_simulate(m, n_nodes)?;
    let red = TmReduction::new(m)?;
    let pg = dipath_of_word(&vec![UNLABELED; n_nodes.max(1)])?;
    let runner = Runner::new(&red.automaton, pg.graph())?;
    let mut traversed: Vec<Vec<SimCell>> = vec![Vec::new(); n_nodes];
    for c in runner.configurations().take(horizon + 1) {
        for (t, cells) in traversed.iter_mut().enumerate() {
            match red.decode(c.states[t]) {
                None => return Ok(false),
                Some([_, _, SimCell::Wait]) => {}
                Some([_, _, third]) => cells.push(third),
            }
        }
    }
    Ok(traversed.iter().enumerate().all(|(t, cells)| {
        let config = &configs[t.min(configs.len() - 1)];
        cells
            .iter()
            .enumerate()
            .all(|(i, cell)| *cell == config.cell(i + 1, &m.blank))
    }))
}
