//! Deterministic distributed automata on finite, labeled, multi-relational digraphs.
//!
//! Every node runs the same automaton in synchronous rounds, seeing only the *set*
//! of states of its incoming neighbors per relation. A pointed digraph is accepted
//! when its point visits an accepting state at some round.
//!
//! The crate executes runs, decides emptiness for forgetful automata, converts
//! to and from word and tree automata, and compiles Turing machines and PCP
//! instances into automata, each paired with a brute-force oracle.

pub mod automata;
pub mod budget;
pub mod classical;
pub mod emptiness;
pub mod error;
pub mod generate;
pub mod graphs;
pub mod io;
pub mod reductions;
pub mod runtime;

pub use automata::{
    is_forgetful, is_monovisioned, is_quasi_acyclic, monovisionize, product, DistAutomaton, Init,
    Move, ProductMode, StateId, SymbolId, TransitionRule,
};
pub use budget::Budget;
pub use classical::{TreeAutomaton, WordAutomaton};
pub use emptiness::{forgetful_empty, EmptinessVerdict};
pub use error::{Error, Result};
pub use graphs::{Digraph, NodeId, PointedDigraph};
pub use reductions::{PcpInstance, TuringMachine};
pub use runtime::{decide_acceptance, Configuration, Decision, RunTrace};
