use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    #[error("missing transition for label {label:?}, state {state:?}, neighbors {neighbors}")]
    MissingTransition {
        label: String,
        state: String,
        neighbors: String,
    },

    #[error("automaton and input are incompatible: {0}")]
    Incompatible(String),

    #[error("automaton is not forgetful")]
    NotForgetful,

    #[error("operation requires a {expected}-relational automaton, got {found}")]
    RelationCount { expected: usize, found: usize },

    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("invalid classical automaton: {0}")]
    InvalidClassical(String),

    #[error("input is not an ordered pointed ditree: {0}")]
    NotOrderedDitree(String),

    #[error("invalid Turing machine: {0}")]
    InvalidMachine(String),

    #[error("Turing machine head moved left of cell 1 at step {step}")]
    HeadFellOff { step: usize },

    #[error("invalid PCP instance: {0}")]
    InvalidInstance(String),

    #[error("invalid index sequence: {0}")]
    InvalidSequence(String),

    #[error("inconsistent emptiness hit: {0}")]
    InconsistentHit(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
