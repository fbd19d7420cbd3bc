//! Compilers from undecidable problems into distributed automata, with the
//! direct simulators that serve as their oracles.

pub mod pcp;
pub mod tm;

pub use pcp::{
    expected_signal_times, pcp_brute_force, pcp_check_solution, pcp_encode_solution,
    pcp_encode_solution_with_order, pcp_to_automaton, PcpInstance, PcpReduction, SignalTimes,
};
pub use tm::{
    tm_simulate, tm_to_automaton, tm_traversal_check, Direction, SimCell, TmConfig, TmReduction,
    TuringMachine,
};
