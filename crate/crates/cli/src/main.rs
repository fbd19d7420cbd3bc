//! `dawb`: command-line workbench for deterministic distributed automata.
//!
//! Exit codes: 0 yes/nonempty/accepted, 1 no/empty/rejected, 2 usage or input
//! error, 3 budget exceeded.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "dawb", version, about = "Workbench for deterministic distributed automata")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Node bound for searches and emptiness witnesses.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    budget_nodes: Option<u64>,
    /// Round bound for runs and searches.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    budget_rounds: Option<u64>,
    /// Word length bound for dipath searches and enumeration.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    budget_length: Option<u64>,
    /// Write the main artifact (trace, witness, converted file) here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TraceFormat {
    Json,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Property {
    Forgetful,
    Monovisioned,
    QuasiAcyclic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Conversion {
    /// Word automaton to forgetful distributed automaton.
    Dfa2da,
    /// Forgetful 1-relational distributed automaton to word automaton.
    Da2dfa,
    /// Tree automaton to forgetful distributed automaton.
    Ta2da,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Reduction {
    Tm,
    Pcp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Encoding {
    Pcp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    /// Every pointed digraph up to `--budget-nodes` nodes.
    Graphs,
    /// Every pointed dipath up to `--budget-length` nodes.
    Dipaths,
    /// Every unlabeled ordered binary ditree up to `--budget-nodes` nodes.
    Ditrees,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an automaton on a pointed digraph and decide acceptance.
    Run {
        automaton: PathBuf,
        graph: PathBuf,
        /// Emit the run trace.
        #[arg(long, value_enum)]
        trace: Option<TraceFormat>,
    },
    /// Decide or search for emptiness.
    #[command(group = clap::ArgGroup::new("method").required(true))]
    Empty {
        automaton: PathBuf,
        /// Exact decision for forgetful automata.
        #[arg(long, group = "method")]
        forgetful: bool,
        /// Brute-force search over small pointed digraphs.
        #[arg(long, group = "method")]
        bounded: bool,
        /// Brute-force search over pointed dipaths.
        #[arg(long, group = "method")]
        dipath: bool,
    },
    /// Check a structural property.
    Check {
        #[arg(value_enum)]
        property: Property,
        automaton: PathBuf,
    },
    /// Convert between classical and distributed automata.
    Convert {
        #[arg(value_enum)]
        conversion: Conversion,
        input: PathBuf,
    },
    /// Add a rejecting sink that makes a 1-relational automaton monovisioned.
    Monovisionize { automaton: PathBuf },
    /// Compile a Turing machine or PCP instance into an automaton descriptor.
    Reduce {
        #[arg(value_enum)]
        kind: Reduction,
        input: PathBuf,
    },
    /// Encode a candidate PCP solution as a pointed ditree.
    Encode {
        #[arg(value_enum)]
        kind: Encoding,
        input: PathBuf,
        /// Comma-separated tile indices, e.g. 5,3,7,3.
        #[arg(long, value_delimiter = ',', required = true)]
        solution: Vec<u64>,
    },
    /// List small graphs as one JSON graph file per line.
    Enumerate {
        #[arg(value_enum, default_value = "graphs")]
        family: Family,
        /// Comma-separated node labels.
        #[arg(long, value_delimiter = ',', default_value = "a")]
        alphabet: Vec<String>,
        #[arg(long, default_value_t = 1)]
        relations: usize,
        /// Print only the number of items.
        #[arg(long)]
        count: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(verdict) => ExitCode::from(verdict),
        Err(e) => {
            eprintln!("error: {e:#}");
            let budget = e
                .chain()
                .any(|c| c.downcast_ref::<dawb_core::Error>().is_some_and(|e| e.is_budget()));
            ExitCode::from(if budget { 3 } else { 2 })
        }
    }
}
