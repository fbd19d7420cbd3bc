use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use dawb_core::classical::{dfa_to_forgetful, forgetful_to_dfa, ordered_binary_ditrees, tree_to_forgetful, UNLABELED};
use dawb_core::emptiness::{bounded_search, dipath_search};
use dawb_core::graphs::{enumerate_dipaths, enumerate_pointed_digraphs};
use dawb_core::io::{
    from_json, read_any_automaton, read_graph, to_json, write_automaton, write_graph, Descriptor, GraphFile,
    TreeAutomatonFile,
};
use dawb_core::reductions::{pcp_encode_solution, PcpReduction, TmReduction};
use dawb_core::runtime::{trace, Certificate};
use dawb_core::{
    decide_acceptance, forgetful_empty, is_forgetful, is_monovisioned, is_quasi_acyclic, monovisionize, Budget,
    DistAutomaton, PcpInstance, PointedDigraph, TuringMachine, WordAutomaton,
};

use crate::{Cli, Command, Conversion, Encoding, Family, Global, Property, Reduction, TraceFormat};

const YES: u8 = 0;
const NO: u8 = 1;

fn verdict(yes: bool) -> u8 {
    if yes {
        YES
    } else {
        NO
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_automaton(path: &Path) -> Result<DistAutomaton> {
    read_any_automaton(&read(path)?).with_context(|| format!("loading automaton {}", path.display()))
}

fn load_graph(path: &Path) -> Result<PointedDigraph> {
    read_graph(&read(path)?).with_context(|| format!("loading graph {}", path.display()))
}

fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    from_json(&read(path)?).with_context(|| format!("loading {}", path.display()))
}

impl Global {
    fn budget(&self) -> Budget {
        let mut b = Budget::default();
        if let Some(r) = self.budget_rounds {
            b.max_rounds = r as usize;
        }
        if let Some(n) = self.budget_nodes {
            b.max_explored_states = n as usize;
        }
        b
    }

    fn nodes_or(&self, default: usize) -> usize {
        self.budget_nodes.map_or(default, |n| n as usize)
    }

    fn rounds_or(&self, default: usize) -> usize {
        self.budget_rounds.map_or(default, |n| n as usize)
    }

    fn length_or(&self, default: usize) -> usize {
        self.budget_length.map_or(default, |n| n as usize)
    }

    /// Writes an artifact to `--output`, or to stdout without one.
    fn emit(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }

    /// Writes an artifact only when `--output` is given.
    fn emit_optional(&self, what: &str, text: &str) -> Result<()> {
        if let Some(path) = &self.output {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            println!("{what} written to {}", path.display());
        }
        Ok(())
    }
}

pub fn dispatch(cli: &Cli) -> Result<u8> {
    let g = &cli.global;
    match &cli.command {
        Command::Run {
            automaton,
            graph,
            trace: format,
        } => run(g, automaton, graph, *format),
        Command::Empty {
            automaton,
            forgetful,
            bounded,
            dipath,
        } => {
            let a = load_automaton(automaton)?;
            match (forgetful, bounded, dipath) {
                (true, _, _) => empty_forgetful(g, &a),
                (_, true, _) => empty_bounded(g, &a),
                _ => empty_dipath(g, &a),
            }
        }
        Command::Check { property, automaton } => check(g, *property, &load_automaton(automaton)?),
        Command::Convert { conversion, input } => convert(g, *conversion, input),
        Command::Monovisionize { automaton } => {
            let m = monovisionize(&load_automaton(automaton)?)?;
            g.emit(&write_automaton(&m)?)?;
            Ok(YES)
        }
        Command::Reduce { kind, input } => reduce(g, *kind, input),
        Command::Encode {
            kind: Encoding::Pcp,
            input,
            solution,
        } => {
            let inst: PcpInstance = load(input)?;
            g.emit(&write_graph(&pcp_encode_solution(&inst, solution)?))?;
            Ok(YES)
        }
        Command::Enumerate {
            family,
            alphabet,
            relations,
            count,
        } => enumerate(g, *family, alphabet, *relations, *count),
    }
}

fn run(g: &Global, automaton: &Path, graph: &Path, format: Option<TraceFormat>) -> Result<u8> {
    let a = load_automaton(automaton)?;
    let pg = load_graph(graph)?;
    let decision = decide_acceptance(&a, &pg, &g.budget())?;
    let last = match decision.certificate {
        Certificate::Accepted { round } => round,
        Certificate::Rejected {
            cycle_start,
            cycle_length,
        } => cycle_start + cycle_length,
    };
    if let Some(format) = format {
        let t = trace(&a, &pg, last)?;
        let text = match format {
            TraceFormat::Tsv => t.to_tsv(&a),
            TraceFormat::Json => format!("{}\n", serde_json::to_string_pretty(&t.to_json(&a))?),
        };
        g.emit(&text)?;
    }
    match decision.certificate {
        Certificate::Accepted { round } => println!("accepted at round {round}"),
        Certificate::Rejected {
            cycle_start,
            cycle_length,
        } => println!("rejected: the run repeats from round {cycle_start} with period {cycle_length}"),
    }
    Ok(verdict(decision.accepted))
}

fn empty_forgetful(g: &Global, a: &DistAutomaton) -> Result<u8> {
    let v = forgetful_empty(a, &g.budget())?;
    let (Some(t), Some(q)) = (v.first_hit_round, v.hit_state) else {
        println!("empty");
        return Ok(NO);
    };
    println!("nonempty: accepting state {} reached at round {t}", a.state_name(q));
    match &v.witness {
        Some(w) => {
            println!("witness: {} nodes", w.graph().node_count());
            g.emit_optional("witness", &write_graph(w))?;
        }
        None => println!("witness: larger than the node budget, omitted"),
    }
    Ok(YES)
}

fn empty_bounded(g: &Global, a: &DistAutomaton) -> Result<u8> {
    let (nodes, rounds) = (g.nodes_or(3), g.rounds_or(16));
    match bounded_search(a, nodes, rounds)? {
        Some(hit) => {
            println!(
                "nonempty: {}-node pointed digraph accepted at round {}",
                hit.graph.graph().node_count(),
                hit.round
            );
            g.emit_optional("witness", &write_graph(&hit.graph))?;
            Ok(YES)
        }
        None => {
            println!("no accepted pointed digraph with at most {nodes} nodes within {rounds} rounds");
            Ok(NO)
        }
    }
}

fn empty_dipath(g: &Global, a: &DistAutomaton) -> Result<u8> {
    let (length, rounds) = (g.length_or(6), g.rounds_or(40));
    match dipath_search(a, length, rounds)? {
        Some(hit) => {
            println!(
                "nonempty: dipath {} ({} nodes) accepted at round {}",
                hit.word.join(" "),
                hit.word.len(),
                hit.round
            );
            g.emit_optional("witness", &write_graph(&hit.graph))?;
            Ok(YES)
        }
        None => {
            println!("no accepted dipath with at most {length} nodes within {rounds} rounds");
            Ok(NO)
        }
    }
}

fn check(g: &Global, property: Property, a: &DistAutomaton) -> Result<u8> {
    let b = g.budget();
    let holds = match property {
        Property::Forgetful => is_forgetful(a, &b)?,
        Property::QuasiAcyclic => is_quasi_acyclic(a, &b)?,
        Property::Monovisioned => {
            let sink = is_monovisioned(a, &b)?;
            if let Some(q) = sink {
                println!("rejecting sink: {}", a.state_name(q));
            }
            sink.is_some()
        }
    };
    println!("{}", if holds { "yes" } else { "no" });
    Ok(verdict(holds))
}

fn convert(g: &Global, conversion: Conversion, input: &Path) -> Result<u8> {
    let text = match conversion {
        Conversion::Dfa2da => {
            let w: WordAutomaton = load(input)?;
            write_automaton(&dfa_to_forgetful(&w)?)?
        }
        Conversion::Da2dfa => to_json(&forgetful_to_dfa(&load_automaton(input)?, &g.budget())?),
        Conversion::Ta2da => {
            let file: TreeAutomatonFile = load(input)?;
            write_automaton(&tree_to_forgetful(&file.to_automaton()?)?)?
        }
    };
    g.emit(&text)?;
    Ok(YES)
}

fn reduce(g: &Global, kind: Reduction, input: &Path) -> Result<u8> {
    let (descriptor, states) = match kind {
        Reduction::Tm => {
            let machine: TuringMachine = load(input)?;
            let states = TmReduction::new(&machine)?.automaton.state_count();
            (Descriptor::Tm { machine }, states)
        }
        Reduction::Pcp => {
            let instance: PcpInstance = load(input)?;
            let states = PcpReduction::new(&instance)?.automaton.state_count();
            (Descriptor::Pcp { instance }, states)
        }
    };
    eprintln!("reduction automaton has {states} states");
    g.emit(&to_json(&descriptor))?;
    Ok(YES)
}

fn enumerate(g: &Global, family: Family, alphabet: &[String], relations: usize, count: bool) -> Result<u8> {
    let items: Box<dyn Iterator<Item = PointedDigraph>> = match family {
        Family::Graphs => Box::new(enumerate_pointed_digraphs(alphabet, relations, g.nodes_or(2))),
        Family::Dipaths => Box::new(enumerate_dipaths(alphabet, g.length_or(3)).map(|(_, pg)| pg)),
        Family::Ditrees => Box::new(ordered_binary_ditrees(UNLABELED, g.nodes_or(7))),
    };
    if count {
        println!("{}", items.count());
        return Ok(YES);
    }
    let mut out = String::new();
    for pg in items {
        out.push_str(&serde_json::to_string(&GraphFile::from_graph(&pg))?);
        out.push('\n');
    }
    g.emit(&out)?;
    Ok(YES)
}
