//! JSON file formats for graphs, table-backed automata, classical automata,
//! Turing machines and PCP instances.
//!
//! Relations are numbered from 1 in files and from 0 in the API. Rule-backed
//! automata are not serialized; they are rebuilt from the object that generated
//! them.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::automata::{make_table_automaton, DistAutomaton, Init, InitNames, TableEntry};
use crate::classical::{TreeAutomaton, TreeTransition};
use crate::error::{Error, Result};
use crate::graphs::{Digraph, PointedDigraph};
use crate::reductions::{pcp_to_automaton, tm_to_automaton, PcpInstance, TuringMachine};

/// Parses any of the file types from JSON text.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file types serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub labels: Vec<String>,
    pub relations: usize,
    /// `[k, u, v]` with `k` in `1..=relations`.
    pub edges: Vec<[usize; 3]>,
    pub point: usize,
}

impl GraphFile {
    pub fn from_graph(pg: &PointedDigraph) -> Self {
        let g = pg.graph();
        GraphFile {
            labels: g.labels().to_vec(),
            relations: g.relation_count(),
            edges: g.triples().map(|(k, u, v)| [k + 1, u, v]).collect(),
            point: pg.point(),
        }
    }

    pub fn to_graph(&self) -> Result<PointedDigraph> {
        let mut lists = vec![Vec::new(); self.relations];
        for &[k, u, v] in &self.edges {
            if k == 0 || k > self.relations {
                return Err(Error::InvalidGraph(format!(
                    "edge relation {k} outside 1..={}",
                    self.relations
                )));
            }
            lists[k - 1].push((u, v));
        }
        PointedDigraph::new(Digraph::new(self.relations, lists, self.labels.clone())?, self.point)
    }
}

pub fn read_graph(text: &str) -> Result<PointedDigraph> {
    from_json::<GraphFile>(text)?.to_graph()
}

pub fn write_graph(pg: &PointedDigraph) -> String {
    to_json(&GraphFile::from_graph(pg))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum InitFile {
    State(String),
    Map(BTreeMap<String, String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionFile {
    pub label: String,
    pub state: String,
    pub neighbors: Vec<Vec<String>>,
    pub next: String,
}

/// Table-backed automaton; the transitions must cover the whole domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonFile {
    pub states: Vec<String>,
    pub relations: usize,
    pub alphabet: Vec<String>,
    pub init: InitFile,
    pub accepting: Vec<String>,
    pub transitions: Vec<TransitionFile>,
}

impl AutomatonFile {
    pub fn from_automaton(a: &DistAutomaton) -> Result<Self> {
        let table = a.table().ok_or_else(|| {
            Error::InvalidAutomaton("rule-backed automata have no file form".into())
        })?;
        let name = |q| a.state_name(q);
        let init = match a.init() {
            Init::State(q) => InitFile::State(name(*q)),
            Init::Map(v) => InitFile::Map(
                a.alphabet()
                    .iter()
                    .zip(v)
                    .map(|(s, &q)| (s.clone(), name(q)))
                    .collect(),
            ),
        };
        let transitions = table
            .entries()
            .map(|(label, state, sets, next)| TransitionFile {
                label: a.alphabet()[label.index()].clone(),
                state: name(state),
                neighbors: sets
                    .iter()
                    .map(|set| set.iter().map(|&q| name(q)).collect())
                    .collect(),
                next: name(next),
            })
            .collect();
        Ok(AutomatonFile {
            states: a.states().map(name).collect(),
            relations: a.relation_count(),
            alphabet: a.alphabet().to_vec(),
            init,
            accepting: a.accepting_states().into_iter().map(name).collect(),
            transitions,
        })
    }

    pub fn to_automaton(&self) -> Result<DistAutomaton> {
        let init = match &self.init {
            InitFile::State(q) => InitNames::State(q.clone()),
            InitFile::Map(m) => InitNames::Map(m.clone()),
        };
        let entries: Vec<TableEntry> = self
            .transitions
            .iter()
            .map(|t| TableEntry {
                label: t.label.clone(),
                state: t.state.clone(),
                neighbors: t.neighbors.clone(),
                next: t.next.clone(),
            })
            .collect();
        make_table_automaton(
            self.states.clone(),
            self.relations,
            self.alphabet.clone(),
            init,
            &entries,
            &self.accepting,
        )
    }
}

pub fn read_automaton(text: &str) -> Result<DistAutomaton> {
    from_json::<AutomatonFile>(text)?.to_automaton()
}

pub fn write_automaton(a: &DistAutomaton) -> Result<String> {
    Ok(to_json(&AutomatonFile::from_automaton(a)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeAutomatonFile {
    pub alphabet: Vec<String>,
    pub states: Vec<String>,
    pub arity: usize,
    pub transitions: Vec<TreeTransition>,
    pub accepting: Vec<String>,
}

impl TreeAutomatonFile {
    pub fn from_automaton(ta: &TreeAutomaton) -> Self {
        TreeAutomatonFile {
            alphabet: ta.alphabet().to_vec(),
            states: ta.states().to_vec(),
            arity: ta.arity(),
            transitions: ta.transitions(),
            accepting: ta.accepting(),
        }
    }

    pub fn to_automaton(&self) -> Result<TreeAutomaton> {
        TreeAutomaton::from_transitions(
            self.alphabet.clone(),
            self.states.clone(),
            self.arity,
            &self.transitions,
            &self.accepting,
        )
    }
}

/// Compact stand-in for a rule-backed reduction automaton, rebuilt on load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reduction", rename_all = "lowercase")]
pub enum Descriptor {
    Tm { machine: TuringMachine },
    Pcp { instance: PcpInstance },
}

impl Descriptor {
    pub fn to_automaton(&self) -> Result<DistAutomaton> {
        match self {
            Descriptor::Tm { machine } => tm_to_automaton(machine),
            Descriptor::Pcp { instance } => pcp_to_automaton(instance),
        }
    }
}

/// Reads either a table file or a reduction descriptor.
pub fn read_any_automaton(text: &str) -> Result<DistAutomaton> {
    let value: serde_json::Value = from_json(text)?;
    if value.get("reduction").is_some() {
        from_json::<Descriptor>(text)?.to_automaton()
    } else {
        read_automaton(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{balanced_example, WordAutomaton};

    #[test]
    fn graph_round_trip_and_errors() {
        let text = r#"{"labels":["a","b"],"relations":2,"edges":[[1,0,1],[2,1,0]],"point":1}"#;
        let pg = read_graph(text).unwrap();
        assert_eq!(pg.graph().incoming(1, 0), &[1]);
        assert_eq!(read_graph(&write_graph(&pg)).unwrap(), pg);
        assert!(read_graph(r#"{"labels":["a"],"relations":1,"edges":[[0,0,0]],"point":0}"#).is_err());
        assert!(read_graph(r#"{"labels":["a"],"relations":1,"edges":[],"point":3}"#).is_err());
        assert!(matches!(read_graph("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn automaton_round_trip() {
        let a = DistAutomaton::from_fn(
            vec!["a".into(), "b".into()],
            1,
            vec!["p".into(), "q".into()],
            Init::Map(vec![crate::automata::StateId(0), crate::automata::StateId(1)]),
            &[crate::automata::StateId(1)],
            |_, q, n| if n[0].is_empty() { q } else { n[0][0] },
        )
        .unwrap();
        let text = write_automaton(&a).unwrap();
        let file: AutomatonFile = from_json(&text).unwrap();
        assert!(matches!(file.init, InitFile::Map(_)));
        let b = read_automaton(&text).unwrap();
        assert_eq!(b.table(), a.table());
        assert_eq!(b.init(), a.init());
        assert_eq!(write_automaton(&b).unwrap(), text);
        assert!(write_automaton(&balanced_example()).is_ok());
    }

    #[test]
    fn rule_automata_have_no_file_form() {
        let inst = PcpInstance::new([(3, "0", "0")]).unwrap();
        let red = crate::reductions::PcpReduction::new(&inst).unwrap();
        assert!(write_automaton(&red.automaton).is_err());
        let d = Descriptor::Pcp { instance: inst };
        let text = to_json(&d);
        assert!(text.contains("\"reduction\": \"pcp\""));
        assert_eq!(read_any_automaton(&text).unwrap().state_count(), red.automaton.state_count());
    }

    #[test]
    fn other_formats_round_trip() {
        let pcp: PcpInstance = from_json(r#"{"tiles": {"3": ["00","100"], "5": ["010","0"]}}"#).unwrap();
        assert_eq!(pcp.tiles[&5].0, "010");
        assert_eq!(from_json::<PcpInstance>(&to_json(&pcp)).unwrap(), pcp);

        let tm: TuringMachine = from_json(
            r#"{"states":["q","h"],"tape":["b","x"],"init":"q","blank":"b","halt":"h",
                "delta":[["q","b","h","x","R"]]}"#,
        )
        .unwrap();
        assert_eq!(from_json::<TuringMachine>(&to_json(&tm)).unwrap(), tm);

        let w = WordAutomaton::from_fn(vec!["a".into()], vec!["0".into(), "1".into()], 0, &[1], |p, _| 1 - p).unwrap();
        assert_eq!(from_json::<WordAutomaton>(&to_json(&w)).unwrap(), w);

        let ta = TreeAutomaton::from_fn(
            vec!["*".into()],
            vec!["even".into(), "odd".into()],
            2,
            &[1],
            |children, _| 1 - children.iter().sum::<usize>() % 2,
        )
        .unwrap();
        let file = TreeAutomatonFile::from_automaton(&ta);
        let back: TreeAutomatonFile = from_json(&to_json(&file)).unwrap();
        assert_eq!(back.to_automaton().unwrap(), ta);
    }
}
