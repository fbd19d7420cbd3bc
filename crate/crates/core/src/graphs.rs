//! Labeled, multi-relational digraphs and the pointed structures automata run on.
//!
//! Nodes are dense indices `0..n`. Relations are numbered from 0 in the Rust API
//! and from 1 in the JSON graph file format.
//!
//! The enumerators in this module do not quotient by isomorphism: every
//! `(labels, edge sets, point)` triple is produced, so isomorphic duplicates
//! appear. That is harmless for brute-force oracles and keeps the streams cheap.

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Digraph {
    labels: Vec<String>,
    /// `edges[k]` holds the sorted, deduplicated `(source, target)` pairs of relation `k`.
    edges: Vec<Vec<(NodeId, NodeId)>>,
    /// `incoming[k][v]` lists the sources of `k`-edges into `v`, sorted.
    incoming: Vec<Vec<Vec<NodeId>>>,
}

impl Digraph {
    /// Builds a digraph with `labels.len()` nodes. `edge_lists[k]` are the edges of
    /// relation `k`; duplicates are removed.
    pub fn new<S: Into<String>>(
        relation_count: usize,
        edge_lists: Vec<Vec<(NodeId, NodeId)>>,
        labels: Vec<S>,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidGraph("a digraph needs at least one node".into()));
        }
        if relation_count == 0 {
            return Err(Error::InvalidGraph("relation count must be positive".into()));
        }
        if edge_lists.len() > relation_count {
            return Err(Error::InvalidGraph(format!(
                "{} edge lists given for {relation_count} relations",
                edge_lists.len()
            )));
        }
        let mut edges = edge_lists;
        edges.resize(relation_count, Vec::new());
        for (k, list) in edges.iter_mut().enumerate() {
            if let Some(&(u, v)) = list.iter().find(|&&(u, v)| u >= n || v >= n) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) in relation {} has an endpoint outside 0..{n}",
                    k + 1
                )));
            }
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self::from_sorted(labels, edges))
    }

    /// Checked constructor matching the explicit `(node_count, relation_count, edges, labels)`
    /// signature; `labels` must have exactly `node_count` entries.
    pub fn with_node_count<S: Into<String>>(
        node_count: usize,
        relation_count: usize,
        edge_lists: Vec<Vec<(NodeId, NodeId)>>,
        labels: Vec<S>,
    ) -> Result<Self> {
        if labels.len() != node_count {
            return Err(Error::InvalidGraph(format!(
                "{} labels given for {node_count} nodes",
                labels.len()
            )));
        }
        Self::new(relation_count, edge_lists, labels)
    }

    /// Builds a digraph from `(relation, source, target)` triples with 0-based relations.
    pub fn from_triples<S: Into<String>>(
        relation_count: usize,
        labels: Vec<S>,
        triples: &[(usize, NodeId, NodeId)],
    ) -> Result<Self> {
        let mut lists = vec![Vec::new(); relation_count];
        for &(k, u, v) in triples {
            if k >= relation_count {
                return Err(Error::InvalidGraph(format!(
                    "relation {} outside 1..={relation_count}",
                    k + 1
                )));
            }
            lists[k].push((u, v));
        }
        Self::new(relation_count, lists, labels)
    }

    fn from_sorted(labels: Vec<String>, edges: Vec<Vec<(NodeId, NodeId)>>) -> Self {
        let n = labels.len();
        let incoming = edges
            .iter()
            .map(|list| {
                let mut inc = vec![Vec::new(); n];
                for &(u, v) in list {
                    inc[v].push(u);
                }
                inc
            })
            .collect();
        Digraph {
            labels,
            edges,
            incoming,
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn relation_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Edges of relation `k` (0-based).
    pub fn edges(&self, k: usize) -> &[(NodeId, NodeId)] {
        &self.edges[k]
    }

    /// All edges as `(relation, source, target)` triples, relation 0-based.
    pub fn triples(&self) -> impl Iterator<Item = (usize, NodeId, NodeId)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .flat_map(|(k, list)| list.iter().map(move |&(u, v)| (k, u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Incoming `k`-neighbors of `v`.
    pub fn incoming(&self, k: usize, v: NodeId) -> &[NodeId] {
        &self.incoming[k][v]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointedDigraph {
    graph: Digraph,
    point: NodeId,
}

impl PointedDigraph {
    pub fn new(graph: Digraph, point: NodeId) -> Result<Self> {
        if point >= graph.node_count() {
            return Err(Error::InvalidGraph(format!(
                "point {point} outside 0..{}",
                graph.node_count()
            )));
        }
        Ok(PointedDigraph { graph, point })
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn point(&self) -> NodeId {
        self.point
    }

    pub fn into_parts(self) -> (Digraph, NodeId) {
        (self.graph, self.point)
    }
}

/// Structural class of a digraph. `is_dipath ⇒ is_ordered ⇒ is_ditree`, and
/// `root` is present exactly when `is_ditree` holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphClass {
    pub is_ditree: bool,
    pub root: Option<NodeId>,
    pub is_ordered: bool,
    pub is_dipath: bool,
}

impl GraphClass {
    const NONE: GraphClass = GraphClass {
        is_ditree: false,
        root: None,
        is_ordered: false,
        is_dipath: false,
    };
}

pub fn classify(g: &Digraph) -> GraphClass {
    let n = g.node_count();
    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    for (_, u, v) in g.triples() {
        // A second outgoing edge, in any relation, gives a second way to the root.
        if parent[u].replace(v).is_some() {
            return GraphClass::NONE;
        }
    }
    let mut roots = (0..n).filter(|&v| parent[v].is_none());
    let root = match (roots.next(), roots.next()) {
        (Some(r), None) => r,
        _ => return GraphClass::NONE,
    };
    // Every node must reach the root; anything else sits on a cycle.
    let mut reaches = vec![false; n];
    reaches[root] = true;
    for start in 0..n {
        let mut path = Vec::new();
        let mut v = start;
        while !reaches[v] {
            if path.len() > n {
                return GraphClass::NONE;
            }
            path.push(v);
            match parent[v] {
                Some(p) => v = p,
                None => return GraphClass::NONE,
            }
        }
        for p in path {
            reaches[p] = true;
        }
    }

    let r = g.relation_count();
    let is_ordered = (0..n).all(|v| {
        (0..r).all(|k| g.incoming(k, v).len() <= 1)
            && (1..r).all(|k| g.incoming(k, v).is_empty() || !g.incoming(k - 1, v).is_empty())
    });
    GraphClass {
        is_ditree: true,
        root: Some(root),
        is_ordered,
        is_dipath: is_ordered && r == 1,
    }
}

/// The dipath spelling `word`: node `i` carries the `i`-th symbol, `i → i+1` in
/// relation 0, and the point is the last node.
pub fn dipath_of_word<S: AsRef<str>>(word: &[S]) -> Result<PointedDigraph> {
    if word.is_empty() {
        return Err(Error::InvalidGraph("dipaths have at least one node".into()));
    }
    let labels: Vec<String> = word.iter().map(|s| s.as_ref().to_owned()).collect();
    let edges = (1..labels.len()).map(|i| (i - 1, i)).collect();
    let last = labels.len() - 1;
    PointedDigraph::new(Digraph::new(1, vec![edges], labels)?, last)
}

/// Unravels `pg` into a pointed ditree of height at most `depth`.
///
/// The root copies the point; below every copy of a node `v` there is a fresh
/// copy of each incoming `k`-neighbor of `v`, attached by a `k`-edge. A node that
/// is an incoming neighbor through several relations gets one copy per relation.
pub fn tree_unravel(pg: &PointedDigraph, depth: usize) -> PointedDigraph {
    let g = pg.graph();
    let mut labels = vec![g.label(pg.point()).to_owned()];
    let mut edges = vec![Vec::new(); g.relation_count()];
    let mut queue = VecDeque::from([(0usize, pg.point(), 0usize)]);
    while let Some((copy, original, level)) = queue.pop_front() {
        if level == depth {
            continue;
        }
        for (k, list) in edges.iter_mut().enumerate() {
            for &u in g.incoming(k, original) {
                let child = labels.len();
                labels.push(g.label(u).to_owned());
                list.push((child, copy));
                queue.push_back((child, u, level + 1));
            }
        }
    }
    let tree = Digraph::from_sorted(labels, {
        for list in &mut edges {
            list.sort_unstable();
        }
        edges
    });
    PointedDigraph {
        graph: tree,
        point: 0,
    }
}

/// The space of all `Σ`-labeled, `r`-relational digraphs with at most `max_nodes`
/// nodes, in the order `(node count, labeling, edge sets)`.
///
/// Labelings are compared lexicographically with node 0 most significant. Edge
/// sets are compared as one number whose most significant block is relation 0;
/// inside a block bit `u·n + v` stands for the edge `u → v`.
#[derive(Debug, Clone)]
pub struct DigraphSpace {
    alphabet: Vec<String>,
    relation_count: usize,
    max_nodes: usize,
}

impl DigraphSpace {
    pub fn new<S: AsRef<str>>(alphabet: &[S], relation_count: usize, max_nodes: usize) -> Self {
        DigraphSpace {
            alphabet: alphabet.iter().map(|s| s.as_ref().to_owned()).collect(),
            relation_count,
            max_nodes,
        }
    }

    /// Number of digraphs with exactly `n` nodes, saturating.
    pub fn count_with_nodes(&self, n: usize) -> u128 {
        let labelings = (self.alphabet.len() as u128).saturating_pow(n as u32);
        let bits = (n * n * self.relation_count) as u32;
        let edge_sets = if bits >= 128 { u128::MAX } else { 1u128 << bits };
        labelings.saturating_mul(edge_sets)
    }

    /// Number of pointed digraphs in the space, saturating.
    pub fn count_pointed(&self) -> u128 {
        (1..=self.max_nodes)
            .map(|n| self.count_with_nodes(n).saturating_mul(n as u128))
            .fold(0u128, u128::saturating_add)
    }

    pub fn digraphs(&self) -> DigraphIter {
        DigraphIter {
            done: self.alphabet.is_empty() || self.max_nodes == 0 || self.relation_count == 0,
            n: 1,
            labeling: vec![0; 1],
            edge_bits: vec![false; self.relation_count],
            space: self.clone(),
        }
    }

    /// Every pointed digraph; the point varies fastest.
    pub fn pointed(&self) -> impl Iterator<Item = PointedDigraph> {
        self.digraphs().flat_map(|g| {
            (0..g.node_count()).map(move |p| PointedDigraph {
                graph: g.clone(),
                point: p,
            })
        })
    }
}

pub struct DigraphIter {
    space: DigraphSpace,
    n: usize,
    labeling: Vec<usize>,
    /// Little-endian binary counter over all `n²·r` edge slots.
    edge_bits: Vec<bool>,
    done: bool,
}

impl DigraphIter {
    fn current(&self) -> Digraph {
        let n = self.n;
        let r = self.space.relation_count;
        let block = n * n;
        let mut edges = vec![Vec::new(); r];
        for (k, list) in edges.iter_mut().enumerate() {
            let base = (r - 1 - k) * block;
            for slot in 0..block {
                if self.edge_bits[base + slot] {
                    list.push((slot / n, slot % n));
                }
            }
        }
        let labels = self
            .labeling
            .iter()
            .map(|&s| self.space.alphabet[s].clone())
            .collect();
        Digraph::from_sorted(labels, edges)
    }

    fn advance(&mut self) {
        // Edge counter first (innermost), then the labeling, then the node count.
        for bit in self.edge_bits.iter_mut() {
            *bit = !*bit;
            if *bit {
                return;
            }
        }
        let sigma = self.space.alphabet.len();
        for digit in self.labeling.iter_mut().rev() {
            *digit += 1;
            if *digit < sigma {
                return;
            }
            *digit = 0;
        }
        self.n += 1;
        if self.n > self.space.max_nodes {
            self.done = true;
            return;
        }
        self.labeling = vec![0; self.n];
        self.edge_bits = vec![false; self.n * self.n * self.space.relation_count];
    }
}

impl Iterator for DigraphIter {
    type Item = Digraph;

    fn next(&mut self) -> Option<Digraph> {
        if self.done {
            return None;
        }
        let g = self.current();
        self.advance();
        Some(g)
    }
}

pub fn enumerate_pointed_digraphs<S: AsRef<str>>(
    alphabet: &[S],
    relation_count: usize,
    max_nodes: usize,
) -> impl Iterator<Item = PointedDigraph> {
    DigraphSpace::new(alphabet, relation_count, max_nodes).pointed()
}

/// Every word of length `1..=max_len` over `alphabet` as a pointed dipath, shorter
/// words first, lexicographic within a length.
pub fn enumerate_dipaths<S: AsRef<str>>(
    alphabet: &[S],
    max_len: usize,
) -> impl Iterator<Item = (Vec<String>, PointedDigraph)> {
    words(alphabet, max_len).map(|w| {
        let pg = dipath_of_word(&w).expect("words are nonempty");
        (w, pg)
    })
}

/// Nonempty words up to `max_len`, by length then lexicographically.
pub fn words<S: AsRef<str>>(alphabet: &[S], max_len: usize) -> impl Iterator<Item = Vec<String>> {
    let alphabet: Vec<String> = alphabet.iter().map(|s| s.as_ref().to_owned()).collect();
    let sigma = alphabet.len();
    let mut digits: Vec<usize> = vec![0];
    let mut done = sigma == 0 || max_len == 0;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let word = digits.iter().map(|&d| alphabet[d].clone()).collect();
        let mut carry = true;
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < sigma {
                carry = false;
                break;
            }
            *d = 0;
        }
        if carry {
            if digits.len() == max_len {
                done = true;
            } else {
                digits = vec![0; digits.len() + 1];
            }
        }
        Some(word)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Digraph {
        Digraph::new(1, vec![(1..n).map(|i| (i - 1, i)).collect()], vec!["a"; n]).unwrap()
    }

    #[test]
    fn smallest_graphs() {
        let g = Digraph::with_node_count(1, 1, vec![vec![]], vec!["a"]).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);

        let g = Digraph::with_node_count(2, 1, vec![vec![(0, 1)]], vec!["a", "b"]).unwrap();
        assert!(classify(&g).is_dipath);

        let empty: Vec<&str> = vec![];
        assert!(Digraph::with_node_count(0, 1, vec![], empty).is_err());
    }

    #[test]
    fn malformed_graphs() {
        assert!(Digraph::new(1, vec![vec![(0, 2)]], vec!["a", "a"]).is_err());
        assert!(Digraph::with_node_count(3, 1, vec![], vec!["a", "a"]).is_err());
        assert!(Digraph::new(0, vec![], vec!["a"]).is_err());
        assert!(Digraph::from_triples(1, vec!["a", "a"], &[(1, 0, 1)]).is_err());
        assert!(PointedDigraph::new(chain(2), 2).is_err());
    }

    #[test]
    fn duplicate_edges_are_merged() {
        let g = Digraph::new(1, vec![vec![(0, 1), (0, 1)]], vec!["a", "b"]).unwrap();
        assert_eq!(g.edges(0), &[(0, 1)]);
        assert_eq!(g.incoming(0, 1), &[0]);
    }

    #[test]
    fn classify_chain_and_trees() {
        let c = classify(&chain(3));
        assert!(c.is_dipath && c.is_ordered && c.is_ditree);
        assert_eq!(c.root, Some(2));

        // Leaves 1 (relation 0) and 2 (relation 1) feed the root 0.
        let t = Digraph::from_triples(2, vec!["a"; 3], &[(0, 1, 0), (1, 2, 0)]).unwrap();
        let c = classify(&t);
        assert!(c.is_ditree && c.is_ordered && !c.is_dipath);
        assert_eq!(c.root, Some(0));

        let cycle = Digraph::new(1, vec![vec![(0, 1), (1, 0)]], vec!["a", "a"]).unwrap();
        assert_eq!(classify(&cycle), GraphClass::NONE);
    }

    #[test]
    fn classify_rejects_non_trees() {
        // Relation 1 used without relation 0: a ditree, but not ordered.
        let t = Digraph::from_triples(2, vec!["a"; 2], &[(1, 1, 0)]).unwrap();
        let c = classify(&t);
        assert!(c.is_ditree && !c.is_ordered);

        // Same pair in both relations: two ways to the root.
        let t = Digraph::from_triples(2, vec!["a"; 2], &[(0, 1, 0), (1, 1, 0)]).unwrap();
        assert!(!classify(&t).is_ditree);

        // Two children in the same relation: a ditree, not ordered.
        let t = Digraph::new(1, vec![vec![(1, 0), (2, 0)]], vec!["a"; 3]).unwrap();
        let c = classify(&t);
        assert!(c.is_ditree && !c.is_ordered && !c.is_dipath);

        // Disconnected.
        let t = Digraph::new(1, vec![vec![]], vec!["a"; 2]).unwrap();
        assert!(!classify(&t).is_ditree);

        // Self-loop.
        let t = Digraph::new(1, vec![vec![(0, 0)]], vec!["a"]).unwrap();
        assert!(!classify(&t).is_ditree);

        // A 2-relational chain is an ordered ditree but not a dipath.
        let t = Digraph::from_triples(2, vec!["a"; 2], &[(0, 0, 1)]).unwrap();
        let c = classify(&t);
        assert!(c.is_ordered && !c.is_dipath);
    }

    #[test]
    fn dipath_examples() {
        let p = dipath_of_word(&["a"]).unwrap();
        assert_eq!(p.graph().node_count(), 1);
        assert_eq!(p.point(), 0);

        let p = dipath_of_word(&["a", "b"]).unwrap();
        assert_eq!(p.graph().labels(), &["a", "b"]);
        assert_eq!(p.graph().edges(0), &[(0, 1)]);
        assert_eq!(p.point(), 1);

        let empty: [&str; 0] = [];
        assert!(dipath_of_word(&empty).is_err());
    }

    #[test]
    fn dipaths_classify_as_dipaths() {
        for (w, pg) in enumerate_dipaths(&["a", "b"], 6) {
            let c = classify(pg.graph());
            assert!(c.is_dipath, "{w:?}");
            assert_eq!(c.root, Some(pg.point()));
        }
    }

    #[test]
    fn unravel_examples() {
        let pg = PointedDigraph::new(chain(3), 1).unwrap();
        let t = tree_unravel(&pg, 0);
        assert_eq!(t.graph().node_count(), 1);
        assert_eq!(t.graph().label(0), "a");

        let looped = PointedDigraph::new(
            Digraph::new(1, vec![vec![(0, 0)]], vec!["a"]).unwrap(),
            0,
        )
        .unwrap();
        let t = tree_unravel(&looped, 2);
        assert_eq!(t.graph().node_count(), 3);
        assert!(classify(t.graph()).is_dipath);

        // 0 feeds both 1 and 2, which both feed 3.
        let diamond =
            Digraph::new(1, vec![vec![(0, 1), (0, 2), (1, 3), (2, 3)]], vec!["a"; 4]).unwrap();
        let t = tree_unravel(&PointedDigraph::new(diamond, 3).unwrap(), 2);
        assert_eq!(t.graph().node_count(), 5);
        assert_eq!(classify(t.graph()).root, Some(0));
    }

    #[test]
    fn unravel_copies_per_relation() {
        let g = Digraph::from_triples(2, vec!["a", "b"], &[(0, 1, 0), (1, 1, 0)]).unwrap();
        let t = tree_unravel(&PointedDigraph::new(g, 0).unwrap(), 1);
        assert_eq!(t.graph().node_count(), 3);
        assert!(classify(t.graph()).is_ditree);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_pointed_digraphs(&["a"], 1, 1).count(), 2);
        assert_eq!(enumerate_pointed_digraphs(&["a", "b"], 1, 1).count(), 4);
        // 2 one-node items plus 2^4 edge sets × 2 points.
        assert_eq!(enumerate_pointed_digraphs(&["a"], 1, 2).count(), 2 + 32);
        assert_eq!(DigraphSpace::new(&["a"], 1, 2).count_pointed(), 34);

        let two_node_dipath = dipath_of_word(&["a", "a"]).unwrap();
        assert!(enumerate_pointed_digraphs(&["a"], 1, 2).any(|pg| pg == two_node_dipath));

        assert_eq!(enumerate_dipaths(&["a", "b"], 2).count(), 6);
        assert_eq!(enumerate_dipaths(&["a"], 3).count(), 3);
        assert_eq!(enumerate_dipaths(&["a"], 1).count(), 1);
    }

    #[test]
    fn enumeration_order_is_lexicographic() {
        let space = DigraphSpace::new(&["a", "b"], 2, 1);
        let seen: Vec<(String, usize, usize)> = space
            .digraphs()
            .map(|g| (g.label(0).to_owned(), g.edges(0).len(), g.edges(1).len()))
            .collect();
        assert_eq!(
            seen,
            vec![
                ("a".into(), 0, 0),
                ("a".into(), 0, 1),
                ("a".into(), 1, 0),
                ("a".into(), 1, 1),
                ("b".into(), 0, 0),
                ("b".into(), 0, 1),
                ("b".into(), 1, 0),
                ("b".into(), 1, 1),
            ]
        );
    }

    #[test]
    fn enumeration_is_complete_and_distinct_on_two_nodes() {
        use std::collections::HashSet;
        let all: HashSet<PointedDigraph> = enumerate_pointed_digraphs(&["a"], 1, 2)
            .filter(|pg| pg.graph().node_count() == 2)
            .collect();
        assert_eq!(all.len(), 32);
    }
}
