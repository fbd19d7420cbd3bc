//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the test fails
//! if any criterion fails or overruns its time limit.
//!
//! Run with `cargo test -p dawb-core --test acceptance -- --nocapture`.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use dawb_core::automata::{is_monovisioned, ProductMode};
use dawb_core::classical::{
    balanced_example, dfa_to_forgetful, forgetful_to_dfa, is_perfectly_balanced, ordered_binary_ditrees,
    word_run, BinaryShape, UNLABELED,
};
use dawb_core::emptiness::{bounded_search, dipath_search, forgetful_witness, reachable_sets};
use dawb_core::generate::{
    random_automaton, random_forgetful, random_monovisioned, random_quasi_acyclic, random_word_automaton, Shape,
};
use dawb_core::graphs::{dipath_of_word, enumerate_pointed_digraphs, tree_unravel, words};
use dawb_core::io::from_json;
use dawb_core::reductions::{
    expected_signal_times, pcp_brute_force, pcp_check_solution, pcp_encode_solution, tm_simulate, tm_to_automaton,
    tm_traversal_check, PcpReduction,
};
use dawb_core::runtime::{trace, visited_state_sequence};
use dawb_core::{
    decide_acceptance, forgetful_empty, is_quasi_acyclic, monovisionize, product, Budget, DistAutomaton,
    PcpInstance, PointedDigraph, TuringMachine,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn accepted(a: &DistAutomaton, pg: &PointedDigraph) -> Result<bool, String> {
    decide_acceptance(a, pg, &Budget::default())
        .map(|d| d.accepted)
        .map_err(|e| e.to_string())
}

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn machine(name: &str) -> TuringMachine {
    from_json(&golden(name)).unwrap()
}

fn all_words(alphabet: &[String], lengths: std::ops::RangeInclusive<usize>) -> Vec<Vec<String>> {
    words(alphabet, *lengths.end())
        .filter(|w| lengths.contains(&w.len()))
        .collect()
}

fn dfa_forward() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let alphabet = vec!["a".to_owned(), "b".to_owned()];
    let universe = all_words(&alphabet, 1..=6);
    if universe.len() != 126 {
        return Err(format!("word universe has {} words", universe.len()));
    }
    for i in 0..20 {
        let states = rng.gen_range(1..=3);
        let w = random_word_automaton(&mut rng, 2, states).map_err(|e| e.to_string())?;
        let a = dfa_to_forgetful(&w).map_err(|e| e.to_string())?;
        for word in &universe {
            let pg = dipath_of_word(word).map_err(|e| e.to_string())?;
            if accepted(&a, &pg)? != word_run(&w, word).map_err(|e| e.to_string())? {
                return Err(format!("automaton {i} disagrees on {word:?}"));
            }
        }
    }
    Ok("20 DFAs x 126 words".into())
}

fn dfa_backward() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let alphabet = vec!["a".to_owned(), "b".to_owned()];
    let universe = all_words(&alphabet, 1..=6);
    for i in 0..20 {
        let states = rng.gen_range(1..=3);
        let a = random_forgetful(&mut rng, Shape::new(2, 1, states)).map_err(|e| e.to_string())?;
        let w = forgetful_to_dfa(&a, &Budget::default()).map_err(|e| e.to_string())?;
        for word in &universe {
            let pg = dipath_of_word(word).map_err(|e| e.to_string())?;
            if accepted(&a, &pg)? != word_run(&w, word).map_err(|e| e.to_string())? {
                return Err(format!("automaton {i} disagrees on {word:?}"));
            }
        }
    }
    Ok("20 forgetful automata x 126 words".into())
}

fn balanced_separation() -> Outcome {
    let a = balanced_example();
    let balanced = BinaryShape::complete(2).to_pointed(UNLABELED);
    if accepted(&a, &balanced)? {
        return Err("balanced 7-node tree accepted".into());
    }
    let chain = BinaryShape::Unary(BinaryShape::Leaf.into()).to_pointed(UNLABELED);
    if !accepted(&a, &chain)? {
        return Err("root with one child rejected".into());
    }
    let mut count = 0;
    for pg in ordered_binary_ditrees(UNLABELED, 15) {
        if accepted(&a, &pg)? == is_perfectly_balanced(&pg).map_err(|e| e.to_string())? {
            return Err(format!("disagreement on a {}-node tree", pg.graph().node_count()));
        }
        count += 1;
    }
    Ok(format!("{count} ordered binary ditrees"))
}

/// Universe shared by the emptiness criteria.
fn forgetful_universe() -> Result<Vec<DistAutomaton>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    (0..50)
        .map(|_| {
            let shape = Shape::new(rng.gen_range(1..=2), rng.gen_range(1..=2), rng.gen_range(1..=4));
            random_forgetful(&mut rng, shape).map_err(|e| e.to_string())
        })
        .collect()
}

fn decider_soundness() -> Outcome {
    let budget = Budget::default();
    let mut nonempty = 0;
    for (i, a) in forgetful_universe()?.iter().enumerate() {
        let v = forgetful_empty(a, &budget).map_err(|e| e.to_string())?;
        if !v.nonempty {
            continue;
        }
        nonempty += 1;
        let (t, q) = (v.first_hit_round.unwrap(), v.hit_state.unwrap());
        let w = forgetful_witness(a, t, q, &budget).map_err(|e| format!("automaton {i}: {e}"))?;
        let seq = visited_state_sequence(a, &w, t).map_err(|e| e.to_string())?;
        if !a.is_accepting(seq[t]) {
            return Err(format!("automaton {i}: witness not accepting at round {t}"));
        }
    }
    Ok(format!("{nonempty} nonempty of 50, every witness accepted"))
}

fn decider_completeness() -> Outcome {
    let mut empty = 0;
    for (i, a) in forgetful_universe()?.iter().enumerate() {
        let v = forgetful_empty(a, &Budget::default()).map_err(|e| e.to_string())?;
        if v.nonempty {
            continue;
        }
        empty += 1;
        let rounds = 1 << a.state_count();
        if let Some(hit) = bounded_search(a, 3, rounds).map_err(|e| e.to_string())? {
            return Err(format!("automaton {i}: search accepted at round {}", hit.round));
        }
    }
    Ok(format!("{empty} empty of 50, bounded search found nothing"))
}

fn gamma_periodicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut universe = forgetful_universe()?;
    for _ in 0..50 {
        let shape = Shape::new(rng.gen_range(1..=2), rng.gen_range(1..=2), rng.gen_range(1..=5));
        universe.push(random_forgetful(&mut rng, shape).map_err(|e| e.to_string())?);
    }
    for (i, a) in universe.iter().enumerate() {
        let r = reachable_sets(a, &Budget::default()).map_err(|e| e.to_string())?;
        let bound = 1usize << a.state_count();
        if r.preperiod + r.period > bound {
            return Err(format!(
                "automaton {i}: preperiod {} + period {} exceeds {bound}",
                r.preperiod, r.period
            ));
        }
    }
    Ok(format!("{} automata repeat within 2^|Q|", universe.len()))
}

fn tm_fixed_points() -> Outcome {
    let err = |e: dawb_core::Error| e.to_string();
    for (file, nodes) in [("m1.json", 2), ("m2.json", 3), ("zigzag.json", 5)] {
        let a = tm_to_automaton(&machine(file)).map_err(err)?;
        let hit = dipath_search(&a, 6, 40).map_err(err)?;
        if hit.as_ref().map(|h| h.word.len()) != Some(nodes) {
            return Err(format!("{file}: minimal dipath {:?}, expected {nodes} nodes", hit.map(|h| h.word.len())));
        }
    }
    let looping = tm_to_automaton(&machine("loop.json")).map_err(err)?;
    if dipath_search(&looping, 6, 40).map_err(err)?.is_some() {
        return Err("non-halting machine accepted a dipath".into());
    }
    for (file, nodes, horizon) in [("m1.json", 2, 6), ("m2.json", 3, 10), ("zigzag.json", 4, 14)] {
        if !tm_traversal_check(&machine(file), nodes, horizon).map_err(err)? {
            return Err(format!("{file}: traversal check failed"));
        }
    }
    let zigzag = machine("zigzag.json");
    let rendered: Vec<String> = tm_simulate(&zigzag, 10)
        .map_err(err)?
        .iter()
        .map(|c| (1..=3).map(|i| c.cell(i, &zigzag.blank).to_string()).collect::<Vec<_>>().join(" "))
        .collect();
    let expected: Vec<String> = golden("zigzag_trace.txt").lines().map(str::to_owned).collect();
    if rendered != expected {
        return Err(format!("zigzag trace {rendered:?} differs from golden"));
    }
    Ok("M1 2 nodes, M2 3 nodes, loop none, traversals agree".into())
}

fn monovision() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let budget = Budget::default();
    for i in 0..20 {
        let shape = Shape::new(rng.gen_range(1..=2), 1, rng.gen_range(1..=3));
        let per_label = rng.gen_bool(0.5);
        let a = random_automaton(&mut rng, shape, per_label).map_err(|e| e.to_string())?;
        let m = monovisionize(&a).map_err(|e| e.to_string())?;
        if is_monovisioned(&m, &budget).map_err(|e| e.to_string())?.is_none() {
            return Err(format!("automaton {i}: result not monovisioned"));
        }
        for word in all_words(a.alphabet(), 1..=4) {
            let pg = dipath_of_word(&word).map_err(|e| e.to_string())?;
            if accepted(&a, &pg)? != accepted(&m, &pg)? {
                return Err(format!("automaton {i}: monovisionize disagrees on {word:?}"));
            }
        }
    }
    let mut disagreements = Vec::new();
    let mut nonempty = 0;
    for i in 0..20 {
        let (symbols, states) = (rng.gen_range(1..=2), rng.gen_range(2..=3));
        let a = random_monovisioned(&mut rng, symbols, states).map_err(|e| e.to_string())?;
        let graph = bounded_search(&a, 3, 12).map_err(|e| e.to_string())?.is_some();
        let dipath = dipath_search(&a, 4, 12).map_err(|e| e.to_string())?.is_some();
        nonempty += usize::from(graph);
        if graph != dipath {
            disagreements.push(format!("automaton {i}: digraph {graph}, dipath {dipath}"));
        }
    }
    if disagreements.is_empty() {
        Ok(format!(
            "20 transformations agree on dipaths; 20 dipath spot checks agree ({nonempty} nonempty)"
        ))
    } else {
        Err(disagreements.join("; "))
    }
}

fn unraveling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..30 {
        let shape = Shape::new(rng.gen_range(1..=2), rng.gen_range(1..=2), rng.gen_range(1..=3));
        let per_label = rng.gen_bool(0.5);
        let a = random_automaton(&mut rng, shape, per_label).map_err(|e| e.to_string())?;
        let n = rng.gen_range(1..=3);
        let pg = &random_pointed_digraph(&mut rng, a.alphabet(), shape.relations, n);
        for t in 0..=4 {
            let tree = tree_unravel(pg, t);
            let original = visited_state_sequence(&a, pg, t).map_err(|e| e.to_string())?;
            let unraveled = visited_state_sequence(&a, &tree, t).map_err(|e| e.to_string())?;
            if original != unraveled {
                return Err(format!("pair {i}, t = {t}: sequences differ"));
            }
        }
    }
    Ok("30 pairs, t <= 4".into())
}

fn random_pointed_digraph(rng: &mut ChaCha8Rng, alphabet: &[String], relations: usize, n: usize) -> PointedDigraph {
    let labels: Vec<String> = (0..n).map(|_| alphabet[rng.gen_range(0..alphabet.len())].clone()).collect();
    let edges = (0..relations)
        .map(|_| {
            (0..n)
                .flat_map(|u| (0..n).map(move |v| (u, v)))
                .filter(|_| rng.gen_bool(0.4))
                .collect()
        })
        .collect();
    let graph = dawb_core::Digraph::new(relations, edges, labels).unwrap();
    PointedDigraph::new(graph, rng.gen_range(0..n)).unwrap()
}

fn pcp_fixed_points() -> Outcome {
    let err = |e: dawb_core::Error| e.to_string();
    let inst: PcpInstance = from_json(&golden("figure_pcp.json")).map_err(err)?;
    let solution = vec![5, 3, 7, 3];
    if pcp_brute_force(&inst, 4) != Some(solution.clone()) {
        return Err("(a) brute force did not find (5,3,7,3)".into());
    }
    let (u, v) = inst.concatenations(&solution).map_err(err)?;
    if u != "010001100" || v != "010001100" || !pcp_check_solution(&inst, &solution).map_err(err)? {
        return Err(format!("(a) concatenations {u} / {v}"));
    }
    let red = PcpReduction::new(&inst).map_err(err)?;
    let pg = pcp_encode_solution(&inst, &solution).map_err(err)?;
    if !accepted(&red.automaton, &pg)? {
        return Err("(b) solution encoding rejected".into());
    }
    for seq in [vec![3, 3], vec![5, 3, 7]] {
        if accepted(&red.automaton, &pcp_encode_solution(&inst, &seq).map_err(err)?)? {
            return Err(format!("(c) encoding of {seq:?} accepted"));
        }
    }
    let tampered = drop_side_fuse_node(&pg, 2);
    if accepted(&red.automaton, &tampered)? {
        return Err("(c) tampered encoding accepted".into());
    }
    if !is_quasi_acyclic(&red.automaton, &Budget::default()).map_err(err)? {
        return Err("(d) reduction is not quasi-acyclic".into());
    }
    let observed = red.signal_rounds(&pg, 320).map_err(err)?;
    let expected: Vec<(Option<usize>, Option<usize>)> = expected_signal_times(&inst, &solution)
        .map_err(err)?
        .iter()
        .map(|t| (Some(t.sigma1 as usize), Some(t.sigma2 as usize)))
        .collect();
    if observed != expected {
        return Err(format!("(e) signal rounds {observed:?}, expected {expected:?}"));
    }
    let round = trace(&red.automaton, &pg, 400).map_err(err)?.accepted_at(&red.automaton);
    Ok(format!(
        "(a)-(e) hold; {} nodes, accepted at round {round:?}",
        pg.graph().node_count()
    ))
}

/// Removes the first node of the side fuse attached to `node`.
fn drop_side_fuse_node(pg: &PointedDigraph, node: usize) -> PointedDigraph {
    let g = pg.graph();
    let mut start = node;
    while let Some(u) = g.incoming(0, start).iter().copied().find(|&u| g.label(u).ends_with('\'')) {
        start = u;
    }
    let keep: Vec<usize> = (0..g.node_count()).filter(|&v| v != start).collect();
    let index = |v: usize| keep.iter().position(|&k| k == v).unwrap();
    let edges = g
        .edges(0)
        .iter()
        .filter(|&&(u, v)| u != start && v != start)
        .map(|&(u, v)| (index(u), index(v)))
        .collect();
    let labels: Vec<String> = keep.iter().map(|&v| g.label(v).to_owned()).collect();
    let graph = dawb_core::Digraph::new(1, vec![edges], labels).unwrap();
    PointedDigraph::new(graph, index(pg.point())).unwrap()
}

fn products() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let budget = Budget::default();
    let mut graphs_checked = 0;
    for i in 0..20 {
        let symbols = rng.gen_range(1..=2);
        let shape = Shape::new(symbols, 1, rng.gen_range(1..=3));
        let per_label = rng.gen_bool(0.5);
        let a1 = random_automaton(&mut rng, shape, per_label).map_err(|e| e.to_string())?;
        let shape = Shape::new(symbols, 1, rng.gen_range(1..=3));
        let per_label = rng.gen_bool(0.5);
        let a2 = random_automaton(&mut rng, shape, per_label).map_err(|e| e.to_string())?;
        let union = product(&a1, &a2, ProductMode::Union).map_err(|e| e.to_string())?;
        let inter = product(&a1, &a2, ProductMode::Intersection).map_err(|e| e.to_string())?;
        for pg in enumerate_pointed_digraphs(a1.alphabet(), 1, 3) {
            let (x, y) = (accepted(&a1, &pg)?, accepted(&a2, &pg)?);
            if accepted(&union, &pg)? != (x || y) || accepted(&inter, &pg)? != (x && y) {
                return Err(format!("pair {i}: product disagrees"));
            }
            graphs_checked += 1;
        }
    }
    for i in 0..20 {
        let shape = Shape::new(rng.gen_range(1..=2), rng.gen_range(1..=2), rng.gen_range(1..=3));
        let a1 = random_quasi_acyclic(&mut rng, shape).map_err(|e| e.to_string())?;
        let a2 = random_quasi_acyclic(&mut rng, shape).map_err(|e| e.to_string())?;
        for mode in [ProductMode::Union, ProductMode::Intersection] {
            let p = product(&a1, &a2, mode).map_err(|e| e.to_string())?;
            if !is_quasi_acyclic(&p, &budget).map_err(|e| e.to_string())? {
                return Err(format!("quasi-acyclic pair {i}: {mode:?} product has a cycle"));
            }
        }
    }
    Ok(format!("{graphs_checked} graph checks; 20 quasi-acyclic pairs preserved"))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, Duration, fn() -> Outcome); 11] = [
        ("1 word automata to forgetful automata", Duration::from_secs(10), dfa_forward),
        ("2 forgetful automata to word automata", Duration::from_secs(30), dfa_backward),
        ("3 balanced ditree separation", Duration::from_secs(60), balanced_separation),
        ("4 emptiness decider soundness", Duration::from_secs(60), decider_soundness),
        ("5 emptiness decider bounded completeness", Duration::from_secs(300), decider_completeness),
        ("6 reachable set periodicity", Duration::from_secs(60), gamma_periodicity),
        ("7 Turing machine reduction fixed points", Duration::from_secs(10), tm_fixed_points),
        ("8 monovision and dipath collapse", Duration::from_secs(300), monovision),
        ("9 tree unraveling", Duration::from_secs(60), unraveling),
        ("10 PCP reduction fixed points", Duration::from_secs(120), pcp_fixed_points),
        ("11 product constructions", Duration::from_secs(120), products),
    ];
    let mut failures = Vec::new();
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > limit => Err(format!("{detail}; took {elapsed:.1?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} ({elapsed:.1?})"),
            Err(why) => {
                println!("FAIL criterion {name}: {why} ({elapsed:.1?})");
                failures.push(name);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
