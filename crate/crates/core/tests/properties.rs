use dawb_core::automata::{ProductMode, StateId};
use dawb_core::classical::{dfa_to_forgetful, word_run};
use dawb_core::emptiness::reachable_sets;
use dawb_core::generate::{random_automaton, random_forgetful, random_quasi_acyclic, random_word_automaton, Shape};
use dawb_core::graphs::{classify, dipath_of_word, tree_unravel};
use dawb_core::io::{from_json, read_automaton, read_graph, to_json, write_automaton, write_graph};
use dawb_core::runtime::visited_state_sequence;
use dawb_core::{
    is_quasi_acyclic, monovisionize, product, Budget, Digraph, DistAutomaton, Init, PcpInstance, PointedDigraph,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn shape() -> impl Strategy<Value = Shape> {
    (1usize..=2, 1usize..=2, 1usize..=3).prop_map(|(s, r, q)| Shape::new(s, r, q))
}

fn pointed(symbols: usize, relations: usize) -> impl Strategy<Value = PointedDigraph> {
    (1usize..=3).prop_flat_map(move |n| {
        (
            prop::collection::vec(0..symbols, n),
            prop::collection::vec(prop::collection::vec((0..n, 0..n), 0..=n * n), relations),
            0..n,
        )
            .prop_map(move |(labels, edges, point)| {
                let labels: Vec<String> = labels.iter().map(|&i| char::from(b'a' + i as u8).to_string()).collect();
                PointedDigraph::new(Digraph::new(relations, edges, labels).unwrap(), point).unwrap()
            })
    })
}

fn with_graph() -> impl Strategy<Value = (Shape, u64, PointedDigraph)> {
    shape().prop_flat_map(|s| (Just(s), any::<u64>(), pointed(s.symbols, s.relations)))
}

/// `a` with one extra state that nothing enters and that stays put.
fn with_fresh_sink(a: &DistAutomaton) -> DistAutomaton {
    let n = a.state_count();
    let mut names: Vec<String> = a.states().map(|q| a.state_name(q)).collect();
    names.push("sink".into());
    DistAutomaton::from_fn(
        a.alphabet().to_vec(),
        a.relation_count(),
        names,
        a.init().clone(),
        &a.accepting_states(),
        |label, q, sets| {
            if q.index() == n {
                return q;
            }
            let inner: Vec<Vec<StateId>> = sets
                .iter()
                .map(|s| s.iter().copied().filter(|p| p.index() < n).collect())
                .collect();
            a.next(label, q, &inner)
        },
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_files_round_trip((_, _, pg) in with_graph()) {
        prop_assert_eq!(read_graph(&write_graph(&pg)).unwrap(), pg);
    }

    #[test]
    fn automaton_files_round_trip(s in shape(), seed: u64, per_label: bool) {
        let a = random_automaton(&mut ChaCha8Rng::seed_from_u64(seed), s, per_label).unwrap();
        let text = write_automaton(&a).unwrap();
        let b = read_automaton(&text).unwrap();
        prop_assert_eq!(b.table(), a.table());
        prop_assert_eq!(write_automaton(&b).unwrap(), text);
    }

    #[test]
    fn pcp_files_round_trip(tiles in prop::collection::btree_map(
        prop::sample::select(vec![3u64, 5, 7, 11, 13]),
        ("[01]{1,4}", "[01]{1,4}"),
        1..4,
    )) {
        let inst = PcpInstance { tiles };
        prop_assert!(inst.validate().is_ok());
        prop_assert_eq!(from_json::<PcpInstance>(&to_json(&inst)).unwrap(), inst);
    }

    #[test]
    fn unraveling_is_a_ditree_with_the_same_run((s, seed, pg) in with_graph(), depth in 0usize..=4) {
        let a = random_automaton(&mut ChaCha8Rng::seed_from_u64(seed), s, true).unwrap();
        let tree = tree_unravel(&pg, depth);
        let class = classify(tree.graph());
        prop_assert!(class.is_ditree);
        prop_assert_eq!(class.root, Some(tree.point()));
        prop_assert_eq!(
            visited_state_sequence(&a, &pg, depth).unwrap(),
            visited_state_sequence(&a, &tree, depth).unwrap()
        );
    }

    #[test]
    fn point_states_lie_in_the_reachable_sets((s, seed, pg) in with_graph()) {
        let a = random_forgetful(&mut ChaCha8Rng::seed_from_u64(seed), s).unwrap();
        let sets = reachable_sets(&a, &Budget::default()).unwrap();
        for (t, q) in visited_state_sequence(&a, &pg, 5).unwrap().into_iter().enumerate() {
            prop_assert!(sets.at(t).contains(&q), "round {} state {:?}", t, q);
        }
    }

    #[test]
    fn fresh_sinks_keep_quasi_acyclicity(s in shape(), seed: u64, qa: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = if qa {
            random_quasi_acyclic(&mut rng, s).unwrap()
        } else {
            random_automaton(&mut rng, s, false).unwrap()
        };
        let b = Budget::default();
        prop_assert_eq!(is_quasi_acyclic(&with_fresh_sink(&a), &b).unwrap(), is_quasi_acyclic(&a, &b).unwrap());
    }

    #[test]
    fn products_of_quasi_acyclic_automata_are_quasi_acyclic(s in shape(), seed: u64, union: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a1 = random_quasi_acyclic(&mut rng, s).unwrap();
        let a2 = random_quasi_acyclic(&mut rng, s).unwrap();
        let mode = if union { ProductMode::Union } else { ProductMode::Intersection };
        prop_assert!(is_quasi_acyclic(&product(&a1, &a2, mode).unwrap(), &Budget::default()).unwrap());
    }

    #[test]
    fn monovisionize_agrees_on_dipaths(seed: u64, states in 1usize..=3, word in prop::collection::vec("[ab]", 1..=4)) {
        let a = random_automaton(&mut ChaCha8Rng::seed_from_u64(seed), Shape::new(2, 1, states), true).unwrap();
        let m = monovisionize(&a).unwrap();
        let pg = dipath_of_word(&word).unwrap();
        let b = Budget::default();
        prop_assert_eq!(
            dawb_core::decide_acceptance(&a, &pg, &b).unwrap().accepted,
            dawb_core::decide_acceptance(&m, &pg, &b).unwrap().accepted
        );
    }

    #[test]
    fn word_automata_embed(seed: u64, states in 1usize..=4, word in prop::collection::vec("[ab]", 1..=8)) {
        let w = random_word_automaton(&mut ChaCha8Rng::seed_from_u64(seed), 2, states).unwrap();
        let a = dfa_to_forgetful(&w).unwrap();
        prop_assert!(matches!(a.init(), Init::State(_)));
        let pg = dipath_of_word(&word).unwrap();
        prop_assert_eq!(
            dawb_core::decide_acceptance(&a, &pg, &Budget::default()).unwrap().accepted,
            word_run(&w, &word).unwrap()
        );
    }
}
