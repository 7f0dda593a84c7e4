//! Property-based tests: algebraic laws of word normalization, stability of
//! the graph pipeline under presentation changes, and consistency between
//! the structural queries.

use std::str::FromStr;

use proptest::prelude::*;

use psl2z::sampler::{RngState, SubgroupSampler};
use psl2z::stallings::{stallings_graph, StallingsGraph, ValidationMode};
use psl2z::subgroup_props::{basis, index, isomorphism_type};
use psl2z::words::Word;

fn word_strategy(max_len: usize) -> impl Strategy<Value = Word> {
    proptest::collection::vec(
        prop_oneof![Just('a'), Just('A'), Just('b'), Just('B')],
        0..=max_len,
    )
    .prop_map(|cs| Word::from_str(&cs.into_iter().collect::<String>()).unwrap())
}

fn generator_sets(max_words: usize, max_len: usize) -> impl Strategy<Value = Vec<Word>> {
    proptest::collection::vec(word_strategy(max_len), 0..=max_words)
}

proptest! {
    #[test]
    fn normalization_is_idempotent(w in word_strategy(24)) {
        let n = w.normalize();
        prop_assert_eq!(n.normalize(), n);
    }

    #[test]
    fn inverses_cancel(w in word_strategy(24)) {
        prop_assert!(w.concat(&w.inverse()).normalize().is_empty());
        prop_assert!(w.inverse().concat(&w).normalize().is_empty());
    }

    #[test]
    fn normalization_is_a_congruence(u in word_strategy(16), v in word_strategy(16)) {
        let direct = u.concat(&v).normalize();
        let piecewise = u.normalize().concat(&v.normalize()).normalize();
        prop_assert_eq!(direct, piecewise);
    }

    #[test]
    fn generators_and_their_products_are_members(gens in generator_sets(4, 8)) {
        let g = stallings_graph(&gens);
        prop_assert!(g.is_valid(ValidationMode::Rooted));
        for w in &gens {
            prop_assert!(g.contains(w));
            prop_assert!(g.contains(&w.inverse()));
        }
        for u in &gens {
            for v in &gens {
                prop_assert!(g.contains(&u.concat(v)));
            }
        }
    }

    #[test]
    fn membership_is_invariant_under_normalization(
        gens in generator_sets(3, 8),
        w in word_strategy(12),
    ) {
        let g = stallings_graph(&gens);
        prop_assert_eq!(g.contains(&w), g.contains(&w.normalize()));
    }

    #[test]
    fn presentation_changes_do_not_move_the_subgroup(gens in generator_sets(4, 8)) {
        let g = stallings_graph(&gens);
        // Reversing the list and inverting every word spans the same
        // subgroup.
        let alt: Vec<Word> = gens.iter().rev().map(Word::inverse).collect();
        prop_assert_eq!(stallings_graph(&alt).canonical_form(), g.canonical_form());
        // So does adjoining redundant words.
        let mut extended = gens.clone();
        if let (Some(u), Some(v)) = (gens.first(), gens.last()) {
            extended.push(u.concat(v));
            extended.push(v.inverse());
            extended.push(Word::empty());
        }
        prop_assert_eq!(
            stallings_graph(&extended).canonical_form(),
            g.canonical_form()
        );
    }

    #[test]
    fn bases_certify_the_type_and_regenerate(gens in generator_sets(4, 8)) {
        let g = stallings_graph(&gens);
        let iso = isomorphism_type(&g);
        let b = basis(&g);
        prop_assert_eq!(b.b2.len(), iso.l2);
        prop_assert_eq!(b.b3.len(), iso.l3);
        prop_assert_eq!(b.free_rank(), iso.r);
        for w in &b.b2 {
            prop_assert!(w.concat(w).normalize().is_empty());
        }
        for w in &b.b3 {
            prop_assert!(w.concat(w).concat(w).normalize().is_empty());
        }
        let words = b.all_words();
        for w in &words {
            prop_assert!(g.contains(w));
        }
        prop_assert_eq!(stallings_graph(&words).canonical_form(), g.canonical_form());
    }

    #[test]
    fn conjugation_round_trips_and_preserves_structure(
        gens in generator_sets(3, 6),
        w in word_strategy(8),
    ) {
        let g = stallings_graph(&gens);
        let conj = g.conjugate(&w);
        prop_assert!(conj.is_valid(ValidationMode::Rooted));
        // Conjugate subgroups are isomorphic and share their index.
        let (iso, iso_c) = (isomorphism_type(&g), isomorphism_type(&conj));
        prop_assert_eq!((iso.l2, iso.l3, iso.r), (iso_c.l2, iso_c.l3, iso_c.r));
        prop_assert_eq!(index(&conj), index(&g));
        // Conjugating back restores the original graph.
        let back = conj.conjugate(&w.inverse());
        prop_assert_eq!(back.canonical_form(), g.canonical_form());
    }

    #[test]
    fn canonical_relabel_is_idempotent(seed in any::<u64>(), n in 1usize..=10) {
        let g = SubgroupSampler::new(10)
            .sample(n, &mut RngState::new(seed))
            .unwrap();
        let once = g.canonical_relabel();
        prop_assert_eq!(once.canonical_relabel().canonical_form(), once.canonical_form());
        prop_assert_eq!(once.canonical_form(), g.canonical_form());
    }

    #[test]
    fn json_round_trip_preserves_the_graph(seed in any::<u64>(), n in 1usize..=12) {
        let g = SubgroupSampler::new(12)
            .sample(n, &mut RngState::new(seed))
            .unwrap();
        let back = StallingsGraph::from_json_str(&g.to_json_string()).unwrap();
        prop_assert!(back.is_valid(ValidationMode::Rooted));
        prop_assert_eq!(back.canonical_form(), g.canonical_form());
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed(seed in any::<u64>(), n in 1usize..=10) {
        let sampler = SubgroupSampler::new(10);
        let a = sampler.sample(n, &mut RngState::new(seed)).unwrap();
        let b = sampler.sample(n, &mut RngState::new(seed)).unwrap();
        prop_assert_eq!(a.canonical_form(), b.canonical_form());
    }
}
