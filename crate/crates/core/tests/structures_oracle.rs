use std::collections::{BTreeSet, HashMap};

use manyminds::causal::Docket;
use manyminds::structures::{
    canonicalize, has_alternation, immediate_successors, ordered_successors_b1, ordered_successors_b2, validate,
    DocketAlphabet, LinkSet, SwitchingStructure,
};
use manyminds_oracles::combinatorics::{self as oracle, Links};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn key(s: &SwitchingStructure) -> u128 {
    oracle::encode(&s.docket().past_masks(), s.phi())
}

fn valid_structures(m: usize) -> Vec<SwitchingStructure> {
    let mut out = Vec::new();
    oracle::for_each_ascending_docket(m, &mut |pred| {
        let d = Docket::from_past_masks(pred).unwrap();
        for phi in oracle::all_labelings(m, 1) {
            let s = SwitchingStructure::new(1, d.clone(), phi).unwrap();
            if validate(&s).is_valid() {
                out.push(s);
            }
        }
    });
    out
}

#[test]
fn alternation_matches_subsequence_search() {
    for len in 0..=8 {
        for bits in 0u32..(1 << len) {
            let signs: Vec<i32> = (0..len).map(|i| if bits & (1 << i) != 0 { 1 } else { -1 }).collect();
            assert_eq!(has_alternation(&signs), oracle::has_alternating_subsequence(&signs), "{signs:?}");
        }
    }
}

#[test]
fn b1_counts_match_deletion_oracle_up_to_five() {
    let mut counts: HashMap<u128, usize> = HashMap::new();
    for m_child in 5..=6 {
        oracle::b1_by_deletion(m_child, 1, &mut |parent, _, _| *counts.entry(parent).or_default() += 1);
    }
    let alphabet = DocketAlphabet::default();
    for m in 4..=5 {
        for s in valid_structures(m) {
            let got = ordered_successors_b1(&s, &alphabet);
            assert_eq!(got.len(), counts[&key(&s)], "{s}");
        }
    }
}

#[test]
fn b2_counts_match_positional_oracle_for_spacelike_cross_links() {
    let alphabet = DocketAlphabet {
        cross: LinkSet::SPACELIKE,
        fresh: LinkSet::ANY,
    };
    let links = Links {
        ordered: false,
        spacelike: true,
    };
    for s in valid_structures(4).into_iter().chain(valid_structures(5).into_iter().step_by(37)) {
        let expected = oracle::b2_positional(&s.docket().past_masks(), links, Links::ANY);
        let got = ordered_successors_b2(&s, &alphabet);
        assert_eq!(got.len(), 2 * expected.len(), "{s}");
    }
}

#[test]
fn minimal_structure_successor_sets_match_oracle() {
    let s = SwitchingStructure::minimal();
    let alphabet = DocketAlphabet::chained_new_switch();
    let parent_key = oracle::encode(&s.docket().past_masks(), s.phi());

    let mut b1_children = BTreeSet::new();
    oracle::b1_by_deletion(5, 1, &mut |parent, pred, phi| {
        if parent == parent_key {
            b1_children.insert(oracle::encode(pred, phi));
        }
    });
    let got_b1: BTreeSet<u128> = ordered_successors_b1(&s, &alphabet).iter().map(key).collect();
    assert_eq!(got_b1, b1_children);

    let chain = Links {
        ordered: true,
        spacelike: false,
    };
    let parent_pred = s.docket().past_masks();
    let mut b2_children = BTreeSet::new();
    oracle::b2_by_deletion(4, Links::ANY, chain, &mut |parent, pred, positions| {
        if parent == parent_pred.as_slice() {
            for first in [1, -1] {
                let mut phi = Vec::new();
                let mut old = s.phi().iter();
                let mut k = 0;
                for i in 0..8 {
                    if positions.contains(&i) {
                        phi.push(if k % 2 == 0 { 2 * first } else { -2 * first });
                        k += 1;
                    } else {
                        phi.push(*old.next().unwrap());
                    }
                }
                b2_children.insert(oracle::encode(pred, &phi));
            }
        }
    });
    let got_b2: BTreeSet<u128> = ordered_successors_b2(&s, &alphabet).iter().map(key).collect();
    assert_eq!(got_b2, b2_children);

    // Orbits of the oracle children, each represented by its smallest key.
    let mut orbits = BTreeSet::new();
    for &c in &b1_children {
        orbits.insert((1, c));
    }
    for child in ordered_successors_b2(&s, &alphabet) {
        let orbit = oracle::orbit(&child.docket().past_masks(), child.phi(), 2);
        orbits.insert((2, *orbit.iter().next().unwrap()));
    }
    assert_eq!(immediate_successors(&s, &alphabet).len(), orbits.len());
}

#[test]
fn canonical_form_is_constant_on_oracle_orbits() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s = SwitchingStructure::minimal();
    let pool: Vec<_> = ordered_successors_b2(&s, &DocketAlphabet::chained_new_switch()).into_iter().collect();
    for _ in 0..40 {
        let child = pool.choose(&mut rng).unwrap();
        let c = canonicalize(child);
        let orbit: Vec<u128> = oracle::orbit(&child.docket().past_masks(), child.phi(), 2).into_iter().collect();
        assert!(orbit.contains(&key(c.structure())));
        for _ in 0..5 {
            let (pred, phi) = oracle::decode(orbit[rng.random_range(0..orbit.len())]);
            let member = SwitchingStructure::new(2, Docket::from_past_masks(&pred).unwrap(), phi).unwrap();
            assert_eq!(canonicalize(&member), c);
        }
    }
}
