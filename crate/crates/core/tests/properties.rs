use proptest::prelude::*;

use forcelab_core::amalgam::{amalgamate_posets, check_identification};
use forcelab_core::completion::{generated_subalgebra, intersect_subalgebras, regular_open_completion};
use forcelab_core::embed::{check_complete_suborder, is_complete_suborder, is_complete_suborder_via_reductions};
use forcelab_core::enumerate::inclusions_into;
use forcelab_core::iterate::two_step_equivalence;
use forcelab_core::sweet::{validate_extends_along, validate_sweet};
use forcelab_core::{AtomSet, CompleteAlgebra, Poset, PosetInclusion, Subalgebra, SweetModel};

/// Naturally labeled poset from the strict relations `i < j` picked by
/// `edges` (upper triangle, row major), closed transitively.
fn poset_from(n: usize, edges: &[bool]) -> Poset {
    let mut rel = vec![vec![false; n]; n];
    let mut e = edges.iter();
    for i in 0..n {
        rel[i][i] = true;
        for j in i + 1..n {
            rel[i][j] = i == 0 || *e.next().unwrap_or(&false);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if rel[i][k] && rel[k][j] {
                    rel[i][j] = true;
                }
            }
        }
    }
    Poset::from_le((0..n).map(|i| format!("x{i}")).collect(), 0, |a, b| rel[a][b]).unwrap()
}

fn poset(max: usize) -> impl Strategy<Value = Poset> {
    (1..=max).prop_flat_map(|n| proptest::collection::vec(any::<bool>(), n * n).prop_map(move |e| poset_from(n, &e)))
}

fn partition(atoms: usize) -> impl Strategy<Value = Subalgebra> {
    proptest::collection::vec(0..atoms, atoms).prop_map(move |labels| {
        let mut blocks = vec![AtomSet::EMPTY; atoms];
        for (a, &l) in labels.iter().enumerate() {
            blocks[l] = blocks[l] | AtomSet::singleton(a);
        }
        Subalgebra::from_blocks(atoms, blocks.into_iter().filter(|b| !b.is_empty())).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn completion_is_a_dense_embedding(p in poset(8)) {
        let ba = regular_open_completion(&p).unwrap();
        prop_assert_eq!(ba.value(p.bottom()), ba.full());
        for x in 0..p.len() {
            prop_assert!(!ba.value(x).is_empty());
            for y in 0..p.len() {
                if p.le(x, y) {
                    prop_assert!(ba.value(y).is_subset(ba.value(x)));
                }
                prop_assert_eq!(p.compat(x, y), ba.value(x).intersects(ba.value(y)));
            }
        }
        for a in 0..ba.atom_count() {
            prop_assert!((0..p.len()).any(|x| ba.value(x) == AtomSet::singleton(a)));
        }
    }

    #[test]
    fn product_completion_multiplies_atoms(p in poset(5), q in poset(5)) {
        let (a, b) = (regular_open_completion(&p).unwrap(), regular_open_completion(&q).unwrap());
        let pq = regular_open_completion(&p.product(&q)).unwrap();
        prop_assert_eq!(pq.atom_count(), a.atom_count() * b.atom_count());
    }

    #[test]
    fn complete_suborder_criteria_agree(p in poset(7)) {
        for inc in inclusions_into(&p) {
            prop_assert_eq!(is_complete_suborder(&inc).unwrap(), is_complete_suborder_via_reductions(&inc));
        }
    }

    #[test]
    fn two_step_is_equivalent(p in poset(6)) {
        for inc in inclusions_into(&p).into_iter().filter(check_complete_suborder) {
            prop_assert!(two_step_equivalence(&inc).unwrap());
        }
    }

    #[test]
    fn trivial_base_amalgam_is_the_product(p in poset(4), q in poset(4)) {
        let (a, b) = (regular_open_completion(&p).unwrap(), regular_open_completion(&q).unwrap());
        let base = CompleteAlgebra::with_atoms(1).unwrap();
        let inst = amalgamate_posets(&base, &p, &q, &[a.full()], &[b.full()]).unwrap();
        prop_assert_eq!(inst.poset(), &p.product(&q));
        prop_assert!(check_identification(&inst));
        for x in 0..p.len() {
            for y in 0..q.len() {
                prop_assert!(inst.is_member(x, y) && inst.is_member_by_witness(x, y));
            }
        }
    }

    #[test]
    fn subalgebra_meet_is_the_common_part(s in partition(6), t in partition(6)) {
        let m = intersect_subalgebras(&s, &t).unwrap();
        prop_assert!(m.is_subalgebra_of(&s) && m.is_subalgebra_of(&t));
        prop_assert_eq!(&m, &intersect_subalgebras(&t, &s).unwrap());
        let common: Vec<AtomSet> = s.members().into_iter().filter(|&x| t.contains(x)).collect();
        prop_assert_eq!(m.members(), common);
        for x in m.members() {
            prop_assert_eq!(m.decode(m.encode(x)), x);
        }
    }

    #[test]
    fn generated_subalgebra_contains_its_seeds(s in partition(5)) {
        let a = CompleteAlgebra::with_atoms(5).unwrap();
        let g = generated_subalgebra(&a, s.blocks()).unwrap();
        prop_assert_eq!(g, s);
    }

    #[test]
    fn discrete_models_on_maximal_elements_are_sweet(p in poset(7), levels in 1usize..3) {
        let m = SweetModel::discrete(p.clone(), p.maximal_elements(), levels).unwrap();
        prop_assert!(validate_sweet(&m).holds());
        let id: Vec<usize> = (0..p.len()).collect();
        prop_assert!(validate_extends_along(&m, &m, &id).unwrap().holds());
    }
}

#[test]
fn identity_inclusion_is_complete() {
    let p = Poset::binary_tree(2);
    let inc = PosetInclusion::identity(&p);
    assert!(is_complete_suborder(&inc).unwrap() && is_complete_suborder_via_reductions(&inc));
    assert!(two_step_equivalence(&inc).unwrap());
}
