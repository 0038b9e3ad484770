//! The two readings of quotient forcing agree: reductions (every extension
//! of `p` is compatible with `q`) and atom quantification in the completion
//! (`q` lies in the quotient at every atom below `p`).

use forcelab_core::embed::{check_complete_suborder, forces_unchecked, quotient_forces};
use forcelab_core::enumerate::{inclusions_into, posets_up_to};
use forcelab_core::{Poset, PosetInclusion, QuotientName};

fn agree_on(inc: &PosetInclusion) -> usize {
    let qn = QuotientName::new(inc).expect("complete suborder");
    let mut pairs = 0;
    for p in 0..inc.small().len() {
        for q in 0..inc.large().len() {
            assert_eq!(
                qn.forces(p, q),
                forces_unchecked(inc, p, q),
                "p={} q={} in {:?} -> {:?}",
                inc.small().label(p),
                inc.large().label(q),
                inc.small().labels(),
                inc.large().labels()
            );
            pairs += 1;
        }
    }
    pairs
}

#[test]
fn readings_agree_on_every_complete_inclusion_up_to_six() {
    let mut pairs = 0;
    let mut complete = 0;
    for large in posets_up_to(6) {
        for inc in inclusions_into(&large) {
            if check_complete_suborder(&inc) {
                complete += 1;
                pairs += agree_on(&inc);
            }
        }
    }
    assert!(complete > 1000 && pairs > 10_000, "{complete} inclusions, {pairs} pairs");
}

#[test]
fn readings_agree_on_trees_and_products() {
    let t1 = Poset::binary_tree(1);
    let t2 = Poset::binary_tree(2);
    agree_on(&PosetInclusion::by_labels(&t1, &t2).unwrap());
    let v = Poset::antichain_over_bottom(2);
    let prod = t1.product(&v);
    let inj: Vec<usize> = (0..t1.len()).map(|x| x * v.len()).collect();
    let inc = PosetInclusion::new(t1.clone(), prod, inj).unwrap();
    assert!(check_complete_suborder(&inc));
    agree_on(&inc);
}

#[test]
fn checked_forcing_refuses_incomplete_inclusions() {
    let large = Poset::from_covers(["0", "a", "b", "c"].map(String::from).to_vec(), 0, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
    let small = large.subposet(&[0, 1, 2]).unwrap();
    let inc = PosetInclusion::new(small, large, vec![0, 1, 2]).unwrap();
    assert!(quotient_forces(&inc, 0, 0).is_err());
    assert!(QuotientName::new(&inc).is_err());
}
