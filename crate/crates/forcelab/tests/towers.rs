//! The shipped length-3 tower chain. Set `FORCELAB_BLESS=1` to regenerate
//! `fixtures/valid/towers.fl`.

use forcelab::doc::Document;
use forcelab::dsl::parse;
use forcelab::emit::to_dsl;
use forcelab::lab::{left_pair_map, product_growth, verify_tower_laws, LabConfig};
use forcelab_core::tower::{tower_chain_merge, tower_leq, tower_leq_by_labels};
use forcelab_core::{Poset, SweetModel, Tower, TowerLeqWitness};

const PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/valid/towers.fl");

/// `tree1, tree1, tree2` with discrete classes on the non-root nodes.
fn base() -> Tower {
    let t1 = Poset::binary_tree(1);
    let t2 = Poset::binary_tree(2);
    let nonroot = |p: &Poset| (0..p.len()).filter(|&x| x != p.bottom()).collect::<Vec<_>>();
    let m1 = SweetModel::discrete(t1.clone(), nonroot(&t1), 1).unwrap();
    let m2 = SweetModel::discrete(t2.clone(), nonroot(&t2), 1).unwrap();
    Tower::by_labels(vec![m1.clone(), m1, m2]).unwrap()
}

fn expected() -> String {
    let b = base();
    let chain = product_growth(&b, 2).unwrap().expect("no bottom obstruction");
    let mut doc = Document::default();
    doc.insert_tower("base", &b);
    doc.insert_tower("grown1", &chain[0].tower);
    doc.insert_tower("grown2", &chain[1].tower);
    format!("# Length-3 towers: base <= grown1 <= grown2, each step a product with {{0,a,b}}.\n# Generated by tests/towers.rs.\n\n{}", to_dsl(&doc))
}

#[test]
fn fixture_is_current() {
    let want = expected();
    if std::env::var_os("FORCELAB_BLESS").is_some() {
        std::fs::write(PATH, &want).unwrap();
    }
    let have = std::fs::read_to_string(PATH).unwrap();
    assert!(have == want, "towers.fl is stale; rerun with FORCELAB_BLESS=1");
}

#[test]
fn shipped_chain_merges() {
    let doc = parse(&std::fs::read_to_string(PATH).unwrap()).unwrap();
    let ts: Vec<Tower> = ["base", "grown1", "grown2"].iter().map(|n| doc.tower(n).unwrap()).collect();
    assert!(ts.iter().all(|t| t.len() == 3 && t.validate().holds()));
    let all = TowerLeqWitness::all(3);
    let maps: Vec<Vec<usize>> = ts.windows(2).map(|w| left_pair_map(w[0].top().poset(), w[1].top().poset()).unwrap()).collect();
    for (w, m) in ts.windows(2).zip(&maps) {
        assert!(tower_leq(&w[0], &w[1], m, &all).unwrap().holds());
        // the product relabels every condition
        assert!(tower_leq_by_labels(&w[0], &w[1], &all).is_err());
    }
    let merged = tower_chain_merge(&ts, &maps, &[all.clone(), all.clone()]).unwrap();
    assert!(merged.holds(), "{:?}", merged.leq);
    assert_eq!(merged.leq.len(), 3);
    assert_eq!(merged.tower, ts[2]);
    assert_eq!(ts[2].top().poset().len(), 7 * 3 * 3);
}

#[test]
fn tower_laws_hold_on_the_corpus() {
    let r = verify_tower_laws(&LabConfig::default()).unwrap();
    assert!(r.passed(), "{}", r.to_json());
    assert!(r.stat("chain_merge") >= 3);
    assert_eq!(r.stat("reflexive"), forcelab::lab::corpus_towers().unwrap().len() as u64);
}
