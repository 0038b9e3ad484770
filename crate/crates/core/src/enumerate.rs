//! Exhaustive generators for small instances.
//!
//! Posets come naturally labeled (every strict relation `i < j` has
//! `i < j` as indices, element 0 is the bottom) and labeled `p0, p1, ..`.
//! No isomorphism reduction is attempted.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::bits::{AtomSet, BitSet};
use crate::completion::Subalgebra;
use crate::embed::PosetInclusion;
use crate::poset::Poset;

/// All naturally labeled posets with exactly `n ≥ 1` elements and bottom 0.
pub fn natural_posets(n: usize) -> Vec<Poset> {
    assert!(n >= 1, "a poset has at least its bottom");
    let labels: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    // down[k] = strict down-set of k, always containing 0 for k > 0
    let mut out = Vec::new();
    let mut down: Vec<BitSet> = vec![BitSet::new(n); n];
    extend_naturally(n, 1, &mut down, &labels, &mut out);
    out
}

fn extend_naturally(n: usize, k: usize, down: &mut Vec<BitSet>, labels: &[String], out: &mut Vec<Poset>) {
    if k >= n {
        let mut up = vec![BitSet::new(n); n];
        for (j, d) in down.iter().enumerate() {
            up[j].insert(j);
            for i in d.iter() {
                up[i].insert(j);
            }
        }
        out.push(Poset::from_up_sets(labels.to_vec(), 0, up).expect("natural labeling is a partial order"));
        return;
    }
    // choose the down-closed subset of 1..k strictly below k; 0 always is
    for mask in 0u64..(1u64 << (k - 1)) {
        let mut d = BitSet::new(n);
        d.insert(0);
        for i in 1..k {
            if mask >> (i - 1) & 1 == 1 {
                d.insert(i);
            }
        }
        if d.iter().all(|i| down[i].is_subset(&d)) {
            down[k] = d;
            extend_naturally(n, k + 1, down, labels, out);
        }
    }
    down[k] = BitSet::new(n);
}

/// All naturally labeled posets with `1..=max` elements.
pub fn posets_up_to(max: usize) -> Vec<Poset> {
    (1..=max).flat_map(natural_posets).collect()
}

/// Inclusions of every induced subposet containing the bottom.
pub fn inclusions_into(large: &Poset) -> Vec<PosetInclusion> {
    let n = large.len();
    let others: Vec<usize> = (0..n).filter(|&i| i != large.bottom()).collect();
    (0u64..(1u64 << others.len()))
        .map(|mask| {
            let mut members = vec![large.bottom()];
            members.extend(others.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &i)| i));
            members.sort_unstable();
            let small = large.subposet(&members).expect("members are in range");
            PosetInclusion::new(small, large.clone(), members).expect("induced subposet")
        })
        .collect()
}

/// All partitions of `n` atoms, as subalgebras, coarsest first within
/// restricted-growth order.
pub fn subalgebras(n: usize) -> Vec<Subalgebra> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    partitions_rec(n, 0, 0, &mut rgs, &mut out);
    out
}

fn partitions_rec(n: usize, i: usize, used: usize, rgs: &mut [usize], out: &mut Vec<Subalgebra>) {
    if i == n {
        let mut blocks = vec![AtomSet::EMPTY; used];
        for (a, &b) in rgs.iter().enumerate() {
            blocks[b] = blocks[b] | AtomSet::singleton(a);
        }
        out.push(Subalgebra::from_blocks(n, blocks).expect("restricted growth strings are partitions"));
        return;
    }
    let limit = if i == 0 { 1 } else { used + 1 };
    for b in 0..limit {
        rgs[i] = b;
        partitions_rec(n, i + 1, used.max(b + 1), rgs, out);
    }
}

/// All surjections `{0..n} -> {0..k}` as value vectors.
pub fn surjections(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut f = vec![0usize; n];
    loop {
        let mut hit = AtomSet::EMPTY;
        for &v in &f {
            hit = hit | AtomSet::singleton(v);
        }
        if hit == AtomSet::full(k) {
            out.push(f.clone());
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            f[i] += 1;
            if f[i] < k {
                break;
            }
            f[i] = 0;
            i += 1;
        }
    }
}

/// Atom images of a surjection: base atom `b` goes to the atoms `f` sends
/// to `b`.
pub fn surjection_images(f: &[usize], k: usize) -> Vec<AtomSet> {
    let mut out = vec![AtomSet::EMPTY; k];
    for (a, &b) in f.iter().enumerate() {
        out[b] = out[b] | AtomSet::singleton(a);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        // naturally labeled posets with a bottom adjoined: 1, 1, 2, 7, 40
        let counts: Vec<usize> = (1..=5).map(|n| natural_posets(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 7, 40]);
        let bell: Vec<usize> = (0..=5).map(|n| subalgebras(n).len()).collect();
        assert_eq!(bell[1..], [1, 2, 5, 15, 52]);
        assert_eq!(surjections(3, 2).len(), 6);
        assert_eq!(surjections(3, 3).len(), 6);
        assert_eq!(surjections(2, 3).len(), 0);
    }

    #[test]
    fn posets_are_distinct_and_natural() {
        let ps = natural_posets(4);
        for (i, p) in ps.iter().enumerate() {
            assert_eq!(p.bottom(), 0);
            for a in 0..4 {
                for b in 0..a {
                    assert!(!p.le(a, b));
                }
            }
            assert!(ps[..i].iter().all(|q| q != p));
        }
    }

    #[test]
    fn inclusions_cover_all_subsets() {
        let p = Poset::antichain_over_bottom(2);
        let incs = inclusions_into(&p);
        assert_eq!(incs.len(), 4);
        assert!(incs.iter().all(|i| i.injection()[0] == 0));
    }
}
