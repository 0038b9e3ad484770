//! Finite partial orders with a least element.
//!
//! `le(p, q)` reads "q is stronger than p". Elements are identified by
//! index; every element also carries a label used by the text formats and
//! for label-based identification of sub-posets.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::bits::BitSet;
use crate::{Error, Result};

/// Default cap on the size of a poset whose maximal antichains are
/// enumerated.
pub const DEFAULT_ANTICHAIN_CAP: usize = 12;

/// A finite forcing notion: a partial order with an explicit bottom.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poset {
    labels: Vec<String>,
    /// `up[p]` = conditions stronger than or equal to `p`.
    up: Vec<BitSet>,
    /// `down[p]` = conditions weaker than or equal to `p`.
    down: Vec<BitSet>,
    bottom: usize,
}

impl core::fmt::Debug for Poset {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let covers: Vec<_> = self
            .covers()
            .into_iter()
            .map(|(a, b)| format!("{}<{}", self.labels[a], self.labels[b]))
            .collect();
        f.debug_struct("Poset")
            .field("elements", &self.labels)
            .field("bottom", &self.labels[self.bottom])
            .field("covers", &covers)
            .finish()
    }
}

impl Poset {
    /// Builds a poset from an order predicate. Checks the partial-order
    /// axioms and that `bottom` lies below every element.
    pub fn from_le<F>(labels: Vec<String>, bottom: usize, le: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> bool,
    {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidPoset("no elements".into()));
        }
        let mut up = Vec::with_capacity(n);
        for p in 0..n {
            up.push(BitSet::from_indices(n, (0..n).filter(|&q| le(p, q))));
        }
        Self::from_up_sets(labels, bottom, up)
    }

    /// Builds a poset from its up-sets (`up[p]` holds every `q` with `p <= q`).
    pub fn from_up_sets(labels: Vec<String>, bottom: usize, up: Vec<BitSet>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidPoset("no elements".into()));
        }
        if up.len() != n || up.iter().any(|r| r.capacity() != n) {
            return Err(Error::InvalidPoset("relation size mismatch".into()));
        }
        if bottom >= n {
            return Err(Error::UnknownElement { index: bottom, len: n });
        }
        let mut seen = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            if let Some(j) = seen.insert(l.as_str(), i) {
                return Err(Error::InvalidPoset(format!(
                    "label {l:?} used by elements {j} and {i}"
                )));
            }
        }
        for p in 0..n {
            if !up[p].contains(p) {
                return Err(Error::InvalidPoset(format!("{} is not <= itself", labels[p])));
            }
            for q in up[p].iter() {
                if q != p && up[q].contains(p) {
                    return Err(Error::InvalidPoset(format!(
                        "antisymmetry fails for {} and {}",
                        labels[p], labels[q]
                    )));
                }
                if !up[q].is_subset(&up[p]) {
                    return Err(Error::InvalidPoset(format!(
                        "transitivity fails above {} <= {}",
                        labels[p], labels[q]
                    )));
                }
            }
        }
        if up[bottom].count() != n {
            return Err(Error::InvalidPoset(format!(
                "{} is not below every element",
                labels[bottom]
            )));
        }
        let mut down: Vec<BitSet> = (0..n).map(|_| BitSet::new(n)).collect();
        for p in 0..n {
            for q in up[p].iter() {
                down[q].insert(p);
            }
        }
        Ok(Poset {
            labels,
            up,
            down,
            bottom,
        })
    }

    /// Builds a poset as the reflexive-transitive closure of cover pairs
    /// `(weaker, stronger)`.
    pub fn from_covers(labels: Vec<String>, bottom: usize, covers: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        let mut up: Vec<BitSet> = (0..n).map(|p| BitSet::from_indices(n, [p])).collect();
        for &(a, b) in covers {
            if a >= n || b >= n {
                return Err(Error::UnknownElement { index: a.max(b), len: n });
            }
            up[a].insert(b);
        }
        // Warshall closure on rows.
        for k in 0..n {
            let row_k = up[k].clone();
            for row in up.iter_mut() {
                if row.contains(k) {
                    row.union_with(&row_k);
                }
            }
        }
        Self::from_up_sets(labels, bottom, up)
    }

    /// The one-element forcing notion.
    pub fn trivial() -> Self {
        Self::from_covers(labels(["0"]), 0, &[]).expect("trivial poset")
    }

    /// Chain `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Self {
        let covers: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_covers((0..n).map(|i| i.to_string()).collect(), 0, &covers)
            .expect("chain is a poset")
    }

    /// Bottom plus `k` pairwise incompatible conditions. Labels: `0`, `a`,
    /// `b`, ... (or `x1`, `x2`, ... past `z`).
    pub fn antichain_over_bottom(k: usize) -> Self {
        let mut ls = alloc::vec![String::from("0")];
        for i in 0..k {
            ls.push(letter_label(i));
        }
        let covers: Vec<_> = (1..=k).map(|i| (0, i)).collect();
        Self::from_covers(ls, 0, &covers).expect("flat poset")
    }

    /// Complete binary tree of the given depth; nodes are labelled by their
    /// branch word, the root by `r`.
    pub fn binary_tree(depth: usize) -> Self {
        let mut ls = alloc::vec![String::from("r")];
        let mut covers = Vec::new();
        let mut frontier = alloc::vec![(0usize, String::new())];
        for _ in 0..depth {
            let mut next = Vec::new();
            for (idx, word) in frontier {
                for bit in ['0', '1'] {
                    let mut w = word.clone();
                    w.push(bit);
                    ls.push(w.clone());
                    let child = ls.len() - 1;
                    covers.push((idx, child));
                    next.push((child, w));
                }
            }
            frontier = next;
        }
        Self::from_covers(ls, 0, &covers).expect("tree is a poset")
    }

    /// Product order; element `(p, q)` has index `p * other.len() + q`.
    pub fn product(&self, other: &Poset) -> Poset {
        let m = other.len();
        let ls = (0..self.len() * m)
            .map(|i| format!("({},{})", self.labels[i / m], other.labels[i % m]))
            .collect();
        Poset::from_le(ls, self.bottom * m + other.bottom, |x, y| {
            self.le(x / m, y / m) && other.le(x % m, y % m)
        })
        .expect("product of posets is a poset")
    }

    /// Induced sub-poset on `members` (must contain the bottom). Indices of
    /// the result follow the sorted order of `members`.
    pub fn subposet(&self, members: &[usize]) -> Result<Poset> {
        let mut ms = members.to_vec();
        ms.sort_unstable();
        ms.dedup();
        for &m in &ms {
            self.check(m)?;
        }
        let b = ms
            .iter()
            .position(|&m| m == self.bottom)
            .ok_or_else(|| Error::InvalidPoset("sub-poset misses the bottom".into()))?;
        let ls = ms.iter().map(|&m| self.labels[m].clone()).collect();
        Poset::from_le(ls, b, |x, y| self.le(ms[x], ms[y]))
    }

    /// Copy with new labels (same length, unique).
    pub fn relabeled(&self, labels: Vec<String>) -> Result<Poset> {
        if labels.len() != self.len() {
            return Err(Error::InvalidPoset("label count mismatch".into()));
        }
        Poset::from_up_sets(labels, self.bottom, self.up.clone())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, p: usize) -> &str {
        &self.labels[p]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn check(&self, p: usize) -> Result<()> {
        if p < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownElement {
                index: p,
                len: self.len(),
            })
        }
    }

    /// `p <= q`: `q` is stronger than `p`. Panics on out-of-range indices.
    #[inline]
    pub fn le(&self, p: usize, q: usize) -> bool {
        self.up[p].contains(q)
    }

    pub fn up(&self, p: usize) -> &BitSet {
        &self.up[p]
    }

    pub fn down(&self, p: usize) -> &BitSet {
        &self.down[p]
    }

    /// Compatibility without index checks.
    #[inline]
    pub fn compat(&self, p: usize, q: usize) -> bool {
        self.up[p].intersects(&self.up[q])
    }

    /// Two conditions are compatible iff some condition is stronger than
    /// both.
    pub fn compatible(&self, p: usize, q: usize) -> Result<bool> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.compat(p, q))
    }

    pub fn is_maximal(&self, p: usize) -> bool {
        self.up[p].count() == 1
    }

    pub fn maximal_elements(&self) -> Vec<usize> {
        (0..self.len()).filter(|&p| self.is_maximal(p)).collect()
    }

    /// Hasse diagram: pairs `(p, q)` with `p < q` and nothing strictly
    /// between, sorted.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for p in 0..self.len() {
            for q in self.up[p].iter() {
                if q == p {
                    continue;
                }
                let between = self.up[p]
                    .iter()
                    .any(|r| r != p && r != q && self.le(r, q));
                if !between {
                    out.push((p, q));
                }
            }
        }
        out
    }

    pub fn is_antichain(&self, set: &[usize]) -> bool {
        set.iter().enumerate().all(|(i, &p)| {
            set[i + 1..]
                .iter()
                .all(|&q| p != q && !self.compat(p, q))
        })
    }

    /// Antichain that no element of the poset can be added to.
    pub fn is_maximal_antichain(&self, set: &[usize]) -> bool {
        self.is_antichain(set) && (0..self.len()).all(|r| set.iter().any(|&a| self.compat(r, a)))
    }

    /// Every maximal antichain, each sorted, the list sorted
    /// lexicographically. Fails with [`Error::TooLarge`] above `cap`
    /// elements.
    pub fn maximal_antichains_capped(&self, cap: usize) -> Result<Vec<ConditionSet>> {
        if self.len() > cap {
            return Err(Error::TooLarge {
                what: "poset for antichain enumeration",
                size: self.len(),
                cap,
            });
        }
        let n = self.len();
        // Antichains are cliques of the incompatibility graph.
        let incompat: Vec<BitSet> = (0..n)
            .map(|p| BitSet::from_indices(n, (0..n).filter(|&q| !self.compat(p, q))))
            .collect();
        let mut found = Vec::new();
        let mut r = Vec::new();
        bron_kerbosch(&incompat, &mut r, BitSet::full(n), BitSet::new(n), &mut found);
        for s in &mut found {
            s.sort_unstable();
        }
        found.sort();
        Ok(found
            .into_iter()
            .map(|members| ConditionSet {
                universe: n,
                members,
            })
            .collect())
    }

    pub fn maximal_antichains(&self) -> Result<Vec<ConditionSet>> {
        self.maximal_antichains_capped(DEFAULT_ANTICHAIN_CAP)
    }

    fn check_set(&self, s: &ConditionSet) -> Result<()> {
        if s.universe != self.len() {
            return Err(Error::Mismatch(format!(
                "condition set over {} elements used with a poset of {}",
                s.universe,
                self.len()
            )));
        }
        Ok(())
    }

    /// Every condition has an extension in `s`.
    pub fn is_dense(&self, s: &ConditionSet) -> Result<bool> {
        self.check_set(s)?;
        let bits = s.to_bits();
        Ok((0..self.len()).all(|p| self.up[p].intersects(&bits)))
    }

    /// Every condition is compatible with some member of `s`.
    pub fn is_predense(&self, s: &ConditionSet) -> Result<bool> {
        self.check_set(s)?;
        Ok((0..self.len()).all(|p| s.members.iter().any(|&m| self.compat(p, m))))
    }

    /// Down-closure (weaker conditions) of a set.
    pub fn down_closure(&self, set: &BitSet) -> BitSet {
        let mut out = BitSet::new(self.len());
        for p in set.iter() {
            out.union_with(&self.down[p]);
        }
        out
    }
}

fn bron_kerbosch(
    adj: &[BitSet],
    r: &mut Vec<usize>,
    mut p: BitSet,
    mut x: BitSet,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() && x.is_empty() {
        out.push(r.clone());
        return;
    }
    let mut px = p.clone();
    px.union_with(&x);
    let pivot = px
        .iter()
        .max_by_key(|&u| {
            let mut c = p.clone();
            c.intersect_with(&adj[u]);
            c.count()
        })
        .expect("nonempty");
    let mut candidates = p.clone();
    candidates.difference_with(&adj[pivot]);
    for v in candidates.to_vec() {
        r.push(v);
        let mut np = p.clone();
        np.intersect_with(&adj[v]);
        let mut nx = x.clone();
        nx.intersect_with(&adj[v]);
        bron_kerbosch(adj, r, np, nx, out);
        r.pop();
        p.remove(v);
        x.insert(v);
    }
}

/// A subset of a poset's conditions (antichains, dense sets, equivalence
/// classes). Members are kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConditionSet {
    universe: usize,
    members: Vec<usize>,
}

impl ConditionSet {
    pub fn new(parent: &Poset, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut ms: Vec<usize> = members.into_iter().collect();
        for &m in &ms {
            parent.check(m)?;
        }
        ms.sort_unstable();
        ms.dedup();
        Ok(ConditionSet {
            universe: parent.len(),
            members: ms,
        })
    }

    pub fn all(parent: &Poset) -> Self {
        ConditionSet {
            universe: parent.len(),
            members: (0..parent.len()).collect(),
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, p: usize) -> bool {
        self.members.binary_search(&p).is_ok()
    }

    pub fn to_bits(&self) -> BitSet {
        BitSet::from_indices(self.universe, self.members.iter().copied())
    }
}

pub(crate) fn labels<const N: usize>(ls: [&str; N]) -> Vec<String> {
    ls.iter().map(|s| String::from(*s)).collect()
}

fn letter_label(i: usize) -> String {
    if i < 26 {
        let c = (b'a' + i as u8) as char;
        c.to_string()
    } else {
        format!("x{}", i + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vee() -> Poset {
        Poset::antichain_over_bottom(2)
    }

    /// Brute-force oracle: every subset that is an antichain and maximal.
    fn brute_maximal_antichains(p: &Poset) -> Vec<Vec<usize>> {
        let n = p.len();
        let mut out = Vec::new();
        for mask in 1u32..(1 << n) {
            let set: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            if p.is_maximal_antichain(&set) {
                out.push(set);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn compatibility_examples() {
        let p = vee();
        let (a, b) = (p.index_of("a").unwrap(), p.index_of("b").unwrap());
        // oracle: no r with a <= r and b <= r
        assert!(!(0..p.len()).any(|r| p.le(a, r) && p.le(b, r)));
        assert!(!p.compatible(a, b).unwrap());
        for q in 0..p.len() {
            assert!(p.compatible(q, q).unwrap());
            assert!(p.compatible(p.bottom(), q).unwrap());
        }
        assert_eq!(
            p.compatible(0, 9),
            Err(Error::UnknownElement { index: 9, len: 3 })
        );
    }

    #[test]
    fn maximal_antichain_examples() {
        let v = vee();
        let got: Vec<_> = v
            .maximal_antichains()
            .unwrap()
            .iter()
            .map(|s| s.members().to_vec())
            .collect();
        assert_eq!(got, brute_maximal_antichains(&v));
        assert_eq!(got, alloc::vec![alloc::vec![0], alloc::vec![1, 2]]);

        let t = Poset::trivial();
        assert_eq!(t.maximal_antichains().unwrap().len(), 1);

        let c = Poset::chain(3);
        let got: Vec<_> = c
            .maximal_antichains()
            .unwrap()
            .iter()
            .map(|s| s.members().to_vec())
            .collect();
        assert_eq!(got, alloc::vec![alloc::vec![0], alloc::vec![1], alloc::vec![2]]);
    }

    #[test]
    fn antichain_enumeration_matches_brute_force_on_trees() {
        for p in [Poset::binary_tree(2), Poset::chain(4).product(&vee())] {
            let got: Vec<_> = p
                .maximal_antichains()
                .unwrap()
                .iter()
                .map(|s| s.members().to_vec())
                .collect();
            assert_eq!(got, brute_maximal_antichains(&p));
        }
    }

    #[test]
    fn antichain_cap_is_enforced() {
        let t = Poset::binary_tree(3);
        assert!(matches!(
            t.maximal_antichains(),
            Err(Error::TooLarge { size: 15, cap: 12, .. })
        ));
        assert!(t.maximal_antichains_capped(15).is_ok());
    }

    #[test]
    fn density_examples() {
        let p = vee();
        let all = ConditionSet::all(&p);
        assert!(p.is_dense(&all).unwrap() && p.is_predense(&all).unwrap());
        let only_a = ConditionSet::new(&p, [1]).unwrap();
        assert!(!p.is_dense(&only_a).unwrap());
        let ab = ConditionSet::new(&p, [1, 2]).unwrap();
        assert!(p.is_dense(&ab).unwrap());
        assert!(ConditionSet::new(&p, [7]).is_err());
        let foreign = ConditionSet::all(&Poset::chain(5));
        assert!(p.is_dense(&foreign).is_err());
    }

    #[test]
    fn rejects_missing_bottom_and_cycles() {
        let ls = labels(["a", "b"]);
        assert!(Poset::from_covers(ls.clone(), 0, &[]).is_err());
        assert!(Poset::from_covers(ls, 0, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn covers_of_chain_and_tree() {
        assert_eq!(Poset::chain(3).covers(), [(0, 1), (1, 2)]);
        assert_eq!(Poset::binary_tree(2).covers().len(), 6);
    }

    #[test]
    fn product_and_subposet() {
        let p = vee().product(&Poset::chain(2));
        assert_eq!(p.len(), 6);
        assert_eq!(p.label(p.bottom()), "(0,0)");
        let s = p.subposet(&[0, 2, 4]).unwrap();
        assert_eq!(s.len(), 3);
        assert!(p.subposet(&[1, 2]).is_err());
    }
}
