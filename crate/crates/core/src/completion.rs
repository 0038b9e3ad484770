//! Regular-open completions of finite posets.
//!
//! A finite Boolean algebra is stored on its atoms: each element is the set
//! of atoms below it (an [`AtomSet`]). The strengthening order on the
//! algebra is reverse inclusion, so `b` is stronger than `c` iff `b ⊆ c`,
//! and meet is intersection.
//!
//! Subalgebras of a finite algebra are exactly the partitions of its atoms:
//! the blocks are the atoms of the subalgebra and its members are the
//! unions of blocks.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bits::{AtomSet, BitSet, MAX_ATOMS};
use crate::poset::Poset;
use crate::{Error, Result};

/// Default cap on the atom count of algebras whose subalgebras get
/// enumerated.
pub const DEFAULT_ATOM_CAP: usize = 16;

/// Largest atom count for which [`CompleteAlgebra::condition_poset`] is
/// materialised.
pub const CONDITION_POSET_CAP: usize = 10;

/// A finite Boolean algebra on `atoms` atoms, optionally with a dense map
/// from a source poset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompleteAlgebra {
    atoms: usize,
    source: Option<Poset>,
    dense_map: Vec<AtomSet>,
}

impl CompleteAlgebra {
    /// The full atom-set algebra on `atoms` atoms, with no source poset.
    pub fn with_atoms(atoms: usize) -> Result<Self> {
        if atoms == 0 {
            return Err(Error::InvalidSubalgebra("an algebra needs at least one atom".into()));
        }
        if atoms > MAX_ATOMS {
            return Err(Error::TooLarge {
                what: "algebra",
                size: atoms,
                cap: MAX_ATOMS,
            });
        }
        Ok(CompleteAlgebra {
            atoms,
            source: None,
            dense_map: Vec::new(),
        })
    }

    pub fn atom_count(&self) -> usize {
        self.atoms
    }

    pub fn full(&self) -> AtomSet {
        AtomSet::full(self.atoms)
    }

    pub fn source(&self) -> Option<&Poset> {
        self.source.as_ref()
    }

    /// Value of a source condition. Panics without a source.
    pub fn value(&self, p: usize) -> AtomSet {
        self.dense_map[p]
    }

    pub fn dense_map(&self) -> &[AtomSet] {
        &self.dense_map
    }

    pub fn contains(&self, b: AtomSet) -> bool {
        b.is_subset(self.full())
    }

    pub fn check_element(&self, b: AtomSet) -> Result<()> {
        if self.contains(b) {
            Ok(())
        } else {
            Err(Error::InvalidSubalgebra(format!(
                "{b:?} is not an element of an algebra with {} atoms",
                self.atoms
            )))
        }
    }

    /// All nonzero elements in increasing bit order.
    pub fn nonzero_elements(&self) -> impl Iterator<Item = AtomSet> {
        let full = self.full().bits();
        (1..=full).map(AtomSet)
    }

    /// For each atom, a maximal condition of the source whose value is
    /// exactly that atom. Panics on algebras without a source.
    pub fn atom_generators(&self) -> Vec<usize> {
        let p = self.source.as_ref().expect("completion of a poset");
        let mut gens = alloc::vec![usize::MAX; self.atoms];
        for m in p.maximal_elements() {
            let a = self.dense_map[m].first().expect("nonzero value");
            if gens[a] == usize::MAX {
                gens[a] = m;
            }
        }
        gens
    }

    /// Atom-level view of the algebra as a forcing notion: the nonzero
    /// elements ordered by reverse inclusion. Element `i` is the atom set
    /// with bits `i + 1`; the bottom is the full set.
    pub fn condition_poset(&self) -> Result<Poset> {
        if self.atoms > CONDITION_POSET_CAP {
            return Err(Error::TooLarge {
                what: "algebra for its condition poset",
                size: self.atoms,
                cap: CONDITION_POSET_CAP,
            });
        }
        let n = (1usize << self.atoms) - 1;
        let labels = (1..=n).map(|m| atom_set_label(AtomSet(m as u64))).collect();
        let mut up = Vec::with_capacity(n);
        for i in 0..n {
            let b = (i + 1) as u64;
            // stronger = subsets of b
            up.push(BitSet::from_indices(
                n,
                (0..n).filter(|&j| ((j + 1) as u64) & !b == 0),
            ));
        }
        Poset::from_up_sets(labels, n - 1, up)
    }

    /// Index of a nonzero element inside [`Self::condition_poset`].
    pub fn condition_index(b: AtomSet) -> usize {
        debug_assert!(!b.is_empty());
        (b.bits() - 1) as usize
    }

    pub fn condition_of_index(i: usize) -> AtomSet {
        AtomSet((i + 1) as u64)
    }
}

/// Label used for algebra elements: the atom indices in braces.
pub fn atom_set_label(b: AtomSet) -> String {
    let parts: Vec<String> = b.iter().map(|a| format!("{a}")).collect();
    format!("{{{}}}", parts.join(","))
}

/// Regularisation `U ↦ int(cl(U))` for the topology whose open sets are
/// the up-closed sets: `p` survives iff every extension of `p` has an
/// extension in `U`.
pub fn regularize(p: &Poset, u: &BitSet) -> BitSet {
    BitSet::from_indices(
        p.len(),
        (0..p.len()).filter(|&x| p.up(x).iter().all(|q| p.up(q).intersects(u))),
    )
}

/// The algebra of regular open subsets of `p`, presented on its atoms, with
/// `dense_map(q)` = the regularisation of the cone above `q`.
pub fn regular_open_completion(p: &Poset) -> Result<CompleteAlgebra> {
    let n = p.len();
    let principal: Vec<BitSet> = (0..n).map(|x| regularize(p, p.up(x))).collect();
    // Atoms: minimal nonempty regular opens. Each one is principal.
    let mut atom_sets: Vec<BitSet> = Vec::new();
    for x in 0..n {
        let r = &principal[x];
        let minimal = principal
            .iter()
            .all(|s| !(s.is_subset(r) && s != r && !s.is_empty()));
        if minimal && !atom_sets.contains(r) {
            atom_sets.push(r.clone());
        }
    }
    if atom_sets.len() > MAX_ATOMS {
        return Err(Error::TooLarge {
            what: "completion",
            size: atom_sets.len(),
            cap: MAX_ATOMS,
        });
    }
    let dense_map = principal
        .iter()
        .map(|r| {
            AtomSet::from_atoms(
                atom_sets
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.is_subset(r))
                    .map(|(i, _)| i),
            )
        })
        .collect();
    Ok(CompleteAlgebra {
        atoms: atom_sets.len(),
        source: Some(p.clone()),
        dense_map,
    })
}

/// A subalgebra of a finite algebra, stored as the partition of the
/// parent's atoms into the subalgebra's atoms (blocks).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subalgebra {
    parent_atoms: usize,
    /// Sorted by lowest atom; pairwise disjoint, nonempty, covering.
    blocks: Vec<AtomSet>,
}

impl Subalgebra {
    /// `{0, 1}` inside an algebra with `atoms` atoms.
    pub fn trivial(atoms: usize) -> Self {
        Subalgebra {
            parent_atoms: atoms,
            blocks: alloc::vec![AtomSet::full(atoms)],
        }
    }

    /// The whole parent algebra.
    pub fn whole(atoms: usize) -> Self {
        Subalgebra {
            parent_atoms: atoms,
            blocks: (0..atoms).map(AtomSet::singleton).collect(),
        }
    }

    pub fn from_blocks(parent_atoms: usize, blocks: impl IntoIterator<Item = AtomSet>) -> Result<Self> {
        let mut bs: Vec<AtomSet> = blocks.into_iter().collect();
        let full = AtomSet::full(parent_atoms);
        let mut seen = AtomSet::EMPTY;
        for &b in &bs {
            if b.is_empty() || !b.is_subset(full) || b.intersects(seen) {
                return Err(Error::InvalidSubalgebra(format!(
                    "blocks {bs:?} do not partition {parent_atoms} atoms"
                )));
            }
            seen = seen | b;
        }
        if seen != full {
            return Err(Error::InvalidSubalgebra(format!(
                "blocks {bs:?} do not cover {parent_atoms} atoms"
            )));
        }
        bs.sort_by_key(|b| b.first());
        Ok(Subalgebra {
            parent_atoms,
            blocks: bs,
        })
    }

    /// Builds a subalgebra from an explicit member list, verifying closure
    /// under meet, join and complement.
    pub fn from_members(parent: &CompleteAlgebra, members: &[AtomSet]) -> Result<Self> {
        let n = parent.atom_count();
        let full = parent.full();
        for &m in members {
            parent.check_element(m)?;
        }
        let has = |x: AtomSet| members.contains(&x);
        if !has(AtomSet::EMPTY) || !has(full) {
            return Err(Error::InvalidSubalgebra("missing 0 or 1".into()));
        }
        for &a in members {
            if !has(a.complement(n)) {
                return Err(Error::InvalidSubalgebra(format!("not closed under complement at {a:?}")));
            }
            for &b in members {
                if !has(a & b) || !has(a | b) {
                    return Err(Error::InvalidSubalgebra(format!(
                        "not closed under meet/join at {a:?}, {b:?}"
                    )));
                }
            }
        }
        let blocks = members.iter().copied().filter(|&m| {
            !m.is_empty() && members.iter().all(|&o| o.is_empty() || !o.is_subset(m) || o == m)
        });
        Subalgebra::from_blocks(n, blocks)
    }

    pub fn parent_atoms(&self) -> usize {
        self.parent_atoms
    }

    pub fn blocks(&self) -> &[AtomSet] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Index of the block holding a parent atom.
    pub fn block_of(&self, atom: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.contains(atom))
            .expect("blocks cover the parent")
    }

    /// A parent element belongs iff it is a union of blocks.
    pub fn contains(&self, x: AtomSet) -> bool {
        self.blocks.iter().all(|&b| b.is_subset(x) || !b.intersects(x))
    }

    /// All members, sorted by bits.
    pub fn members(&self) -> Vec<AtomSet> {
        let k = self.blocks.len();
        let mut out: Vec<AtomSet> = (0u64..(1u64 << k)).map(|m| self.decode(AtomSet(m))).collect();
        out.sort();
        out
    }

    /// Parent element for a set of block indices.
    pub fn decode(&self, blocks: AtomSet) -> AtomSet {
        blocks
            .iter()
            .fold(AtomSet::EMPTY, |acc, i| acc | self.blocks[i])
    }

    /// Block indices of a member. Panics if `x` is not a member.
    pub fn encode(&self, x: AtomSet) -> AtomSet {
        debug_assert!(self.contains(x));
        AtomSet::from_atoms(
            self.blocks
                .iter()
                .enumerate()
                .filter(|(_, b)| b.is_subset(x))
                .map(|(i, _)| i),
        )
    }

    /// Smallest member above a parent element (its projection).
    pub fn upper(&self, x: AtomSet) -> AtomSet {
        self.blocks
            .iter()
            .filter(|b| b.intersects(x))
            .fold(AtomSet::EMPTY, |acc, &b| acc | b)
    }

    /// `self ⊆ other` as sets of elements, i.e. `other` refines `self`.
    pub fn is_subalgebra_of(&self, other: &Subalgebra) -> bool {
        self.parent_atoms == other.parent_atoms
            && other.blocks.iter().all(|&b| self.blocks.iter().any(|&s| b.is_subset(s)))
    }

    /// The subalgebra as an algebra in its own right (blocks become atoms).
    pub fn as_algebra(&self) -> CompleteAlgebra {
        CompleteAlgebra::with_atoms(self.blocks.len()).expect("block count within range")
    }
}

/// Smallest subalgebra containing `seeds`.
pub fn generated_subalgebra(a: &CompleteAlgebra, seeds: &[AtomSet]) -> Result<Subalgebra> {
    for &s in seeds {
        a.check_element(s)?;
    }
    // Refine the one-block partition by each seed and its complement.
    let mut blocks = alloc::vec![a.full()];
    for &s in seeds {
        let mut next = Vec::with_capacity(blocks.len() * 2);
        for b in blocks {
            for part in [b & s, b & s.complement(a.atom_count())] {
                if !part.is_empty() {
                    next.push(part);
                }
            }
        }
        blocks = next;
    }
    Subalgebra::from_blocks(a.atom_count(), blocks)
}

/// Element-wise intersection of two subalgebras of the same algebra.
pub fn intersect_subalgebras(s1: &Subalgebra, s2: &Subalgebra) -> Result<Subalgebra> {
    if s1.parent_atoms != s2.parent_atoms {
        return Err(Error::ParentMismatch {
            left: s1.parent_atoms,
            right: s2.parent_atoms,
        });
    }
    // The common members are the unions of blocks of the finest common
    // coarsening: merge blocks that overlap until stable.
    let mut merged: Vec<AtomSet> = Vec::new();
    for &b in s1.blocks.iter().chain(&s2.blocks) {
        let mut cur = b;
        loop {
            let before = cur;
            merged.retain(|&m| {
                if m.intersects(cur) {
                    cur = cur | m;
                    false
                } else {
                    true
                }
            });
            if cur == before {
                break;
            }
        }
        merged.push(cur);
    }
    Subalgebra::from_blocks(s1.parent_atoms, merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::ConditionSet;
    use alloc::vec;

    /// Oracle: on a finite poset the regular open sets correspond to sets
    /// of maximal elements, and a condition's value is the set of maximal
    /// elements above it.
    fn maximal_above(p: &Poset, x: usize) -> Vec<usize> {
        p.maximal_elements().into_iter().filter(|&m| p.le(x, m)).collect()
    }

    fn check_against_oracle(p: &Poset) {
        let a = regular_open_completion(p).unwrap();
        let maxes = p.maximal_elements();
        assert_eq!(a.atom_count(), maxes.len());
        for x in 0..p.len() {
            for y in 0..p.len() {
                let same_oracle = maximal_above(p, x) == maximal_above(p, y);
                assert_eq!(a.value(x) == a.value(y), same_oracle);
                assert_eq!(a.value(x).count(), maximal_above(p, x).len());
            }
        }
    }

    #[test]
    fn completion_examples() {
        let v = Poset::antichain_over_bottom(2);
        let a = regular_open_completion(&v).unwrap();
        assert_eq!(a.atom_count(), 2);
        assert_eq!(a.value(v.bottom()), a.full());
        assert_eq!(a.value(1).count(), 1);
        assert_eq!(a.value(2).count(), 1);
        assert!(!a.value(1).intersects(a.value(2)));

        let c = Poset::chain(3);
        let a = regular_open_completion(&c).unwrap();
        assert_eq!(a.atom_count(), 1);
        assert!(a.dense_map().iter().all(|&b| b == a.full()));

        let t = Poset::trivial();
        let a = regular_open_completion(&t).unwrap();
        assert_eq!(a.atom_count(), 1);
        assert_eq!(a.value(0), a.full());
    }

    #[test]
    fn completion_matches_maximal_element_oracle() {
        for p in [
            Poset::binary_tree(2),
            Poset::chain(2).product(&Poset::antichain_over_bottom(2)),
            Poset::antichain_over_bottom(3),
        ] {
            check_against_oracle(&p);
        }
    }

    #[test]
    fn regularization_is_idempotent() {
        let p = Poset::binary_tree(2);
        let u = BitSet::from_indices(p.len(), [3, 4]);
        let r = regularize(&p, &u);
        assert_eq!(regularize(&p, &r), r);
        // both children of node "0" lie in u, so "0" is in the regularisation
        assert!(r.contains(p.index_of("0").unwrap()));
        let _ = ConditionSet::all(&p);
    }

    #[test]
    fn generated_subalgebra_examples() {
        let a = CompleteAlgebra::with_atoms(3).unwrap();
        assert_eq!(generated_subalgebra(&a, &[]).unwrap(), Subalgebra::trivial(3));
        let atoms: Vec<_> = (0..3).map(AtomSet::singleton).collect();
        assert_eq!(generated_subalgebra(&a, &atoms).unwrap(), Subalgebra::whole(3));
        let s = generated_subalgebra(&a, &[AtomSet::singleton(0)]).unwrap();
        assert_eq!(
            s.members(),
            vec![
                AtomSet::EMPTY,
                AtomSet::from_atoms([0]),
                AtomSet::from_atoms([1, 2]),
                AtomSet::from_atoms([0, 1, 2])
            ]
        );
        assert!(generated_subalgebra(&a, &[AtomSet::singleton(5)]).is_err());
    }

    #[test]
    fn intersection_examples() {
        let a = CompleteAlgebra::with_atoms(3).unwrap();
        let sx = generated_subalgebra(&a, &[AtomSet::singleton(0)]).unwrap();
        let sy = generated_subalgebra(&a, &[AtomSet::singleton(1)]).unwrap();
        assert_eq!(intersect_subalgebras(&sx, &sx).unwrap(), sx);
        assert_eq!(intersect_subalgebras(&sx, &Subalgebra::trivial(3)).unwrap(), Subalgebra::trivial(3));
        assert_eq!(intersect_subalgebras(&sx, &sy).unwrap(), Subalgebra::trivial(3));
        assert!(intersect_subalgebras(&sx, &Subalgebra::trivial(4)).is_err());
    }

    #[test]
    fn from_members_checks_closure() {
        let a = CompleteAlgebra::with_atoms(3).unwrap();
        let bad = [AtomSet::EMPTY, AtomSet::singleton(0), a.full()];
        assert!(Subalgebra::from_members(&a, &bad).is_err());
        let s = generated_subalgebra(&a, &[AtomSet::singleton(2)]).unwrap();
        assert_eq!(Subalgebra::from_members(&a, &s.members()).unwrap(), s);
    }

    #[test]
    fn condition_poset_is_reverse_inclusion() {
        let a = CompleteAlgebra::with_atoms(2).unwrap();
        let p = a.condition_poset().unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(CompleteAlgebra::condition_of_index(p.bottom()), a.full());
        let x = CompleteAlgebra::condition_index(AtomSet::singleton(0));
        assert!(p.le(p.bottom(), x));
        assert_eq!(p.maximal_elements().len(), 2);
    }
}
