//! Small bit-level set types.
//!
//! [`BitSet`] is a growable-at-construction set of element indices used for
//! rows of order relations. [`AtomSet`] is a set of completion atoms packed
//! into one word; every element of a finite Boolean algebra is stored this
//! way.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{BitAnd, BitOr, Not};

/// Fixed-capacity set of `usize` indices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self::new(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::new(len);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Capacity (number of representable indices).
    pub fn capacity(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn intersects(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            core::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Largest number of atoms an [`AtomSet`] can hold.
pub const MAX_ATOMS: usize = 64;

/// A set of atoms of a finite Boolean algebra, one bit per atom.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AtomSet(pub u64);

impl AtomSet {
    pub const EMPTY: AtomSet = AtomSet(0);

    pub fn full(atoms: usize) -> Self {
        debug_assert!(atoms <= MAX_ATOMS);
        if atoms == 64 {
            AtomSet(u64::MAX)
        } else {
            AtomSet((1u64 << atoms) - 1)
        }
    }

    pub fn singleton(atom: usize) -> Self {
        debug_assert!(atom < MAX_ATOMS);
        AtomSet(1 << atom)
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = usize>) -> Self {
        atoms
            .into_iter()
            .fold(AtomSet::EMPTY, |s, a| s | AtomSet::singleton(a))
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, atom: usize) -> bool {
        atom < MAX_ATOMS && self.0 & (1 << atom) != 0
    }

    #[inline]
    pub fn intersects(self, other: AtomSet) -> bool {
        self.0 & other.0 != 0
    }

    #[inline]
    pub fn is_subset(self, other: AtomSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn count(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Complement relative to an algebra with `atoms` atoms.
    pub fn complement(self, atoms: usize) -> Self {
        AtomSet(!self.0 & AtomSet::full(atoms).0)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut w = self.0;
        core::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(b)
        })
    }

    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }
}

impl BitAnd for AtomSet {
    type Output = AtomSet;
    fn bitand(self, rhs: AtomSet) -> AtomSet {
        AtomSet(self.0 & rhs.0)
    }
}

impl BitOr for AtomSet {
    type Output = AtomSet;
    fn bitor(self, rhs: AtomSet) -> AtomSet {
        AtomSet(self.0 | rhs.0)
    }
}

/// Raw bit complement. Use [`AtomSet::complement`] to stay inside an algebra.
impl Not for AtomSet {
    type Output = AtomSet;
    fn not(self) -> AtomSet {
        AtomSet(!self.0)
    }
}

impl fmt::Debug for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitset_basic_ops() {
        let mut a = BitSet::from_indices(130, [0, 5, 64, 129]);
        let b = BitSet::from_indices(130, [5, 129]);
        assert_eq!(a.count(), 4);
        assert!(b.is_subset(&a));
        assert!(!a.is_subset(&b));
        assert_eq!(a.to_vec(), [0, 5, 64, 129]);
        a.difference_with(&b);
        assert_eq!(a.to_vec(), [0, 64]);
        assert!(!a.intersects(&b));
        assert!(!a.contains(200));
    }

    #[test]
    fn atomset_complement_stays_inside() {
        let s = AtomSet::from_atoms([0, 2]);
        assert_eq!(s.complement(3), AtomSet::singleton(1));
        assert_eq!(AtomSet::full(64).count(), 64);
        assert_eq!(AtomSet::EMPTY.first(), None);
        assert_eq!(s.iter().collect::<Vec<_>>(), [0, 2]);
    }
}
