//! Complete suborders, reductions and the quotient forcing `(Q:P)`.
//!
//! At finite scale the generic filter of `P` is replaced by the filter of
//! an atom `a` of its completion, `G_a = {p : a ∈ value(p)}`. Forcing
//! statements over `P` become quantifiers over the atoms below a condition.

use alloc::format;
use alloc::vec::Vec;

use crate::bits::{AtomSet, BitSet};
use crate::completion::{regular_open_completion, CompleteAlgebra};
use crate::poset::{ConditionSet, Poset, DEFAULT_ANTICHAIN_CAP};
use crate::{Error, Result};

/// `small ⊆ large` as an order embedding that keeps the bottom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosetInclusion {
    small: Poset,
    large: Poset,
    injection: Vec<usize>,
}

impl PosetInclusion {
    /// Validates injectivity, bottom preservation and that the order of
    /// `small` is the one induced from `large`.
    pub fn new(small: Poset, large: Poset, injection: Vec<usize>) -> Result<Self> {
        if injection.len() != small.len() {
            return Err(Error::InvalidInclusion(format!(
                "{} images for {} elements",
                injection.len(),
                small.len()
            )));
        }
        let mut hit = BitSet::new(large.len());
        for (p, &x) in injection.iter().enumerate() {
            large.check(x)?;
            if hit.contains(x) {
                return Err(Error::InvalidInclusion(format!(
                    "{} is hit twice",
                    large.label(x)
                )));
            }
            hit.insert(x);
            let _ = p;
        }
        if injection[small.bottom()] != large.bottom() {
            return Err(Error::InvalidInclusion("bottom is not sent to bottom".into()));
        }
        for p in 0..small.len() {
            for q in 0..small.len() {
                if small.le(p, q) != large.le(injection[p], injection[q]) {
                    return Err(Error::InvalidInclusion(format!(
                        "order between {} and {} is not preserved",
                        small.label(p),
                        small.label(q)
                    )));
                }
            }
        }
        Ok(PosetInclusion {
            small,
            large,
            injection,
        })
    }

    /// Identifies elements by label.
    pub fn by_labels(small: &Poset, large: &Poset) -> Result<Self> {
        let injection = small
            .labels()
            .iter()
            .map(|l| {
                large
                    .index_of(l)
                    .ok_or_else(|| Error::InvalidInclusion(format!("{l:?} missing from the larger poset")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(small.clone(), large.clone(), injection)
    }

    pub fn identity(p: &Poset) -> Self {
        PosetInclusion {
            small: p.clone(),
            large: p.clone(),
            injection: (0..p.len()).collect(),
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &PosetInclusion) -> Result<Self> {
        if self.large != next.small {
            return Err(Error::InvalidInclusion("composed inclusions do not meet".into()));
        }
        Ok(PosetInclusion {
            small: self.small.clone(),
            large: next.large.clone(),
            injection: self.injection.iter().map(|&x| next.injection[x]).collect(),
        })
    }

    pub fn small(&self) -> &Poset {
        &self.small
    }

    pub fn large(&self) -> &Poset {
        &self.large
    }

    pub fn injection(&self) -> &[usize] {
        &self.injection
    }

    pub fn image(&self, p: usize) -> usize {
        self.injection[p]
    }

    /// Preimage of a large element, if it lies in the image.
    pub fn preimage(&self, x: usize) -> Option<usize> {
        self.injection.iter().position(|&y| y == x)
    }

    /// Incompatible conditions of `small` stay incompatible in `large`.
    pub fn preserves_incompatibility(&self) -> bool {
        let n = self.small.len();
        (0..n).all(|p| {
            (p + 1..n).all(|q| {
                self.small.compat(p, q) || !self.large.compat(self.injection[p], self.injection[q])
            })
        })
    }

    /// Elements of `small` whose image is compatible with `q` in `large`.
    fn compatible_with(&self, q: usize) -> BitSet {
        BitSet::from_indices(
            self.small.len(),
            (0..self.small.len()).filter(|&p| self.large.compat(self.injection[p], q)),
        )
    }
}

/// `small ⋖ large`: every maximal antichain of `small` stays a maximal
/// antichain of `large`. Fails above `cap` elements of `small`.
pub fn is_complete_suborder_capped(inc: &PosetInclusion, cap: usize) -> Result<bool> {
    let antichains = inc.small.maximal_antichains_capped(cap)?;
    Ok(antichains.iter().all(|a| {
        let image: Vec<usize> = a.members().iter().map(|&p| inc.injection[p]).collect();
        inc.large.is_maximal_antichain(&image)
    }))
}

pub fn is_complete_suborder(inc: &PosetInclusion) -> Result<bool> {
    is_complete_suborder_capped(inc, DEFAULT_ANTICHAIN_CAP)
}

/// Conditions `p` of `small` such that every extension of `p` in `small`
/// is compatible with `q` in `large`.
pub fn reductions(inc: &PosetInclusion, q: usize) -> Result<ConditionSet> {
    inc.large.check(q)?;
    let ok = inc.compatible_with(q);
    ConditionSet::new(
        &inc.small,
        (0..inc.small.len()).filter(|&p| inc.small.up(p).is_subset(&ok)),
    )
}

/// Reduction criterion: incompatibility is preserved and every condition
/// of `large` has a reduction.
pub fn is_complete_suborder_via_reductions(inc: &PosetInclusion) -> bool {
    inc.preserves_incompatibility()
        && (0..inc.large.len()).all(|q| {
            let ok = inc.compatible_with(q);
            (0..inc.small.len()).any(|p| inc.small.up(p).is_subset(&ok))
        })
}

/// Picks the antichain criterion when `small` is within the default cap and
/// the reduction criterion otherwise.
pub fn check_complete_suborder(inc: &PosetInclusion) -> bool {
    if inc.small.len() <= DEFAULT_ANTICHAIN_CAP {
        is_complete_suborder(inc).expect("within cap")
    } else {
        is_complete_suborder_via_reductions(inc)
    }
}

/// `p ⊩ q ∈ (Q:P)`. Errors when `small ⋖ large` fails.
pub fn quotient_forces(inc: &PosetInclusion, p: usize, q: usize) -> Result<bool> {
    inc.small.check(p)?;
    inc.large.check(q)?;
    if !is_complete_suborder_via_reductions(inc) {
        return Err(Error::NotCompleteSuborder);
    }
    Ok(forces_unchecked(inc, p, q))
}

/// [`quotient_forces`] without the precondition check.
pub fn forces_unchecked(inc: &PosetInclusion, p: usize, q: usize) -> bool {
    let ok = inc.compatible_with(q);
    inc.small.up(p).is_subset(&ok)
}

/// The quotient `(Q:P)` materialised per completion atom of `P`.
#[derive(Clone, Debug)]
pub struct QuotientName {
    inclusion: PosetInclusion,
    base: CompleteAlgebra,
    /// `table[a]` = conditions of `large` compatible with all of `G_a`.
    table: Vec<BitSet>,
}

impl QuotientName {
    pub fn new(inc: &PosetInclusion) -> Result<Self> {
        if !is_complete_suborder_via_reductions(inc) {
            return Err(Error::NotCompleteSuborder);
        }
        let base = regular_open_completion(&inc.small)?;
        let table = (0..base.atom_count())
            .map(|a| {
                let filter: Vec<usize> = (0..inc.small.len())
                    .filter(|&p| base.value(p).contains(a))
                    .collect();
                BitSet::from_indices(
                    inc.large.len(),
                    (0..inc.large.len()).filter(|&q| {
                        filter
                            .iter()
                            .all(|&p| inc.large.compat(inc.injection[p], q))
                    }),
                )
            })
            .collect();
        Ok(QuotientName {
            inclusion: inc.clone(),
            base,
            table,
        })
    }

    pub fn inclusion(&self) -> &PosetInclusion {
        &self.inclusion
    }

    pub fn base(&self) -> &CompleteAlgebra {
        &self.base
    }

    pub fn atom_count(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self, atom: usize) -> Result<&BitSet> {
        self.table.get(atom).ok_or(Error::UnknownAtom {
            atom,
            atoms: self.table.len(),
        })
    }

    /// `p ⊩ q ∈ (Q:P)` read off the table: `q` lies in the quotient at
    /// every atom below `p`.
    pub fn forces(&self, p: usize, q: usize) -> bool {
        self.base
            .value(p)
            .iter()
            .all(|a| self.table[a].contains(q))
    }

    /// Atoms of `BA(P)` at which `q` belongs to the quotient.
    pub fn support(&self, q: usize) -> AtomSet {
        AtomSet::from_atoms((0..self.table.len()).filter(|&a| self.table[a].contains(q)))
    }
}

/// `(Q:P)` evaluated at the filter of one atom, as a sub-poset of `Q`.
pub fn quotient_at_atom(qn: &QuotientName, atom: usize) -> Result<Poset> {
    let members = qn.table(atom)?.to_vec();
    qn.inclusion.large.subposet(&members)
}

/// A complete embedding of a poset into a finite Boolean algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompleteEmbedding {
    source: Poset,
    target: CompleteAlgebra,
    map: Vec<AtomSet>,
}

impl CompleteEmbedding {
    /// Validates injectivity, order and incompatibility preservation, and
    /// completeness (the images of the maximal conditions join to 1).
    pub fn new(source: Poset, target: CompleteAlgebra, map: Vec<AtomSet>) -> Result<Self> {
        let n = source.len();
        if map.len() != n {
            return Err(Error::InvalidEmbedding(format!("{} images for {n} elements", map.len())));
        }
        for (p, &b) in map.iter().enumerate() {
            if b.is_empty() || !target.contains(b) {
                return Err(Error::InvalidEmbedding(format!(
                    "image of {} is not a nonzero element",
                    source.label(p)
                )));
            }
        }
        for p in 0..n {
            for q in 0..n {
                if p < q && map[p] == map[q] {
                    return Err(Error::InvalidEmbedding(format!(
                        "{} and {} share an image",
                        source.label(p),
                        source.label(q)
                    )));
                }
                if source.le(p, q) && !map[q].is_subset(map[p]) {
                    return Err(Error::InvalidEmbedding(format!(
                        "order {} <= {} not preserved",
                        source.label(p),
                        source.label(q)
                    )));
                }
                if !source.compat(p, q) && map[p].intersects(map[q]) {
                    return Err(Error::InvalidEmbedding(format!(
                        "incompatible {} and {} have overlapping images",
                        source.label(p),
                        source.label(q)
                    )));
                }
            }
        }
        let cover = source
            .maximal_elements()
            .iter()
            .fold(AtomSet::EMPTY, |acc, &m| acc | map[m]);
        if cover != target.full() {
            return Err(Error::InvalidEmbedding(
                "images of a maximal antichain do not join to 1".into(),
            ));
        }
        Ok(CompleteEmbedding { source, target, map })
    }

    /// Boolean embedding of `base` into `target` given by the images of
    /// the atoms of `base`; the source poset is the condition poset of
    /// `base`.
    pub fn from_atom_images(base: &CompleteAlgebra, target: &CompleteAlgebra, images: &[AtomSet]) -> Result<Self> {
        if images.len() != base.atom_count() {
            return Err(Error::InvalidEmbedding(format!(
                "{} atom images for {} atoms",
                images.len(),
                base.atom_count()
            )));
        }
        let source = base.condition_poset()?;
        let map = (0..source.len())
            .map(|i| {
                let b = CompleteAlgebra::condition_of_index(i);
                b.iter().fold(AtomSet::EMPTY, |acc, a| acc | images[a])
            })
            .collect();
        Self::new(source, target.clone(), map)
    }

    pub fn source(&self) -> &Poset {
        &self.source
    }

    pub fn target(&self) -> &CompleteAlgebra {
        &self.target
    }

    pub fn map(&self) -> &[AtomSet] {
        &self.map
    }

    pub fn image(&self, p: usize) -> AtomSet {
        self.map[p]
    }

    /// Completion of the source.
    pub fn base_algebra(&self) -> Result<CompleteAlgebra> {
        regular_open_completion(&self.source)
    }

    /// Extension to the completion of the source, as images of its atoms.
    /// Atom `a` is sent to the image of the maximal condition generating it.
    pub fn atom_images(&self) -> Result<Vec<AtomSet>> {
        let base = self.base_algebra()?;
        let mut images = alloc::vec![AtomSet::EMPTY; base.atom_count()];
        for m in self.source.maximal_elements() {
            let a = base.value(m).first().expect("nonzero value");
            images[a] = self.map[m];
        }
        Ok(images)
    }

    /// Antichain route: the image, with the order induced from the
    /// algebra, is a complete suborder of the nonzero elements.
    pub fn is_complete_via_antichains(&self) -> Result<bool> {
        let conditions = self.target.condition_poset()?;
        let mut image: Vec<usize> = self
            .map
            .iter()
            .map(|&b| CompleteAlgebra::condition_index(b))
            .collect();
        image.sort_unstable();
        let sub = conditions.subposet(&image)?;
        let inc = PosetInclusion::new(sub, conditions, image)?;
        is_complete_suborder_capped(&inc, self.source.len().max(DEFAULT_ANTICHAIN_CAP))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;
    use alloc::vec;

    fn vee() -> Poset {
        Poset::antichain_over_bottom(2)
    }

    /// {0,a,b} inside {0,a,b,c} with c incompatible with a and b.
    fn false_inclusion() -> PosetInclusion {
        let large = Poset::antichain_over_bottom(3);
        PosetInclusion::by_labels(&vee(), &large).unwrap()
    }

    fn tree_inclusion() -> PosetInclusion {
        PosetInclusion::by_labels(&Poset::binary_tree(1), &Poset::binary_tree(2)).unwrap()
    }

    #[test]
    fn complete_suborder_examples() {
        let id = PosetInclusion::identity(&vee());
        assert!(is_complete_suborder(&id).unwrap());
        assert!(is_complete_suborder_via_reductions(&id));
        let f = false_inclusion();
        assert!(!is_complete_suborder(&f).unwrap());
        assert!(!is_complete_suborder_via_reductions(&f));
        let t = tree_inclusion();
        assert!(is_complete_suborder(&t).unwrap());
        assert!(is_complete_suborder_via_reductions(&t));
    }

    #[test]
    fn reduction_examples() {
        let f = false_inclusion();
        let large_bottom = f.large().bottom();
        assert_eq!(reductions(&f, large_bottom).unwrap().len(), 3);
        let c = f.large().index_of("c").unwrap();
        assert!(reductions(&f, c).unwrap().is_empty());
        let t = tree_inclusion();
        for p in 0..t.small().len() {
            assert!(reductions(&t, t.image(p)).unwrap().contains(p));
        }
        assert!(reductions(&t, 99).is_err());
    }

    #[test]
    fn compatible_but_separated_is_not_complete() {
        // a and b incompatible in the small poset, joined above in the large
        let small = vee();
        let large = Poset::from_covers(
            vec![String::from("0"), "a".into(), "b".into(), "c".into()],
            0,
            &[(0, 1), (0, 2), (1, 3), (2, 3)],
        )
        .unwrap();
        let inc = PosetInclusion::by_labels(&small, &large).unwrap();
        assert!(!is_complete_suborder(&inc).unwrap());
        assert!(!is_complete_suborder_via_reductions(&inc));
    }

    #[test]
    fn quotient_forcing_precondition_is_an_error() {
        let f = false_inclusion();
        assert_eq!(quotient_forces(&f, 0, 0), Err(Error::NotCompleteSuborder));
        assert!(QuotientName::new(&f).is_err());
    }

    #[test]
    fn quotient_forcing_on_a_product() {
        // Q = P x R with P = R = {0,a,b}; P sits as (p,0).
        let p = vee();
        let r = Poset::antichain_over_bottom(2);
        let q = p.product(&r);
        let inj: Vec<usize> = (0..p.len()).map(|i| i * r.len()).collect();
        let inc = PosetInclusion::new(p.clone(), q.clone(), inj).unwrap();
        assert!(is_complete_suborder(&inc).unwrap());
        let qn = QuotientName::new(&inc).unwrap();
        for pp in 0..p.len() {
            for qq in 0..q.len() {
                let direct = quotient_forces(&inc, pp, qq).unwrap();
                assert_eq!(direct, qn.forces(pp, qq));
                // oracle: (p',r) is forced iff every extension of pp is compatible with p'
                let p_part = qq / r.len();
                let oracle = p.up(pp).iter().all(|e| p.compat(e, p_part));
                assert_eq!(direct, oracle);
            }
        }
        // quotient at the atom of a: {0,a} x R
        let a = p.index_of("a").unwrap();
        let atom = qn.base().value(a).first().unwrap();
        let quo = quotient_at_atom(&qn, atom).unwrap();
        assert_eq!(quo.len(), 6);
        assert!(quo.index_of("(0,0)").is_some());
        assert!(quo.index_of("(a,b)").is_some() && quo.index_of("(b,a)").is_none());
    }

    #[test]
    fn quotient_over_trivial_base_is_everything() {
        let q = Poset::binary_tree(2);
        let inc = PosetInclusion::new(Poset::trivial(), q.clone(), vec![q.bottom()]).unwrap();
        let qn = QuotientName::new(&inc).unwrap();
        assert_eq!(qn.atom_count(), 1);
        assert_eq!(quotient_at_atom(&qn, 0).unwrap(), q);
        assert!(quotient_at_atom(&qn, 1).is_err());
    }

    #[test]
    fn identity_quotient_contains_compatible_conditions() {
        let p = Poset::binary_tree(2);
        let qn = QuotientName::new(&PosetInclusion::identity(&p)).unwrap();
        let a = qn.base();
        for atom in 0..qn.atom_count() {
            let quo = qn.table(atom).unwrap();
            assert!(quo.contains(p.bottom()));
            for x in 0..p.len() {
                assert_eq!(quo.contains(x), a.value(x).contains(atom));
            }
        }
    }

    #[test]
    fn embedding_validation() {
        let base = CompleteAlgebra::with_atoms(2).unwrap();
        let target = CompleteAlgebra::with_atoms(3).unwrap();
        let ok = [AtomSet::from_atoms([0, 1]), AtomSet::singleton(2)];
        let e = CompleteEmbedding::from_atom_images(&base, &target, &ok).unwrap();
        assert!(e.is_complete_via_antichains().unwrap());
        assert_eq!(e.atom_images().unwrap().len(), 2);
        let not_covering = [AtomSet::singleton(0), AtomSet::singleton(2)];
        assert!(CompleteEmbedding::from_atom_images(&base, &target, &not_covering).is_err());
        let overlapping = [AtomSet::from_atoms([0, 1]), AtomSet::from_atoms([1, 2])];
        assert!(CompleteEmbedding::from_atom_images(&base, &target, &overlapping).is_err());
    }
}
