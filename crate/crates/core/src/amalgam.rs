//! Amalgamation of two forcing notions over a common complete subalgebra.
//!
//! Given complete embeddings `f1: B -> BA(P1)` and `f2: B -> BA(P2)` of a
//! finite algebra `B`, the amalgam is the set of pairs `(p1, p2)` for which
//! some condition of `B` forces `p1` into the quotient of `P1` and `p2`
//! into the quotient of `P2`. On finite algebras that witness condition is
//! equivalent to the atom criterion
//!
//! ```text
//! exists base atom a:  f1(a) ∩ value(p1) ≠ 0  and  f2(a) ∩ value(p2) ≠ 0
//! ```
//!
//! which is what [`AmalgamInstance::is_member`] uses; the literal search is
//! kept as [`AmalgamInstance::is_member_by_witness`] for cross-checking.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::bits::{AtomSet, BitSet};
use crate::completion::{regular_open_completion, CompleteAlgebra, Subalgebra};
use crate::embed::{CompleteEmbedding, PosetInclusion};
use crate::poset::Poset;
use crate::{Error, Result};

/// Checks that `images` (one per base atom) are nonzero, pairwise disjoint
/// and join to 1 in an algebra with `target_atoms` atoms.
pub fn check_atom_images(base_atoms: usize, target_atoms: usize, images: &[AtomSet]) -> Result<()> {
    if images.len() != base_atoms {
        return Err(Error::InvalidEmbedding(format!(
            "{} atom images for {base_atoms} base atoms",
            images.len()
        )));
    }
    let full = AtomSet::full(target_atoms);
    let mut seen = AtomSet::EMPTY;
    for (a, &img) in images.iter().enumerate() {
        if img.is_empty() || !img.is_subset(full) {
            return Err(Error::InvalidEmbedding(format!("base atom {a} has image {img:?}")));
        }
        if img.intersects(seen) {
            return Err(Error::InvalidEmbedding(format!("image of base atom {a} overlaps another")));
        }
        seen = seen | img;
    }
    if seen != full {
        return Err(Error::InvalidEmbedding("atom images do not join to 1".into()));
    }
    Ok(())
}

/// Extends atom images to an arbitrary element.
pub fn apply_atoms(images: &[AtomSet], b: AtomSet) -> AtomSet {
    b.iter().fold(AtomSet::EMPTY, |acc, a| acc | images[a])
}

#[derive(Clone, Debug)]
pub struct AmalgamInstance {
    base: CompleteAlgebra,
    left: CompleteAlgebra,
    right: CompleteAlgebra,
    f1: Vec<AtomSet>,
    f2: Vec<AtomSet>,
    pairs: Vec<(usize, usize)>,
    poset: Poset,
    completion: CompleteAlgebra,
    inj_left: Vec<usize>,
    inj_right: Vec<usize>,
    left_atoms: Vec<AtomSet>,
    right_atoms: Vec<AtomSet>,
}

/// Amalgam of two raw posets. `f1[a]`, `f2[a]` are the images of the atoms
/// of `base` in the completions of `left` and `right`.
pub fn amalgamate_posets(
    base: &CompleteAlgebra,
    left: &Poset,
    right: &Poset,
    f1: &[AtomSet],
    f2: &[AtomSet],
) -> Result<AmalgamInstance> {
    let left = regular_open_completion(left)?;
    let right = regular_open_completion(right)?;
    check_atom_images(base.atom_count(), left.atom_count(), f1)?;
    check_atom_images(base.atom_count(), right.atom_count(), f2)?;
    build(base.clone(), left, right, f1.to_vec(), f2.to_vec())
}

/// Amalgam of two finite algebras, each read as the forcing notion of its
/// nonzero elements.
pub fn amalgamate(
    base: &CompleteAlgebra,
    left: &CompleteAlgebra,
    right: &CompleteAlgebra,
    f1: &[AtomSet],
    f2: &[AtomSet],
) -> Result<AmalgamInstance> {
    amalgamate_posets(base, &left.condition_poset()?, &right.condition_poset()?, f1, f2)
}

/// Amalgam over two complete embeddings with a common source.
pub fn amalgamate_embeddings(f1: &CompleteEmbedding, f2: &CompleteEmbedding) -> Result<AmalgamInstance> {
    if f1.source() != f2.source() {
        return Err(Error::Mismatch("embeddings have different sources".into()));
    }
    let base = f1.base_algebra()?;
    amalgamate(&base, f1.target(), f2.target(), &f1.atom_images()?, &f2.atom_images()?)
}

fn build(
    base: CompleteAlgebra,
    left: CompleteAlgebra,
    right: CompleteAlgebra,
    f1: Vec<AtomSet>,
    f2: Vec<AtomSet>,
) -> Result<AmalgamInstance> {
    let lp = left.source().expect("completion").clone();
    let rp = right.source().expect("completion").clone();
    let m = rp.len();
    let member = |x: usize, y: usize| {
        let (v1, v2) = (left.value(x), right.value(y));
        (0..base.atom_count()).any(|a| f1[a].intersects(v1) && f2[a].intersects(v2))
    };
    let pairs: Vec<(usize, usize)> = (0..lp.len())
        .flat_map(|x| (0..m).map(move |y| (x, y)))
        .filter(|&(x, y)| member(x, y))
        .collect();
    let labels = pairs
        .iter()
        .map(|&(x, y)| format!("({},{})", lp.label(x), rp.label(y)))
        .collect();
    let bottom = pairs
        .iter()
        .position(|&p| p == (lp.bottom(), rp.bottom()))
        .expect("bottom pair is always a member");
    let poset = Poset::from_le(labels, bottom, |i, j| {
        lp.le(pairs[i].0, pairs[j].0) && rp.le(pairs[i].1, pairs[j].1)
    })?;
    let index = |p: (usize, usize)| pairs.binary_search(&p).expect("axis pair is a member");
    let inj_left = (0..lp.len()).map(|x| index((x, rp.bottom()))).collect::<Vec<_>>();
    let inj_right = (0..m).map(|y| index((lp.bottom(), y))).collect::<Vec<_>>();
    let completion = regular_open_completion(&poset)?;
    let left_atoms = left.atom_generators()
        .into_iter()
        .map(|g| completion.value(inj_left[g]))
        .collect();
    let right_atoms = right.atom_generators()
        .into_iter()
        .map(|g| completion.value(inj_right[g]))
        .collect();
    Ok(AmalgamInstance {
        base,
        left,
        right,
        f1,
        f2,
        pairs,
        poset,
        completion,
        inj_left,
        inj_right,
        left_atoms,
        right_atoms,
    })
}

impl AmalgamInstance {
    pub fn base(&self) -> &CompleteAlgebra {
        &self.base
    }

    /// Completion of the left factor.
    pub fn left(&self) -> &CompleteAlgebra {
        &self.left
    }

    pub fn right(&self) -> &CompleteAlgebra {
        &self.right
    }

    pub fn left_poset(&self) -> &Poset {
        self.left.source().expect("completion")
    }

    pub fn right_poset(&self) -> &Poset {
        self.right.source().expect("completion")
    }

    pub fn f1(&self) -> &[AtomSet] {
        &self.f1
    }

    pub fn f2(&self) -> &[AtomSet] {
        &self.f2
    }

    /// The amalgam as a poset; element `i` is the pair `pairs()[i]`.
    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair_index(&self, p1: usize, p2: usize) -> Option<usize> {
        self.pairs.binary_search(&(p1, p2)).ok()
    }

    pub fn completion(&self) -> &CompleteAlgebra {
        &self.completion
    }

    /// `p1 ↦ (p1, ⊥)`.
    pub fn inj_left(&self) -> &[usize] {
        &self.inj_left
    }

    /// `p2 ↦ (⊥, p2)`.
    pub fn inj_right(&self) -> &[usize] {
        &self.inj_right
    }

    pub fn left_inclusion(&self) -> Result<PosetInclusion> {
        PosetInclusion::new(self.left_poset().clone(), self.poset.clone(), self.inj_left.clone())
    }

    pub fn right_inclusion(&self) -> Result<PosetInclusion> {
        PosetInclusion::new(self.right_poset().clone(), self.poset.clone(), self.inj_right.clone())
    }

    /// Atom criterion for a pair of factor conditions.
    pub fn is_member(&self, p1: usize, p2: usize) -> bool {
        let (v1, v2) = (self.left.value(p1), self.right.value(p2));
        (0..self.base.atom_count()).any(|a| self.f1[a].intersects(v1) && self.f2[a].intersects(v2))
    }

    /// The defining condition searched literally: some nonzero `b` in the
    /// base forces both coordinates into their quotients, i.e. every
    /// nonzero `b' ⊆ b` meets `p1` through `f1` and `p2` through `f2`.
    pub fn is_member_by_witness(&self, p1: usize, p2: usize) -> bool {
        let (v1, v2) = (self.left.value(p1), self.right.value(p2));
        let full = self.base.full().bits();
        (1..=full).any(|b| {
            // all nonzero submasks of b
            let mut s = b;
            loop {
                let sub = AtomSet(s);
                if !apply_atoms(&self.f1, sub).intersects(v1) || !apply_atoms(&self.f2, sub).intersects(v2) {
                    return false;
                }
                s = (s - 1) & b;
                if s == 0 {
                    return true;
                }
            }
        })
    }

    /// Image of a left-algebra element in the amalgam's completion.
    pub fn left_copy(&self, b: AtomSet) -> AtomSet {
        apply_atoms(&self.left_atoms, b)
    }

    pub fn right_copy(&self, b: AtomSet) -> AtomSet {
        apply_atoms(&self.right_atoms, b)
    }

    pub fn left_atom_images(&self) -> &[AtomSet] {
        &self.left_atoms
    }

    pub fn right_atom_images(&self) -> &[AtomSet] {
        &self.right_atoms
    }

    /// Amalgam conditions compatible with `i`.
    pub fn compatibility_trace(&self, i: usize) -> BitSet {
        BitSet::from_indices(
            self.poset.len(),
            (0..self.poset.len()).filter(|&j| self.poset.compat(i, j)),
        )
    }
}

/// Both copies of every base element get the same value in the amalgam's
/// completion.
pub fn check_identification(inst: &AmalgamInstance) -> bool {
    let full = inst.base.full().bits();
    (1..=full).all(|b| {
        let b = AtomSet(b);
        inst.left_copy(apply_atoms(&inst.f1, b)) == inst.right_copy(apply_atoms(&inst.f2, b))
    })
}

/// `φ(p1) = value((p1, ⊥))`, as a complete embedding of the left factor.
pub fn extension_embedding(inst: &AmalgamInstance) -> Result<CompleteEmbedding> {
    let map = inst
        .inj_left
        .iter()
        .map(|&i| inst.completion.value(i))
        .collect();
    CompleteEmbedding::new(inst.left_poset().clone(), inst.completion.clone(), map)
}

/// An isomorphism between two subalgebras of one finite algebra, stored as
/// a bijection of their blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialIso {
    atoms: usize,
    dom: Subalgebra,
    rng: Subalgebra,
    /// Block `i` of `dom` goes to block `perm[i]` of `rng`.
    perm: Vec<usize>,
}

impl PartialIso {
    pub fn new(dom: Subalgebra, rng: Subalgebra, perm: Vec<usize>) -> Result<Self> {
        if dom.parent_atoms() != rng.parent_atoms() {
            return Err(Error::ParentMismatch {
                left: dom.parent_atoms(),
                right: rng.parent_atoms(),
            });
        }
        if dom.block_count() != rng.block_count() || perm.len() != dom.block_count() {
            return Err(Error::InvalidIso(format!(
                "{} domain blocks, {} range blocks, {} images",
                dom.block_count(),
                rng.block_count(),
                perm.len()
            )));
        }
        let mut hit = vec![false; perm.len()];
        for &j in &perm {
            if j >= hit.len() || hit[j] {
                return Err(Error::InvalidIso("block map is not a bijection".into()));
            }
            hit[j] = true;
        }
        Ok(PartialIso {
            atoms: dom.parent_atoms(),
            dom,
            rng,
            perm,
        })
    }

    /// Builds the isomorphism from the images of the domain's blocks.
    pub fn from_block_images(dom: Subalgebra, rng: Subalgebra, images: &[AtomSet]) -> Result<Self> {
        if images.len() != dom.block_count() {
            return Err(Error::InvalidIso("one image per domain block expected".into()));
        }
        let perm = images
            .iter()
            .map(|img| {
                rng.blocks()
                    .iter()
                    .position(|b| b == img)
                    .ok_or_else(|| Error::InvalidIso(format!("{img:?} is not a block of the range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dom, rng, perm)
    }

    pub fn identity(sub: Subalgebra) -> Self {
        let n = sub.block_count();
        PartialIso {
            atoms: sub.parent_atoms(),
            dom: sub.clone(),
            rng: sub,
            perm: (0..n).collect(),
        }
    }

    pub fn ambient_atoms(&self) -> usize {
        self.atoms
    }

    pub fn dom(&self) -> &Subalgebra {
        &self.dom
    }

    pub fn rng(&self) -> &Subalgebra {
        &self.rng
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Image of a domain element.
    pub fn apply(&self, x: AtomSet) -> Result<AtomSet> {
        if !self.dom.contains(x) {
            return Err(Error::InvalidIso(format!("{x:?} is not in the domain")));
        }
        Ok(self
            .dom
            .blocks()
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_subset(x) && !b.is_empty())
            .fold(AtomSet::EMPTY, |acc, (i, _)| acc | self.rng.blocks()[self.perm[i]]))
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.perm.len()];
        for (i, &j) in self.perm.iter().enumerate() {
            inv[j] = i;
        }
        PartialIso {
            atoms: self.atoms,
            dom: self.rng.clone(),
            rng: self.dom.clone(),
            perm: inv,
        }
    }

    /// Homomorphism check over every domain element: meets, joins and
    /// complements are preserved and the map is a bijection onto `rng`.
    pub fn is_isomorphism(&self) -> bool {
        let members = self.dom.members();
        let full = AtomSet::full(self.atoms);
        let img = |x: AtomSet| self.apply(x).expect("domain member");
        let mut images: Vec<AtomSet> = members.iter().map(|&x| img(x)).collect();
        let ok = members.iter().all(|&x| {
            self.rng.contains(img(x))
                && img(x.complement(self.atoms)) == img(x).complement(self.atoms)
                && members
                    .iter()
                    .all(|&y| img(x & y) == (img(x) & img(y)) && img(x | y) == (img(x) | img(y)))
        });
        images.sort_unstable();
        images.dedup();
        ok && img(AtomSet::EMPTY).is_empty() && img(full) == full && images.len() == members.len()
    }

    /// `self` extends `smaller` along `embed`, which sends the atoms of the
    /// smaller ambient algebra to elements of this one.
    pub fn extends_via(&self, smaller: &PartialIso, embed: &[AtomSet]) -> bool {
        if embed.len() != smaller.atoms {
            return false;
        }
        smaller.dom.blocks().iter().all(|&d| {
            let x = apply_atoms(embed, d);
            let y = apply_atoms(embed, smaller.apply(d).expect("block of domain"));
            self.dom.contains(x) && self.apply(x).ok() == Some(y)
        })
    }
}

/// One round of the back-and-forth: amalgamate `BA(p)` with itself over
/// `iso` and return the isomorphism `F` that sends the left copy of each
/// element to its right copy. The base is the domain of `iso`, embedded on
/// the left through `iso` and on the right by inclusion, so that the
/// identification reads `φ_L(iso(b)) = φ_R(b)` and `F` extends `iso` on the
/// left copy.
pub fn iso_extension_step(p: &Poset, iso: &PartialIso) -> Result<(AmalgamInstance, PartialIso)> {
    let alg = regular_open_completion(p)?;
    if iso.ambient_atoms() != alg.atom_count() {
        return Err(Error::ParentMismatch {
            left: iso.ambient_atoms(),
            right: alg.atom_count(),
        });
    }
    let k = iso.dom().block_count();
    let base = CompleteAlgebra::with_atoms(k)?;
    let f1: Vec<AtomSet> = (0..k).map(|i| iso.rng().blocks()[iso.perm()[i]]).collect();
    let f2: Vec<AtomSet> = iso.dom().blocks().to_vec();
    let inst = amalgamate_posets(&base, p, p, &f1, &f2)?;
    let n = inst.completion().atom_count();
    let dom = Subalgebra::from_blocks(n, inst.left_atom_images().iter().copied())?;
    let rng = Subalgebra::from_blocks(n, inst.right_atom_images().iter().copied())?;
    let images: Vec<AtomSet> = dom
        .blocks()
        .iter()
        .map(|b| {
            let a = inst
                .left_atom_images()
                .iter()
                .position(|x| x == b)
                .expect("block comes from an atom");
            inst.right_atom_images()[a]
        })
        .collect();
    let f = PartialIso::from_block_images(dom, rng, &images)?;
    Ok((inst, f))
}

/// One stage of [`back_and_forth_tower`].
#[derive(Clone, Debug)]
pub struct BackForthStage {
    pub poset: Poset,
    pub algebra: CompleteAlgebra,
    pub iso: PartialIso,
    /// Atoms of the previous algebra sent into this one (empty at stage 0).
    pub embed_prev: Vec<AtomSet>,
}

/// `A_0 = BA(p)` with `F_0 = iso`, followed by `k` extension rounds.
/// Odd rounds put the previous algebra into the domain of `F_m`, even
/// rounds into its range.
pub fn back_and_forth_tower(p: &Poset, iso: &PartialIso, k: usize) -> Result<Vec<BackForthStage>> {
    if k == 0 {
        return Err(Error::InvalidIso("at least one extension step is required".into()));
    }
    let mut stages = vec![BackForthStage {
        poset: p.clone(),
        algebra: regular_open_completion(p)?,
        iso: iso.clone(),
        embed_prev: Vec::new(),
    }];
    for m in 1..=k {
        let prev = stages.last().expect("nonempty");
        let (inst, iso) = if m % 2 == 1 {
            iso_extension_step(&prev.poset, &prev.iso)?
        } else {
            let (inst, g) = iso_extension_step(&prev.poset, &prev.iso.inverse())?;
            (inst, g.inverse())
        };
        stages.push(BackForthStage {
            poset: inst.poset().clone(),
            algebra: inst.completion().clone(),
            embed_prev: inst.left_atom_images().to_vec(),
            iso,
        });
    }
    Ok(stages)
}
