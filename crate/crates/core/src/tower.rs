//! Finite towers `⟨(P^i, M^i) : i < L⟩` and the relation `≤` between them.
//!
//! Clubs become witness index sets that contain the top index; the stand-in
//! for `min(C \ i)` is the least witness index `≥ i`. Consecutive levels are
//! linked by explicit order embeddings, so names and pairs can be carried
//! upward without relying on labels.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::amalgam::{amalgamate_posets, AmalgamInstance};
use crate::bits::AtomSet;
use crate::completion::{intersect_subalgebras, regular_open_completion, CompleteAlgebra, Subalgebra};
use crate::embed::{check_complete_suborder, forces_unchecked, PosetInclusion};
use crate::iterate::{compose_hechler, HechlerParams, TwoStep};
use crate::sweet::{amalgam_sweet, chain_limit_along, hechler_sweet, label_map, validate_extends_along, validate_sweet, Clause, Preserved, SweetModel, SweetReport};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tower {
    levels: Vec<SweetModel>,
    /// `links[i]` embeds level `i` into level `i + 1`.
    links: Vec<Vec<usize>>,
}

impl Tower {
    /// Checks the shape: equal relation counts and order embeddings between
    /// consecutive levels. The sweetness and `⋖` requirements are reported
    /// by [`Tower::validate`].
    pub fn new(levels: Vec<SweetModel>, links: Vec<Vec<usize>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidTower("a tower needs at least one level".into()));
        }
        if links.len() + 1 != levels.len() {
            return Err(Error::InvalidTower(format!(
                "{} links for {} levels",
                links.len(),
                levels.len()
            )));
        }
        let n = levels[0].levels();
        if let Some(m) = levels.iter().find(|m| m.levels() != n) {
            return Err(Error::RelationCountMismatch {
                left: n,
                right: m.levels(),
            });
        }
        for (i, link) in links.iter().enumerate() {
            PosetInclusion::new(levels[i].poset().clone(), levels[i + 1].poset().clone(), link.clone())
                .map_err(|e| Error::InvalidTower(format!("link {i}: {e}")))?;
        }
        Ok(Tower { levels, links })
    }

    /// Consecutive levels linked by label.
    pub fn by_labels(levels: Vec<SweetModel>) -> Result<Self> {
        let links = levels
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                label_map(w[0].poset(), w[1].poset())
                    .ok_or_else(|| Error::InvalidTower(format!("level {i} has labels missing from level {}", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels, links)
    }

    /// Every level is `m`.
    pub fn constant(m: SweetModel, len: usize) -> Result<Self> {
        let id: Vec<usize> = (0..m.poset().len()).collect();
        Self::new(vec![m; len], vec![id; len.saturating_sub(1)])
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, i: usize) -> &SweetModel {
        &self.levels[i]
    }

    pub fn levels(&self) -> &[SweetModel] {
        &self.levels
    }

    pub fn links(&self) -> &[Vec<usize>] {
        &self.links
    }

    pub fn top(&self) -> &SweetModel {
        self.levels.last().expect("nonempty")
    }

    /// Composite embedding of level `i` into level `j ≥ i`.
    pub fn embed(&self, i: usize, j: usize) -> Vec<usize> {
        assert!(i <= j && j < self.len());
        let mut map: Vec<usize> = (0..self.levels[i].poset().len()).collect();
        for k in i..j {
            map = map.iter().map(|&x| self.links[k][x]).collect();
        }
        map
    }

    pub fn to_top(&self, i: usize) -> Vec<usize> {
        self.embed(i, self.len() - 1)
    }

    fn inclusion(&self, i: usize, j: usize) -> PosetInclusion {
        PosetInclusion::new(
            self.levels[i].poset().clone(),
            self.levels[j].poset().clone(),
            self.embed(i, j),
        )
        .expect("links are embeddings")
    }

    /// Each level is a model of sweetness and each level is a complete
    /// suborder of every later one.
    pub fn validate(&self) -> SweetReport {
        let mut r = SweetReport::default();
        for (i, m) in self.levels.iter().enumerate() {
            r.absorb(validate_sweet(m), Some(i));
        }
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if !check_complete_suborder(&self.inclusion(i, j)) {
                    r.push(Clause::TowerSuborder, vec![i, j], Vec::new());
                }
            }
        }
        r
    }
}

/// Indices standing in for a club: nonempty, containing the top index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerLeqWitness {
    indices: Vec<usize>,
}

impl TowerLeqWitness {
    pub fn new(indices: impl IntoIterator<Item = usize>, len: usize) -> Result<Self> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        if len == 0 || indices.last() != Some(&(len - 1)) {
            return Err(Error::InvalidWitness("must contain the top index".into()));
        }
        if indices.iter().any(|&i| i >= len) {
            return Err(Error::InvalidWitness(format!("index out of range for length {len}")));
        }
        Ok(TowerLeqWitness { indices })
    }

    pub fn all(len: usize) -> Self {
        TowerLeqWitness {
            indices: (0..len).collect(),
        }
    }

    pub fn from(start: usize, len: usize) -> Result<Self> {
        Self::new(start..len, len)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    fn check(&self, len: usize) -> Result<()> {
        Self::new(self.indices.iter().copied(), len).map(|_| ())
    }

    pub fn intersect(&self, other: &TowerLeqWitness) -> Result<TowerLeqWitness> {
        let indices: Vec<usize> = self.indices.iter().copied().filter(|i| other.indices.contains(i)).collect();
        if indices.is_empty() {
            return Err(Error::InvalidWitness("witness sets do not meet".into()));
        }
        Ok(TowerLeqWitness { indices })
    }

    /// Least witness index `≥ i`.
    pub fn round(&self, i: usize) -> usize {
        *self.indices.iter().find(|&&c| c >= i).unwrap_or(self.indices.last().expect("nonempty"))
    }
}

/// Level `i` of `t1` inside level `i` of `t2`, through the top map.
fn level_map(t1: &Tower, t2: &Tower, top_map: &[usize], i: usize) -> core::result::Result<Vec<usize>, usize> {
    let up1 = t1.to_top(i);
    let up2 = t2.to_top(i);
    up1.iter()
        .enumerate()
        .map(|(p, &x)| up2.iter().position(|&y| y == top_map[x]).ok_or(p))
        .collect()
}

/// `t1 ≤ t2` with `top_map` sending the top of `t1` into the top of `t2`.
/// For each index of the witness: the level models extend, and quotient
/// forcing over the level is preserved.
pub fn tower_leq(t1: &Tower, t2: &Tower, top_map: &[usize], c: &TowerLeqWitness) -> Result<SweetReport> {
    if t1.len() != t2.len() {
        return Err(Error::InvalidTower(format!("lengths {} and {}", t1.len(), t2.len())));
    }
    c.check(t1.len())?;
    let top = PosetInclusion::new(t1.top().poset().clone(), t2.top().poset().clone(), top_map.to_vec())?;
    if !check_complete_suborder(&top) {
        return Err(Error::NotCompleteSuborder);
    }
    let mut r = SweetReport::default();
    let top1 = t1.top().poset();
    for &i in c.indices() {
        let (m1, m2) = (t1.level(i), t2.level(i));
        let g = match level_map(t1, t2, top_map, i) {
            Ok(g) => g,
            Err(p) => {
                r.push(Clause::Extends1, vec![i], vec![String::from(m1.poset().label(p))]);
                continue;
            }
        };
        r.absorb(validate_extends_along(m1, m2, &g)?, Some(i));
        let last = t1.len() - 1;
        let inc1 = t1.inclusion(i, last);
        let inc2 = t2.inclusion(i, last);
        'forcing: for q in 0..top1.len() {
            for p in 0..m1.poset().len() {
                if forces_unchecked(&inc1, p, q) && !forces_unchecked(&inc2, g[p], top_map[q]) {
                    r.push(
                        Clause::LeqForcing,
                        vec![i],
                        vec![String::from(m1.poset().label(p)), String::from(top1.label(q))],
                    );
                    break 'forcing;
                }
            }
        }
    }
    Ok(r)
}

/// [`tower_leq`] with the top map taken from labels.
pub fn tower_leq_by_labels(t1: &Tower, t2: &Tower, c: &TowerLeqWitness) -> Result<SweetReport> {
    let top = label_map(t1.top().poset(), t2.top().poset())
        .ok_or_else(|| Error::InvalidTower("top labels of the first tower are missing from the second".into()))?;
    tower_leq(t1, t2, &top, c)
}

/// A derived tower with the checks asserted about it.
#[derive(Clone, Debug)]
pub struct DerivedTower {
    pub tower: Tower,
    pub witness: TowerLeqWitness,
    /// Tower invariants of the result.
    pub invariants: SweetReport,
    /// `≤` against each input, in input order.
    pub leq: Vec<SweetReport>,
    /// Top maps of each input into the result.
    pub top_maps: Vec<Vec<usize>>,
}

impl DerivedTower {
    pub fn holds(&self) -> bool {
        self.invariants.holds() && self.leq.iter().all(SweetReport::holds)
    }
}

/// Merge of a `≤`-chain `T_0 ≤ T_1 ≤ ..`, given the top map and witness of
/// each consecutive pair. Level `i` of the result is the limit of the chain
/// at the rounded index `min(C \ i)`.
pub fn tower_chain_merge(towers: &[Tower], top_maps: &[Vec<usize>], witnesses: &[TowerLeqWitness]) -> Result<DerivedTower> {
    let first = towers.first().ok_or_else(|| Error::NotAChain("no towers".into()))?;
    let len = first.len();
    if towers.iter().any(|t| t.len() != len) {
        return Err(Error::InvalidTower("towers of different lengths".into()));
    }
    if top_maps.len() + 1 != towers.len() || witnesses.len() + 1 != towers.len() {
        return Err(Error::NotAChain("one top map and witness per consecutive pair".into()));
    }
    let mut c = TowerLeqWitness::all(len);
    for (k, w) in witnesses.iter().enumerate() {
        let rep = tower_leq(&towers[k], &towers[k + 1], &top_maps[k], w)?;
        if !rep.holds() {
            return Err(Error::NotAChain(format!("tower {k} is not below tower {}: {}", k + 1, rep.failures[0])));
        }
        c = c.intersect(w)?;
    }
    let last = towers.last().expect("nonempty");
    let mut levels = Vec::with_capacity(len);
    for i in 0..len {
        let r = c.round(i);
        let models: Vec<SweetModel> = towers.iter().map(|t| t.level(r).clone()).collect();
        let links = (0..towers.len() - 1)
            .map(|k| {
                level_map(&towers[k], &towers[k + 1], &top_maps[k], r)
                    .map_err(|_| Error::NotAChain(format!("level {r} of tower {k} does not embed")))
            })
            .collect::<Result<Vec<_>>>()?;
        levels.push(chain_limit_along(&models, &links)?);
    }
    let links = (0..len.saturating_sub(1))
        .map(|i| last.embed(c.round(i), c.round(i + 1)))
        .collect();
    let tower = Tower::new(levels, links)?;
    let mut into_last: Vec<Vec<usize>> = vec![Vec::new(); towers.len()];
    into_last[towers.len() - 1] = (0..last.top().poset().len()).collect();
    for k in (0..towers.len() - 1).rev() {
        into_last[k] = top_maps[k].iter().map(|&x| into_last[k + 1][x]).collect();
    }
    let leq = towers
        .iter()
        .zip(&into_last)
        .map(|(t, m)| tower_leq(t, &tower, m, &c))
        .collect::<Result<Vec<_>>>()?;
    Ok(DerivedTower {
        invariants: tower.validate(),
        tower,
        witness: c,
        leq,
        top_maps: into_last,
    })
}

/// Level-wise Hechler iteration. A name over level `i` is carried to level
/// `i + 1` by composing with the projection of atoms.
pub fn tower_hechler(t: &Tower, params: HechlerParams) -> Result<(DerivedTower, Vec<Preserved>)> {
    let steps: Vec<TwoStep> = t
        .levels()
        .iter()
        .map(|m| compose_hechler(m.poset(), params))
        .collect::<Result<_>>()?;
    let preserved = t
        .levels()
        .iter()
        .zip(&steps)
        .map(|(m, it)| hechler_sweet(m, it))
        .collect::<Result<Vec<_>>>()?;
    let mut links = Vec::with_capacity(t.len().saturating_sub(1));
    for i in 0..t.len().saturating_sub(1) {
        let (lo, hi) = (&steps[i], &steps[i + 1]);
        let link = &t.links()[i];
        // atom c of the upper completion lies below the image of atom proj[c]
        let upper = hi.base_algebra();
        let mut proj = vec![usize::MAX; upper.atom_count()];
        for (a, g) in lo.base_algebra().atom_generators().into_iter().enumerate() {
            for c in upper.value(link[g]).iter() {
                proj[c] = a;
            }
        }
        let bottom = hi.fibres()[0].bottom();
        let map = (0..lo.poset().len())
            .map(|x| {
                let (p, name) = lo.condition(x);
                let q = link[p];
                let lifted: Vec<usize> = (0..upper.atom_count())
                    .map(|c| if upper.value(q).contains(c) { name[proj[c]] } else { bottom })
                    .collect();
                hi.index_of(q, &lifted)
                    .ok_or_else(|| Error::Mismatch(format!("name over level {i} does not lift")))
            })
            .collect::<Result<Vec<_>>>()?;
        links.push(map);
    }
    let tower = Tower::new(preserved.iter().map(|p| p.model.clone()).collect(), links)?;
    let top_map = steps.last().expect("nonempty").embedding().to_vec();
    let c = TowerLeqWitness::all(t.len());
    let leq = vec![tower_leq(t, &tower, &top_map, &c)?];
    Ok((
        DerivedTower {
            invariants: tower.validate(),
            tower,
            witness: c,
            leq,
            top_maps: vec![top_map],
        },
        preserved,
    ))
}

/// Isomorphism between a subalgebra `q0` of the completion of the first
/// top and a subalgebra `q2` of the completion of the second: block `k` of
/// `q0` goes to block `perm[k]` of `q2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgamData {
    pub q0: Subalgebra,
    pub q2: Subalgebra,
    pub perm: Vec<usize>,
}

impl AmalgamData {
    /// Trivial subalgebras on both sides.
    pub fn trivial(t1: &Tower, t3: &Tower) -> Result<Self> {
        let a1 = regular_open_completion(t1.top().poset())?.atom_count();
        let a3 = regular_open_completion(t3.top().poset())?.atom_count();
        Ok(AmalgamData {
            q0: Subalgebra::trivial(a1),
            q2: Subalgebra::trivial(a3),
            perm: vec![0],
        })
    }

    fn image(&self, x: AtomSet) -> AtomSet {
        self.q0
            .blocks()
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_subset(x))
            .fold(AtomSet::EMPTY, |acc, (k, _)| acc | self.q2.blocks()[self.perm[k]])
    }
}

/// The subalgebra of `BA(top)` generated by level `i`.
fn level_subalgebra(t: &Tower, top: &CompleteAlgebra, i: usize) -> Result<(Subalgebra, Vec<AtomSet>)> {
    let lvl = regular_open_completion(t.level(i).poset())?;
    let up = t.to_top(i);
    let images: Vec<AtomSet> = lvl.atom_generators().into_iter().map(|g| top.value(up[g])).collect();
    Ok((Subalgebra::from_blocks(top.atom_count(), images.iter().copied())?, images))
}

/// Level-wise amalgamation of two towers over `f: q0 -> q2`, for levels
/// from `i0` on (lower levels repeat level `i0`). Requires
/// `f[q0 ∩ BA(P^i_1)] = q2 ∩ BA(P^i_3)` at every such level, and checks that
/// each level is the sub-amalgam of the top amalgam on its two factors.
pub fn tower_amalgamate(t1: &Tower, t3: &Tower, data: &AmalgamData, i0: usize) -> Result<(DerivedTower, Vec<Preserved>)> {
    let len = t1.len();
    if t3.len() != len {
        return Err(Error::InvalidTower("towers of different lengths".into()));
    }
    if i0 >= len {
        return Err(Error::InvalidWitness(format!("start index {i0} past the top")));
    }
    let top1 = regular_open_completion(t1.top().poset())?;
    let top3 = regular_open_completion(t3.top().poset())?;
    if data.q0.parent_atoms() != top1.atom_count() || data.q2.parent_atoms() != top3.atom_count() {
        return Err(Error::Mismatch("subalgebras do not live in the top completions".into()));
    }
    let k = data.q0.block_count();
    let mut hit = vec![false; k];
    if data.q2.block_count() != k || data.perm.len() != k || data.perm.iter().any(|&j| j >= k || core::mem::replace(&mut hit[j], true)) {
        return Err(Error::InvalidIso("block map is not a bijection".into()));
    }
    let base = CompleteAlgebra::with_atoms(k)?;
    let g1 = data.q0.blocks().to_vec();
    let g3: Vec<AtomSet> = (0..k).map(|b| data.q2.blocks()[data.perm[b]]).collect();
    let global = amalgamate_posets(&base, t1.top().poset(), t3.top().poset(), &g1, &g3)?;

    let mut insts: Vec<AmalgamInstance> = Vec::new();
    let mut preserved = Vec::new();
    for i in i0..len {
        let (s1, img1) = level_subalgebra(t1, &top1, i)?;
        let (s3, img3) = level_subalgebra(t3, &top3, i)?;
        let r1 = intersect_subalgebras(&data.q0, &s1)?;
        let r3 = intersect_subalgebras(&data.q2, &s3)?;
        let mapped: Vec<AtomSet> = r1.blocks().iter().map(|&b| data.image(b)).collect();
        let mut sorted = mapped.clone();
        sorted.sort();
        if sorted != r3.blocks() {
            return Err(Error::HypothesisViolation {
                index: i,
                reason: String::from("f does not carry q0 ∩ BA(level) onto q2 ∩ BA(level)"),
            });
        }
        let lvl_base = CompleteAlgebra::with_atoms(r1.block_count())?;
        let f1: Vec<AtomSet> = r1
            .blocks()
            .iter()
            .map(|&b| AtomSet::from_atoms((0..img1.len()).filter(|&a| img1[a].is_subset(b))))
            .collect();
        let f3: Vec<AtomSet> = mapped
            .iter()
            .map(|&b| AtomSet::from_atoms((0..img3.len()).filter(|&a| img3[a].is_subset(b))))
            .collect();
        let inst = amalgamate_posets(&lvl_base, t1.level(i).poset(), t3.level(i).poset(), &f1, &f3)?;
        // the level is the part of the top amalgam over the two level posets
        let (up1, up3) = (t1.to_top(i), t3.to_top(i));
        for x in 0..up1.len() {
            for y in 0..up3.len() {
                if inst.pair_index(x, y).is_some() != global.pair_index(up1[x], up3[y]).is_some() {
                    return Err(Error::HypothesisViolation {
                        index: i,
                        reason: format!(
                            "pair ({},{}) differs from the top amalgam",
                            t1.level(i).poset().label(x),
                            t3.level(i).poset().label(y)
                        ),
                    });
                }
            }
        }
        preserved.push(amalgam_sweet(t1.level(i), t3.level(i), &inst)?);
        insts.push(inst);
    }
    let mut models: Vec<SweetModel> = Vec::with_capacity(len);
    let mut links: Vec<Vec<usize>> = Vec::with_capacity(len.saturating_sub(1));
    for _ in 0..i0 {
        models.push(preserved[0].model.clone());
        links.push((0..preserved[0].model.poset().len()).collect());
    }
    for (j, p) in preserved.iter().enumerate() {
        models.push(p.model.clone());
        if j + 1 < insts.len() {
            let i = i0 + j;
            let (lo, hi) = (&insts[j], &insts[j + 1]);
            let map = lo
                .pairs()
                .iter()
                .map(|&(x, y)| {
                    hi.pair_index(t1.links()[i][x], t3.links()[i][y])
                        .ok_or_else(|| Error::HypothesisViolation {
                            index: i,
                            reason: String::from("pair does not survive to the next level"),
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            links.push(map);
        }
    }
    let tower = Tower::new(models, links)?;
    let c = TowerLeqWitness::from(i0, len)?;
    let top = insts.last().expect("at least the top level");
    let maps = vec![top.inj_left().to_vec(), top.inj_right().to_vec()];
    let leq = vec![tower_leq(t1, &tower, &maps[0], &c)?, tower_leq(t3, &tower, &maps[1], &c)?];
    Ok((
        DerivedTower {
            invariants: tower.validate(),
            tower,
            witness: c,
            leq,
            top_maps: maps,
        },
        preserved,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::Poset;

    fn idx(p: &Poset, ls: &[&str]) -> Vec<usize> {
        ls.iter().map(|l| p.index_of(l).unwrap()).collect()
    }

    fn tree_tower() -> Tower {
        let t1 = Poset::binary_tree(1);
        let t2 = Poset::binary_tree(2);
        let m1 = SweetModel::discrete(t1.clone(), idx(&t1, &["0", "1"]), 1).unwrap();
        let m2 = SweetModel::discrete(t2.clone(), idx(&t2, &["0", "1", "00", "01", "10", "11"]), 1).unwrap();
        Tower::by_labels(vec![m1, m2]).unwrap()
    }

    fn vee_tower(len: usize) -> Tower {
        let v = Poset::antichain_over_bottom(2);
        Tower::constant(SweetModel::discrete(v, vec![1, 2], 1).unwrap(), len).unwrap()
    }

    #[test]
    fn witness_rules() {
        assert!(TowerLeqWitness::new([0], 2).is_err());
        assert!(TowerLeqWitness::new([], 2).is_err());
        let c = TowerLeqWitness::new([1, 3], 4).unwrap();
        assert_eq!(c.round(0), 1);
        assert_eq!(c.round(2), 3);
        assert_eq!(c.round(3), 3);
    }

    #[test]
    fn leq_is_reflexive() {
        let t = tree_tower();
        assert!(t.validate().holds());
        let id: Vec<usize> = (0..t.top().poset().len()).collect();
        assert!(tower_leq(&t, &t, &id, &TowerLeqWitness::all(2)).unwrap().holds());
    }

    #[test]
    fn forcing_clause_failure_is_witnessed() {
        let v = Poset::antichain_over_bottom(2);
        let t1 = Tower::new(
            vec![SweetModel::trivial(1), SweetModel::discrete(v.clone(), vec![0, 1, 2], 1).unwrap()],
            vec![vec![0]],
        )
        .unwrap();
        let full = SweetModel::discrete(v.clone(), vec![0, 1, 2], 1).unwrap();
        let t2 = Tower::constant(full, 2).unwrap();
        assert!(t1.validate().holds() && t2.validate().holds());
        let rep = tower_leq(&t1, &t2, &[0, 1, 2], &TowerLeqWitness::all(2)).unwrap();
        assert!(!rep.failed(Clause::Extends1) && !rep.failed(Clause::Extends2) && !rep.failed(Clause::Extends3));
        let f = rep.failures.iter().find(|f| f.clause == Clause::LeqForcing).unwrap();
        assert_eq!(f.levels, vec![0]);
        assert_eq!(f.elements[0], "0");
    }

    #[test]
    fn product_growth_then_merge() {
        let t = tree_tower();
        let r = vee_tower(2);
        let (grown, _) = tower_amalgamate(&t, &r, &AmalgamData::trivial(&t, &r).unwrap(), 0).unwrap();
        assert!(grown.holds(), "{:?}", grown.leq);
        let prod = t.top().poset().product(r.top().poset());
        assert_eq!(grown.tower.top().poset(), &prod);
        let merged = tower_chain_merge(
            &[t.clone(), grown.tower.clone()],
            &[grown.top_maps[0].clone()],
            core::slice::from_ref(&grown.witness),
        )
        .unwrap();
        assert!(merged.holds());
        assert_eq!(merged.tower, grown.tower);
        let single = tower_chain_merge(core::slice::from_ref(&t), &[], &[]).unwrap();
        assert_eq!(single.tower, t);
    }

    #[test]
    fn identity_amalgam_of_towers_collapses() {
        let t = tree_tower();
        let atoms = regular_open_completion(t.top().poset()).unwrap().atom_count();
        let whole = Subalgebra::whole(atoms);
        let data = AmalgamData {
            q0: whole.clone(),
            q2: whole,
            perm: (0..atoms).collect(),
        };
        let (out, _) = tower_amalgamate(&t, &t, &data, 0).unwrap();
        assert!(out.holds(), "{:?} {:?}", out.invariants, out.leq);
        for i in 0..t.len() {
            let a = regular_open_completion(out.tower.level(i).poset()).unwrap();
            let b = regular_open_completion(t.level(i).poset()).unwrap();
            assert_eq!(a.atom_count(), b.atom_count());
        }
    }

    #[test]
    fn nontrivial_two_atom_base() {
        let t = tree_tower();
        // q0: first branch bit; the swap on q0 exchanges the two halves
        let q = Subalgebra::from_blocks(4, [AtomSet::from_atoms([0, 1]), AtomSet::from_atoms([2, 3])]).unwrap();
        let data = AmalgamData {
            q0: q.clone(),
            q2: q,
            perm: vec![1, 0],
        };
        let (out, pres) = tower_amalgamate(&t, &t, &data, 0).unwrap();
        assert!(out.holds(), "{:?} {:?}", out.invariants, out.leq);
        assert!(pres.iter().all(Preserved::holds));
    }

    #[test]
    fn hypothesis_violation_carries_the_index() {
        let t = tree_tower();
        let q0 = Subalgebra::from_blocks(4, [AtomSet::singleton(0), AtomSet::from_atoms([1, 2, 3])]).unwrap();
        let q2 = Subalgebra::from_blocks(4, [AtomSet::singleton(3), AtomSet::from_atoms([0, 1, 2])]).unwrap();
        // {00} goes to {11}; both meet level 0 trivially
        let data = AmalgamData { q0, q2, perm: vec![1, 0] };
        let res = tower_amalgamate(&t, &t, &data, 0);
        assert!(res.is_ok());
        let bad_q2 = Subalgebra::from_blocks(4, [AtomSet::from_atoms([0, 1]), AtomSet::from_atoms([2, 3])]).unwrap();
        let bad = AmalgamData {
            q0: Subalgebra::from_blocks(4, [AtomSet::singleton(0), AtomSet::from_atoms([1, 2, 3])]).unwrap(),
            q2: bad_q2,
            perm: vec![0, 1],
        };
        match tower_amalgamate(&t, &t, &bad, 0) {
            Err(Error::HypothesisViolation { index, .. }) => assert_eq!(index, 0),
            other => panic!("expected a hypothesis violation, got {other:?}"),
        }
    }

    #[test]
    fn hechler_over_a_chain_tower() {
        let c2 = Poset::chain(2);
        let c3 = Poset::chain(3);
        let m0 = SweetModel::single_class(c2, vec![0, 1], 1).unwrap();
        let m1 = SweetModel::single_class(c3, vec![0, 1, 2], 1).unwrap();
        let t = Tower::by_labels(vec![m0, m1]).unwrap();
        let (out, pres) = tower_hechler(&t, HechlerParams::new(1, 1).unwrap()).unwrap();
        assert!(out.holds(), "{:?} {:?}", out.invariants, out.leq);
        assert!(pres.iter().all(Preserved::holds));
        let trivial = Tower::constant(SweetModel::trivial(1), 2).unwrap();
        let (out, _) = tower_hechler(&trivial, HechlerParams::new(1, 1).unwrap()).unwrap();
        assert!(out.holds());
        assert_eq!(out.tower.top().poset().len(), 4);
    }

    #[test]
    fn hechler_over_the_tree_tower() {
        let t = tree_tower();
        let (out, pres) = tower_hechler(&t, HechlerParams::new(1, 1).unwrap()).unwrap();
        assert!(out.holds(), "{:?} {:?}", out.invariants, out.leq);
        assert!(pres.iter().all(Preserved::holds));
    }
}
