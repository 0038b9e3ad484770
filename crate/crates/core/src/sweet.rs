//! Models of sweetness `(P, D, E_0 .. E_{N-1})` and the extension relation.
//!
//! Each clause of the definition is checked separately and reported with
//! the first counterexample found. The fusion clause is read with finitely
//! many relations: sequences run over `i < N` and `p*` stands in for the
//! limit condition.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::amalgam::AmalgamInstance;
use crate::bits::{AtomSet, BitSet};
use crate::embed::{check_complete_suborder, PosetInclusion};
use crate::iterate::TwoStep;
use crate::poset::{ConditionSet, Poset};
use crate::{Error, Result};

/// Clause identifiers used in reports and certificates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Clause {
    Density,
    ClassCount,
    Directedness,
    Fusion,
    Continuity,
    Extends1,
    Extends2,
    Extends3,
    /// Preservation of quotient forcing between two towers.
    LeqForcing,
    /// Complete suborder between two levels of a tower.
    TowerSuborder,
}

impl Clause {
    pub const SWEET: [Clause; 5] = [
        Clause::Density,
        Clause::ClassCount,
        Clause::Directedness,
        Clause::Fusion,
        Clause::Continuity,
    ];
    pub const EXTENDS: [Clause; 3] = [Clause::Extends1, Clause::Extends2, Clause::Extends3];

    pub fn id(self) -> &'static str {
        match self {
            Clause::Density => "density",
            Clause::ClassCount => "class-count",
            Clause::Directedness => "directedness",
            Clause::Fusion => "fusion",
            Clause::Continuity => "continuity",
            Clause::Extends1 => "extends.1",
            Clause::Extends2 => "extends.2",
            Clause::Extends3 => "extends.3",
            Clause::LeqForcing => "leq.forcing",
            Clause::TowerSuborder => "tower.suborder",
        }
    }

    pub fn from_id(id: &str) -> Option<Clause> {
        [
            Clause::Density,
            Clause::ClassCount,
            Clause::Directedness,
            Clause::Fusion,
            Clause::Continuity,
            Clause::Extends1,
            Clause::Extends2,
            Clause::Extends3,
            Clause::LeqForcing,
            Clause::TowerSuborder,
        ]
        .into_iter()
        .find(|c| c.id() == id)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// A clause that failed, with the levels and elements (by label) that
/// witness it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Failure {
    pub clause: Clause,
    pub levels: Vec<usize>,
    pub elements: Vec<String>,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.clause)?;
        if !self.levels.is_empty() {
            write!(f, " levels={:?}", self.levels)?;
        }
        write!(f, " witness=[{}]", self.elements.join(", "))
    }
}

/// Outcome of a validation: holds iff no clause failed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweetReport {
    pub failures: Vec<Failure>,
}

impl SweetReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failed(&self, clause: Clause) -> bool {
        self.failures.iter().any(|f| f.clause == clause)
    }

    pub(crate) fn push(&mut self, clause: Clause, levels: Vec<usize>, elements: Vec<String>) {
        if !self.failed(clause) {
            self.failures.push(Failure {
                clause,
                levels,
                elements,
            });
        }
    }

    /// Appends the failures of `other`, tagging them with `level`.
    pub fn absorb(&mut self, other: SweetReport, level: Option<usize>) {
        for mut f in other.failures {
            if let Some(l) = level {
                f.levels.insert(0, l);
            }
            self.failures.push(f);
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct SweetModel {
    poset: Poset,
    dense: ConditionSet,
    /// `classes[n]` partitions `dense`; classes and their members sorted.
    classes: Vec<Vec<Vec<usize>>>,
    /// `class_of[n][p]` is the class index of `p` at level `n`.
    class_of: Vec<Vec<usize>>,
}

impl fmt::Debug for SweetModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = |p: &usize| self.poset.label(*p);
        let mut d = f.debug_struct("SweetModel");
        d.field("dense", &self.dense.members().iter().map(l).collect::<Vec<_>>());
        for (n, cs) in self.classes.iter().enumerate() {
            let cs: Vec<Vec<&str>> = cs.iter().map(|c| c.iter().map(l).collect()).collect();
            d.field(&format!("E{n}"), &cs);
        }
        d.finish()
    }
}

const NONE: usize = usize::MAX;

impl SweetModel {
    /// Checks that every level partitions `dense`. At least one level is
    /// required.
    pub fn new(poset: Poset, dense: Vec<usize>, classes: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let dense = ConditionSet::new(&poset, dense)?;
        if classes.is_empty() {
            return Err(Error::InvalidModel("at least one equivalence relation is required".into()));
        }
        let mut norm = Vec::with_capacity(classes.len());
        let mut class_of = Vec::with_capacity(classes.len());
        for (n, level) in classes.into_iter().enumerate() {
            let mut owner = vec![NONE; poset.len()];
            let mut cs: Vec<Vec<usize>> = Vec::with_capacity(level.len());
            for mut c in level {
                c.sort_unstable();
                c.dedup();
                if c.is_empty() {
                    return Err(Error::InvalidModel(format!("E{n} has an empty class")));
                }
                for &p in &c {
                    poset.check(p)?;
                    if !dense.contains(p) {
                        return Err(Error::InvalidModel(format!(
                            "E{n} mentions {} outside the dense set",
                            poset.label(p)
                        )));
                    }
                    if owner[p] != NONE {
                        return Err(Error::InvalidModel(format!(
                            "{} lies in two E{n} classes",
                            poset.label(p)
                        )));
                    }
                    owner[p] = 0;
                }
                cs.push(c);
            }
            if let Some(&p) = dense.members().iter().find(|&&p| owner[p] == NONE) {
                return Err(Error::InvalidModel(format!(
                    "{} is in no E{n} class",
                    poset.label(p)
                )));
            }
            cs.sort();
            for (i, c) in cs.iter().enumerate() {
                for &p in c {
                    owner[p] = i;
                }
            }
            norm.push(cs);
            class_of.push(owner);
        }
        Ok(SweetModel {
            poset,
            dense,
            classes: norm,
            class_of,
        })
    }

    /// Every level is the single class `dense`.
    pub fn single_class(poset: Poset, dense: Vec<usize>, levels: usize) -> Result<Self> {
        let mut d = dense.clone();
        d.sort_unstable();
        d.dedup();
        Self::new(poset, dense, vec![vec![d]; levels])
    }

    /// Every level is the discrete partition of `dense`.
    pub fn discrete(poset: Poset, dense: Vec<usize>, levels: usize) -> Result<Self> {
        let classes = dense.iter().map(|&p| vec![p]).collect::<Vec<_>>();
        Self::new(poset, dense, vec![classes; levels])
    }

    /// The model on `{⊥}`.
    pub fn trivial(levels: usize) -> Self {
        Self::single_class(Poset::trivial(), vec![0], levels).expect("trivial model")
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn dense(&self) -> &ConditionSet {
        &self.dense
    }

    /// Number of equivalence relations.
    pub fn levels(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self, n: usize) -> &[Vec<usize>] {
        &self.classes[n]
    }

    pub fn all_classes(&self) -> &[Vec<Vec<usize>>] {
        &self.classes
    }

    /// `[p]_n`, or `None` when `p` is outside the dense set.
    pub fn class(&self, n: usize, p: usize) -> Option<&[usize]> {
        match self.class_of[n].get(p) {
            Some(&c) if c != NONE => Some(&self.classes[n][c]),
            _ => None,
        }
    }

    pub fn class_index(&self, n: usize, p: usize) -> Option<usize> {
        self.class_of[n].get(p).copied().filter(|&c| c != NONE)
    }

    pub fn same_class(&self, n: usize, p: usize, q: usize) -> bool {
        matches!((self.class_index(n, p), self.class_index(n, q)), (Some(a), Some(b)) if a == b)
    }

    /// `E_{n+1} ⊆ E_n` for every `n`.
    pub fn is_refining(&self) -> bool {
        (1..self.levels()).all(|n| {
            self.dense
                .members()
                .iter()
                .all(|&p| self.class(n, p).unwrap().iter().all(|&q| self.same_class(n - 1, p, q)))
        })
    }

    /// Same data on a relabelled copy of the poset.
    pub fn with_poset(&self, poset: Poset) -> Result<Self> {
        if poset.len() != self.poset.len() {
            return Err(Error::InvalidModel("replacement poset has a different size".into()));
        }
        Self::new(poset, self.dense.members().to_vec(), self.classes.clone())
    }

    /// Largest model on the sub-poset `members` that this model extends:
    /// the dense set is shrunk until it is a union of classes and closed
    /// downward inside the dense set, and the relations are restricted.
    /// `members` must contain the bottom. Returns the model and the
    /// inclusion into `self.poset()`.
    pub fn restrict(&self, members: &[usize]) -> Result<(SweetModel, Vec<usize>)> {
        let mut ms = members.to_vec();
        ms.sort_unstable();
        ms.dedup();
        let sub = self.poset.subposet(&ms)?;
        let inside = BitSet::from_indices(self.poset.len(), ms.iter().copied());
        let mut keep = self.dense.to_bits();
        keep.intersect_with(&inside);
        loop {
            let mut changed = false;
            for p in keep.to_vec() {
                let classes_ok = (0..self.levels()).all(|n| self.class(n, p).unwrap().iter().all(|&q| keep.contains(q)));
                let down_ok = self
                    .dense
                    .members()
                    .iter()
                    .all(|&r| !self.poset.le(r, p) || keep.contains(r));
                if !classes_ok || !down_ok {
                    keep.remove(p);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let local = |p: usize| ms.binary_search(&p).expect("member");
        let dense: Vec<usize> = keep.iter().map(local).collect();
        let classes = (0..self.levels())
            .map(|n| {
                self.classes[n]
                    .iter()
                    .filter(|c| keep.contains(c[0]))
                    .map(|c| c.iter().map(|&p| local(p)).collect())
                    .collect()
            })
            .collect();
        Ok((SweetModel::new(sub, dense, classes)?, ms))
    }
}

/// Checks every clause of the definition.
pub fn validate_sweet(m: &SweetModel) -> SweetReport {
    let mut r = SweetReport::default();
    let p = &m.poset;
    let lab = |x: usize| String::from(p.label(x));
    let d = m.dense.members();

    if let Some(x) = (0..p.len()).find(|&x| !p.up(x).iter().any(|y| m.dense.contains(y))) {
        r.push(Clause::Density, vec![], vec![lab(x)]);
    }

    // Finite relations have finitely many classes: nothing to check.

    let class_bits: Vec<Vec<BitSet>> = m
        .classes
        .iter()
        .map(|cs| cs.iter().map(|c| BitSet::from_indices(p.len(), c.iter().copied())).collect())
        .collect();

    'dir: for (n, cs) in m.classes.iter().enumerate() {
        for (ci, c) in cs.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                for &y in &c[i + 1..] {
                    let mut s = p.up(x).clone();
                    s.intersect_with(p.up(y));
                    if !s.intersects(&class_bits[n][ci]) {
                        r.push(Clause::Directedness, vec![n], vec![lab(x), lab(y)]);
                        break 'dir;
                    }
                }
            }
        }
    }

    'fusion: for &star in d {
        for n in 0..m.levels() {
            if let Some(seq) = fusion_failure(m, star, n) {
                let mut w = vec![lab(star)];
                w.extend(seq.into_iter().map(lab));
                r.push(Clause::Fusion, vec![n], w);
                break 'fusion;
            }
        }
    }

    let below: Vec<Vec<BitSet>> = class_bits
        .iter()
        .map(|cs| cs.iter().map(|c| p.down_closure(c)).collect())
        .collect();
    'cont: for &x in d {
        for &y in d {
            if !p.le(x, y) {
                continue;
            }
            for n in 0..m.levels() {
                let target = &below[n][m.class_of[n][y]];
                let ok = (0..m.levels()).any(|k| class_bits[k][m.class_of[k][x]].is_subset(target));
                if !ok {
                    r.push(Clause::Continuity, vec![n], vec![lab(x), lab(y)]);
                    break 'cont;
                }
            }
        }
    }
    r
}

/// A sequence `p_n, .., p_j` with `p_i ∈ [star]_i` that has no upper bound
/// in `[star]_n`, if one exists.
fn fusion_failure(m: &SweetModel, star: usize, n: usize) -> Option<Vec<usize>> {
    let p = &m.poset;
    let start = BitSet::from_indices(p.len(), m.class(n, star).unwrap().iter().copied());
    let mut states: BTreeMap<BitSet, Vec<usize>> = BTreeMap::new();
    states.insert(start, Vec::new());
    for i in n..m.levels() {
        let mut next = BTreeMap::new();
        for (s, seq) in &states {
            for &x in m.class(i, star).unwrap() {
                let mut t = s.clone();
                t.intersect_with(p.up(x));
                let mut seq = seq.clone();
                seq.push(x);
                if t.is_empty() {
                    return Some(seq);
                }
                next.entry(t).or_insert(seq);
            }
        }
        states = next;
    }
    None
}

/// Elements of `[p]_0` pairwise bounded: the classes of `E_0` cover `D`
/// with centered pieces.
pub fn centered_cover(m: &SweetModel) -> Vec<Vec<usize>> {
    m.classes[0].clone()
}

/// `m1 < m2` with `P¹` sent into `P²` by `map`.
pub fn validate_extends_along(m1: &SweetModel, m2: &SweetModel, map: &[usize]) -> Result<SweetReport> {
    if m1.levels() != m2.levels() {
        return Err(Error::RelationCountMismatch {
            left: m1.levels(),
            right: m2.levels(),
        });
    }
    let inc = PosetInclusion::new(m1.poset.clone(), m2.poset.clone(), map.to_vec())?;
    Ok(extends_report(m1, m2, &inc))
}

/// `m1 < m2` with elements identified by label. Missing labels or an order
/// that is not induced count as a failure of the first clause.
pub fn validate_extends(m1: &SweetModel, m2: &SweetModel) -> Result<SweetReport> {
    if m1.levels() != m2.levels() {
        return Err(Error::RelationCountMismatch {
            left: m1.levels(),
            right: m2.levels(),
        });
    }
    match PosetInclusion::by_labels(&m1.poset, &m2.poset) {
        Ok(inc) => Ok(extends_report(m1, m2, &inc)),
        Err(e) => {
            let mut r = SweetReport::default();
            r.push(Clause::Extends1, vec![], vec![format!("{e}")]);
            Ok(r)
        }
    }
}

/// Label-based inclusion map, if every label of `small` occurs in `large`.
pub fn label_map(small: &Poset, large: &Poset) -> Option<Vec<usize>> {
    small.labels().iter().map(|l| large.index_of(l)).collect()
}

fn extends_report(m1: &SweetModel, m2: &SweetModel, inc: &PosetInclusion) -> SweetReport {
    let mut r = SweetReport::default();
    let (p1, p2) = (&m1.poset, &m2.poset);
    let f = inc.injection();
    let l1 = |x: usize| String::from(p1.label(x));
    let l2 = |x: usize| String::from(p2.label(x));
    let d1 = m1.dense.members();
    let d2 = m2.dense.members();
    let mut image_d1 = BitSet::new(p2.len());
    for &x in d1 {
        image_d1.insert(f[x]);
    }

    if !check_complete_suborder(inc) {
        let q = (0..p2.len()).find(|&q| crate::embed::reductions(inc, q).map(|s| s.is_empty()).unwrap_or(true));
        let w = match q {
            Some(q) => vec![format!("no reduction for {}", l2(q))],
            None => vec![String::from("incompatibility not preserved")],
        };
        r.push(Clause::Extends1, vec![], w);
    }
    if let Some(&x) = d1.iter().find(|&&x| !m2.dense.contains(f[x])) {
        r.push(Clause::Extends1, vec![], vec![l1(x)]);
    }
    'restr: for n in 0..m1.levels() {
        for &x in d1 {
            for &y in d1 {
                if m2.dense.contains(f[x]) && m2.dense.contains(f[y]) && m1.same_class(n, x, y) != m2.same_class(n, f[x], f[y]) {
                    r.push(Clause::Extends1, vec![n], vec![l1(x), l1(y)]);
                    break 'restr;
                }
            }
        }
    }

    'cl2: for n in 0..m1.levels() {
        for &x in d1 {
            if let Some(c) = m2.class(n, f[x]) {
                if let Some(&y) = c.iter().find(|&&y| !image_d1.contains(y)) {
                    r.push(Clause::Extends2, vec![n], vec![l1(x), l2(y)]);
                    break 'cl2;
                }
            }
        }
    }

    'cl3: for &y in d2 {
        if image_d1.contains(y) {
            continue;
        }
        for &x in d1 {
            if p2.le(y, f[x]) {
                r.push(Clause::Extends3, vec![], vec![l2(y), l1(x)]);
                break 'cl3;
            }
        }
    }
    r
}

/// Limit of a chain `M_0 < M_1 < ..` given the inclusion of each model into
/// the next. At finite length the union is carried by the last model; the
/// union is still computed and compared, and the result is validated and
/// checked to extend every input.
pub fn chain_limit_along(models: &[SweetModel], links: &[Vec<usize>]) -> Result<SweetModel> {
    let last = models.last().ok_or_else(|| Error::NotAChain("empty chain".into()))?;
    if links.len() + 1 != models.len() {
        return Err(Error::NotAChain("one link per consecutive pair is required".into()));
    }
    for (i, w) in models.windows(2).enumerate() {
        let rep = validate_extends_along(&w[0], &w[1], &links[i])?;
        if !rep.holds() {
            return Err(Error::NotAChain(format!("model {i} is not extended by model {}: {}", i + 1, rep.failures[0])));
        }
    }
    let to_last = compose_to_last(models, links);
    // union of the dense sets and relations, pushed into the last model
    let mut dense = BitSet::new(last.poset.len());
    for (i, m) in models.iter().enumerate() {
        for &x in m.dense.members() {
            dense.insert(to_last[i][x]);
        }
    }
    if dense != last.dense.to_bits() {
        return Err(Error::NotAChain("union of dense sets differs from the last dense set".into()));
    }
    for (i, m) in models.iter().enumerate() {
        for n in 0..m.levels() {
            for c in &m.classes[n] {
                let img: Vec<usize> = c.iter().map(|&x| to_last[i][x]).collect();
                if !img.iter().all(|&y| last.same_class(n, img[0], y)) {
                    return Err(Error::NotAChain(format!("E{n} classes of model {i} split in the union")));
                }
            }
        }
    }
    let rep = validate_sweet(last);
    if !rep.holds() {
        return Err(Error::InvalidModel(format!("limit is not a model of sweetness: {}", rep.failures[0])));
    }
    for (i, m) in models.iter().enumerate() {
        let rep = validate_extends_along(m, last, &to_last[i])?;
        if !rep.holds() {
            return Err(Error::NotAChain(format!("limit does not extend model {i}: {}", rep.failures[0])));
        }
    }
    Ok(last.clone())
}

/// [`chain_limit_along`] with elements identified by label.
pub fn chain_limit(models: &[SweetModel]) -> Result<SweetModel> {
    let links = models
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            label_map(&w[0].poset, &w[1].poset)
                .ok_or_else(|| Error::NotAChain(format!("model {i} has labels missing from model {}", i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    chain_limit_along(models, &links)
}

/// For each model, its elements' positions in the last model.
fn compose_to_last(models: &[SweetModel], links: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let k = models.len();
    let mut out = vec![Vec::new(); k];
    out[k - 1] = (0..models[k - 1].poset.len()).collect();
    for i in (0..k - 1).rev() {
        out[i] = links[i].iter().map(|&x| out[i + 1][x]).collect();
    }
    out
}

/// A model together with the extension reports against its inputs.
#[derive(Clone, Debug)]
pub struct Preserved {
    pub model: SweetModel,
    pub sweet: SweetReport,
    pub extends: Vec<SweetReport>,
}

impl Preserved {
    pub fn holds(&self) -> bool {
        self.sweet.holds() && self.extends.iter().all(SweetReport::holds)
    }
}

/// Reasons no model on the amalgam can extend both `m1` and `m2`:
/// `(⊥,⊥)` lies in the dense set as soon as either `D` contains `⊥`, and
/// then both `D` must contain it with singleton classes.
pub fn amalgam_obstruction(m1: &SweetModel, m2: &SweetModel) -> Option<String> {
    let b1 = m1.dense.contains(m1.poset.bottom());
    let b2 = m2.dense.contains(m2.poset.bottom());
    if b1 != b2 {
        return Some(String::from("bottom is dense on one side only"));
    }
    if b1 {
        for n in 0..m1.levels() {
            let s1 = m1.class(n, m1.poset.bottom()).unwrap().len();
            let s2 = m2.class(n, m2.poset.bottom()).unwrap().len();
            if s1 > 1 || s2 > 1 {
                return Some(format!("bottom has a non-singleton E{n} class"));
            }
        }
    }
    None
}

/// Model on the amalgam extending both factor models. The dense set is the
/// two axis copies of `D¹`, `D²` together with the pairs of non-bottom
/// dense conditions that decide the same base atom; classes on the axes
/// are the factor classes, off the axes they are keyed by both factor
/// classes and the decided atom.
pub fn amalgam_sweet(m1: &SweetModel, m2: &SweetModel, inst: &AmalgamInstance) -> Result<Preserved> {
    if m1.levels() != m2.levels() {
        return Err(Error::RelationCountMismatch {
            left: m1.levels(),
            right: m2.levels(),
        });
    }
    if &m1.poset != inst.left_poset() || &m2.poset != inst.right_poset() {
        return Err(Error::Mismatch("amalgam is not built over the models' posets".into()));
    }
    let (b1, b2) = (m1.poset.bottom(), m2.poset.bottom());
    let atoms = inst.base().atom_count();
    let proj = |f: &[AtomSet], v: AtomSet| AtomSet::from_atoms((0..atoms).filter(|&a| f[a].intersects(v)));

    #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    enum Key {
        Left(usize),
        Right(usize),
        Off(usize, usize, usize),
    }

    let mut dense = Vec::new();
    let mut off_atom = Vec::new();
    for (i, &(x, y)) in inst.pairs().iter().enumerate() {
        let on_left = y == b2 && m1.dense.contains(x);
        let on_right = x == b1 && m2.dense.contains(y);
        if on_left || on_right {
            dense.push(i);
            off_atom.push(None);
            continue;
        }
        if x != b1 && y != b2 && m1.dense.contains(x) && m2.dense.contains(y) {
            let (q1, q2) = (proj(inst.f1(), inst.left().value(x)), proj(inst.f2(), inst.right().value(y)));
            if q1 == q2 && q1.count() == 1 {
                dense.push(i);
                off_atom.push(q1.first());
            }
        }
    }

    let classes = (0..m1.levels())
        .map(|n| {
            let mut groups: BTreeMap<Key, usize> = BTreeMap::new();
            let mut parent: Vec<usize> = (0..dense.len()).collect();
            fn find(parent: &mut [usize], mut x: usize) -> usize {
                while parent[x] != x {
                    parent[x] = parent[parent[x]];
                    x = parent[x];
                }
                x
            }
            for (k, &i) in dense.iter().enumerate() {
                let (x, y) = inst.pairs()[i];
                let mut keys = Vec::new();
                match off_atom[k] {
                    Some(a) => keys.push(Key::Off(
                        m1.class_index(n, x).unwrap(),
                        m2.class_index(n, y).unwrap(),
                        a,
                    )),
                    None => {
                        if y == b2 && m1.dense.contains(x) {
                            keys.push(Key::Left(m1.class_index(n, x).unwrap()));
                        }
                        if x == b1 && m2.dense.contains(y) {
                            keys.push(Key::Right(m2.class_index(n, y).unwrap()));
                        }
                    }
                }
                for key in keys {
                    match groups.get(&key) {
                        Some(&g) => {
                            let (ra, rb) = (find(&mut parent, g), find(&mut parent, k));
                            parent[ra] = rb;
                        }
                        None => {
                            groups.insert(key, k);
                        }
                    }
                }
            }
            let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for k in 0..dense.len() {
                let r = find(&mut parent, k);
                by_root.entry(r).or_default().push(dense[k]);
            }
            by_root.into_values().collect()
        })
        .collect();
    let model = SweetModel::new(inst.poset().clone(), dense, classes)?;
    let sweet = validate_sweet(&model);
    let extends = vec![
        validate_extends_along(m1, &model, inst.inj_left())?,
        validate_extends_along(m2, &model, inst.inj_right())?,
    ];
    Ok(Preserved { model, sweet, extends })
}

/// Model on the two-step iteration `P * Ḋ` extending `m`. Dense conditions
/// are `(p, τ)` with `p ∈ D` and `τ` constant on the atoms below `p` (the
/// value is decided by `p`); classes are keyed by the class of `p` and the
/// decided value.
pub fn hechler_sweet(m: &SweetModel, it: &TwoStep) -> Result<Preserved> {
    if &m.poset != it.base() {
        return Err(Error::Mismatch("iteration is not built over the model's poset".into()));
    }
    let alg = it.base_algebra();
    let mut dense = Vec::new();
    let mut decided = Vec::new();
    for i in 0..it.poset().len() {
        let (p, name) = it.condition(i);
        if !m.dense.contains(p) {
            continue;
        }
        let mut vals = alg.value(p).iter().map(|a| name[a]);
        let first = vals.next().expect("nonzero value");
        if vals.all(|v| v == first) {
            dense.push(i);
            decided.push(first);
        }
    }
    let classes = (0..m.levels())
        .map(|n| {
            let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
            for (k, &i) in dense.iter().enumerate() {
                let p = it.condition(i).0;
                groups
                    .entry((m.class_index(n, p).unwrap(), decided[k]))
                    .or_default()
                    .push(i);
            }
            groups.into_values().collect()
        })
        .collect();
    let model = SweetModel::new(it.poset().clone(), dense, classes)?;
    let sweet = validate_sweet(&model);
    let extends = vec![validate_extends_along(m, &model, it.embedding())?];
    Ok(Preserved { model, sweet, extends })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amalgam::amalgamate_posets;
    use crate::completion::CompleteAlgebra;
    use crate::iterate::{compose_hechler, HechlerParams};

    fn vee() -> Poset {
        Poset::antichain_over_bottom(2)
    }

    fn idx(p: &Poset, ls: &[&str]) -> Vec<usize> {
        ls.iter().map(|l| p.index_of(l).unwrap()).collect()
    }

    #[test]
    fn validate_examples() {
        let chain = Poset::chain(3);
        let m = SweetModel::single_class(chain, vec![0, 1, 2], 1).unwrap();
        assert!(validate_sweet(&m).holds());
        let bad = SweetModel::single_class(vee(), vec![0, 1, 2], 1).unwrap();
        let rep = validate_sweet(&bad);
        assert_eq!(rep.failures.len(), 1);
        assert_eq!(rep.failures[0].clause, Clause::Directedness);
        assert!(validate_sweet(&SweetModel::trivial(1)).holds());
    }

    #[test]
    fn each_negative_clause_is_reported() {
        let p = vee();
        let a = p.index_of("a").unwrap();
        let b = p.index_of("b").unwrap();
        let not_dense = SweetModel::discrete(p.clone(), vec![a], 1).unwrap();
        assert_eq!(validate_sweet(&not_dense).failures[0].clause, Clause::Density);
        let fusion = SweetModel::new(p.clone(), vec![0, a, b], vec![vec![vec![0, a], vec![b]], vec![vec![0, b], vec![a]]]).unwrap();
        let rep = validate_sweet(&fusion);
        assert!(rep.failed(Clause::Fusion));
        assert!(!rep.failed(Clause::Directedness));
        let cont = SweetModel::new(p, vec![0, a, b], vec![vec![vec![0, a], vec![b]]]).unwrap();
        let rep = validate_sweet(&cont);
        assert_eq!(rep.failures.len(), 1);
        assert_eq!(rep.failures[0].clause, Clause::Continuity);
    }

    #[test]
    fn malformed_partitions_are_errors() {
        let p = vee();
        assert!(SweetModel::new(p.clone(), vec![1, 2], vec![vec![vec![1]]]).is_err());
        assert!(SweetModel::new(p.clone(), vec![1, 2], vec![vec![vec![1, 2], vec![2]]]).is_err());
        assert!(SweetModel::new(p.clone(), vec![1], vec![vec![vec![1, 2]]]).is_err());
        assert!(SweetModel::new(p, vec![1], vec![]).is_err());
    }

    fn tree_models() -> (SweetModel, SweetModel) {
        let t1 = Poset::binary_tree(1);
        let t2 = Poset::binary_tree(2);
        let m1 = SweetModel::discrete(t1.clone(), idx(&t1, &["0", "1"]), 1).unwrap();
        let m2 = SweetModel::discrete(t2.clone(), idx(&t2, &["0", "1", "00", "01", "10", "11"]), 1).unwrap();
        (m1, m2)
    }

    #[test]
    fn extension_examples() {
        let (m1, m2) = tree_models();
        assert!(validate_sweet(&m1).holds());
        assert!(validate_sweet(&m2).holds());
        assert!(validate_extends(&m1, &m1).unwrap().holds());
        assert!(validate_extends(&m1, &m2).unwrap().holds());
        // merging 0 with 00 drags a point outside D¹ into a class of D¹
        let t2 = m2.poset().clone();
        let merged = SweetModel::new(
            t2.clone(),
            idx(&t2, &["0", "1", "00", "01", "10", "11"]),
            vec![vec![idx(&t2, &["0", "00"]), idx(&t2, &["1"]), idx(&t2, &["01"]), idx(&t2, &["10"]), idx(&t2, &["11"])]],
        )
        .unwrap();
        let rep = validate_extends(&m1, &merged).unwrap();
        assert!(rep.failed(Clause::Extends2));
        let two = SweetModel::discrete(t2, vec![1, 2], 2).unwrap();
        assert!(validate_extends(&m1, &two).is_err());
    }

    #[test]
    fn clause_three_catches_weaker_dense_points() {
        let (m1, _) = tree_models();
        let t2 = Poset::binary_tree(2);
        let m2 = SweetModel::discrete(t2.clone(), idx(&t2, &["r", "0", "1", "00", "01", "10", "11"]), 1).unwrap();
        let rep = validate_extends(&m1, &m2).unwrap();
        assert!(rep.failed(Clause::Extends3));
    }

    #[test]
    fn chain_limits() {
        let (m1, m2) = tree_models();
        assert_eq!(chain_limit(core::slice::from_ref(&m1)).unwrap(), m1);
        assert_eq!(chain_limit(&[m1.clone(), m1.clone()]).unwrap(), m1);
        let lim = chain_limit(&[m1.clone(), m2.clone()]).unwrap();
        assert!(validate_extends(&m1, &lim).unwrap().holds());
        assert!(validate_extends(&m2, &lim).unwrap().holds());
        assert!(chain_limit(&[m2, m1]).is_err());
    }

    #[test]
    fn restriction_is_extended() {
        let (_, m2) = tree_models();
        let t2 = m2.poset();
        let (sub, map) = m2.restrict(&idx(t2, &["r", "0", "1"])).unwrap();
        assert!(validate_extends_along(&sub, &m2, &map).unwrap().holds());
        assert_eq!(sub.dense().len(), 2);
        // not a complete suborder: {00,01} misses 1
        let (sub, map) = m2.restrict(&idx(t2, &["r", "0", "00", "01"])).unwrap();
        assert!(validate_extends_along(&sub, &m2, &map).unwrap().failed(Clause::Extends1));
    }

    #[test]
    fn amalgam_sweet_on_trivial_and_chain_models() {
        let base = CompleteAlgebra::with_atoms(1).unwrap();
        let t = SweetModel::trivial(1);
        let one = [AtomSet::full(1)];
        let inst = amalgamate_posets(&base, t.poset(), t.poset(), &one, &one).unwrap();
        let out = amalgam_sweet(&t, &t, &inst).unwrap();
        assert!(out.holds());
        assert_eq!(out.model.poset().len(), 1);

        let c = Poset::chain(3);
        let m = SweetModel::single_class(c.clone(), vec![1, 2], 1).unwrap();
        let inst = amalgamate_posets(&base, &c, &c, &one, &one).unwrap();
        let out = amalgam_sweet(&m, &m, &inst).unwrap();
        assert!(out.holds(), "{:?}", out);
        assert_eq!(out.model.dense().len(), 8);
    }

    #[test]
    fn amalgam_sweet_over_a_nontrivial_base() {
        let (_, m2) = tree_models();
        let t2 = m2.poset().clone();
        let base = CompleteAlgebra::with_atoms(2).unwrap();
        // tree atoms 00,01,10,11; the base decides the first branch bit
        let f = [AtomSet::from_atoms([0, 1]), AtomSet::from_atoms([2, 3])];
        let inst = amalgamate_posets(&base, &t2, &t2, &f, &f).unwrap();
        let out = amalgam_sweet(&m2, &m2, &inst).unwrap();
        assert!(out.holds(), "{:?}", out.sweet);
    }

    #[test]
    fn obstruction_is_real() {
        // D¹ = {⊥} on the trivial poset against D² = {1} on a 2-chain
        let t = SweetModel::trivial(1);
        let c = Poset::chain(2);
        let m2 = SweetModel::discrete(c.clone(), vec![1], 1).unwrap();
        assert!(amalgam_obstruction(&t, &m2).is_some());
        let base = CompleteAlgebra::with_atoms(1).unwrap();
        let one = [AtomSet::full(1)];
        let inst = amalgamate_posets(&base, t.poset(), &c, &one, &one).unwrap();
        // brute force: no dense set and partition on the 2-element amalgam
        // extends both
        let n = inst.poset().len();
        let mut found = false;
        for mask in 1u32..(1 << n) {
            let d: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            for split in 0..2 {
                let classes = if split == 0 { vec![d.clone()] } else { d.iter().map(|&x| vec![x]).collect() };
                let m = SweetModel::new(inst.poset().clone(), d.clone(), vec![classes]).unwrap();
                let a = validate_extends_along(&t, &m, inst.inj_left()).unwrap().holds();
                let b = validate_extends_along(&m2, &m, inst.inj_right()).unwrap().holds();
                found |= a && b;
            }
        }
        assert!(!found);
    }

    #[test]
    fn hechler_sweet_examples() {
        let t = SweetModel::trivial(1);
        let it = compose_hechler(t.poset(), HechlerParams::new(1, 1).unwrap()).unwrap();
        let out = hechler_sweet(&t, &it).unwrap();
        assert!(out.holds(), "{:?}", out);
        let c = Poset::chain(3);
        let m = SweetModel::single_class(c.clone(), vec![0, 1, 2], 1).unwrap();
        let it = compose_hechler(&c, HechlerParams::new(2, 1).unwrap()).unwrap();
        let out = hechler_sweet(&m, &it).unwrap();
        assert!(out.holds(), "{:?}", out);
        // different decided values land in different classes
        let d = out.model.dense().members();
        for &x in d {
            for &y in d {
                if out.model.same_class(0, x, y) {
                    let (px, nx) = it.condition(x);
                    let (py, ny) = it.condition(y);
                    let a = it.base_algebra().value(px).first().unwrap();
                    let b = it.base_algebra().value(py).first().unwrap();
                    assert_eq!(nx[a], ny[b]);
                }
            }
        }
    }
}
