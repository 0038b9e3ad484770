//! Finite Hechler posets and two-step iterations `P * Q̇`.
//!
//! A `P`-name is given by its value at each atom of `BA(P)`. Conditions of
//! the iteration are pairs `(p, τ)` in canonical form: `τ(a)` is the bottom
//! of `Q̇(a)` for every atom `a` not below `p`, since only atoms below `p`
//! can be generic once `p` is in the filter.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::bits::AtomSet;
use crate::completion::{regular_open_completion, CompleteAlgebra};
use crate::embed::{check_complete_suborder, is_complete_suborder_via_reductions, quotient_at_atom, PosetInclusion, QuotientName};
use crate::poset::Poset;
use crate::{Error, Result};

/// Largest iteration [`two_step`] will build.
pub const TWO_STEP_CAP: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HechlerParams {
    m: usize,
    h: usize,
}

impl HechlerParams {
    /// `m` is the domain size (at least 1), `h` the largest value.
    pub fn new(m: usize, h: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParams("domain size must be positive".into()));
        }
        let size = (h + 1)
            .checked_pow(m as u32)
            .and_then(|s| s.checked_mul(m + 1))
            .filter(|&s| s <= TWO_STEP_CAP);
        if size.is_none() {
            return Err(Error::TooLarge {
                what: "Hechler poset",
                size: usize::MAX,
                cap: TWO_STEP_CAP,
            });
        }
        Ok(HechlerParams { m, h })
    }

    pub fn m(self) -> usize {
        self.m
    }

    pub fn h(self) -> usize {
        self.h
    }

    /// `(m+1)(h+1)^m`.
    pub fn size(self) -> usize {
        (self.m + 1) * (self.h + 1).pow(self.m as u32)
    }
}

/// `(n, f)` with `n ≤ m` and `f: m -> {0..h}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HechlerCondition {
    pub n: usize,
    pub f: Vec<usize>,
}

impl HechlerCondition {
    /// `n ≤ n'`, the stems agree below `n`, and `f` is dominated pointwise.
    pub fn le(&self, other: &HechlerCondition) -> bool {
        self.n <= other.n
            && self.f[..self.n] == other.f[..self.n]
            && self.f.iter().zip(&other.f).all(|(a, b)| a <= b)
    }

    pub fn label(&self) -> String {
        let f: Vec<String> = self.f.iter().map(|v| format!("{v}")).collect();
        format!("({},({}))", self.n, f.join(","))
    }
}

/// All conditions, stem length first, then `f` in lexicographic order.
pub fn hechler_conditions(params: HechlerParams) -> Vec<HechlerCondition> {
    let (m, h) = (params.m, params.h);
    let per = (h + 1).pow(m as u32);
    let mut out = Vec::with_capacity(params.size());
    for n in 0..=m {
        for code in 0..per {
            let mut f = vec![0; m];
            let mut c = code;
            for k in (0..m).rev() {
                f[k] = c % (h + 1);
                c /= h + 1;
            }
            out.push(HechlerCondition { n, f });
        }
    }
    out
}

/// The Hechler poset; the bottom `(0, 0..0)` has index 0.
pub fn hechler_poset(params: HechlerParams) -> Poset {
    let conds = hechler_conditions(params);
    let labels = conds.iter().map(HechlerCondition::label).collect();
    Poset::from_le(labels, 0, |x, y| conds[x].le(&conds[y])).expect("Hechler order is a partial order")
}

/// A two-step iteration with its canonical embedding of the first step.
#[derive(Clone, Debug)]
pub struct TwoStep {
    base: Poset,
    alg: CompleteAlgebra,
    fibres: Vec<Poset>,
    conds: Vec<(usize, Vec<usize>)>,
    index: BTreeMap<(usize, Vec<usize>), usize>,
    poset: Poset,
    embedding: Vec<usize>,
}

/// `P * Q̇` with `Q̇(a) = fibres[a]` for each atom `a` of `BA(P)`.
/// `(p,τ) ≤ (p',τ')` iff `p ≤ p'` and `τ(a) ≤ τ'(a)` for every atom `a`
/// below `p'`.
pub fn two_step(p: &Poset, fibres: Vec<Poset>) -> Result<TwoStep> {
    let alg = regular_open_completion(p)?;
    if fibres.len() != alg.atom_count() {
        return Err(Error::InvalidName(format!(
            "{} fibres for {} atoms",
            fibres.len(),
            alg.atom_count()
        )));
    }
    let atoms = alg.atom_count();
    let mut total = 0usize;
    for x in 0..p.len() {
        let n = alg
            .value(x)
            .iter()
            .try_fold(1usize, |acc, a| acc.checked_mul(fibres[a].len()));
        total = n.and_then(|n| total.checked_add(n)).unwrap_or(usize::MAX);
    }
    if total > TWO_STEP_CAP {
        return Err(Error::TooLarge {
            what: "two-step iteration",
            size: total,
            cap: TWO_STEP_CAP,
        });
    }
    let bottoms: Vec<usize> = fibres.iter().map(Poset::bottom).collect();
    let mut conds = Vec::with_capacity(total);
    for x in 0..p.len() {
        let dm: Vec<usize> = alg.value(x).iter().collect();
        let mut name = bottoms.clone();
        let mut digits = vec![0usize; dm.len()];
        loop {
            for (i, &a) in dm.iter().enumerate() {
                name[a] = digits[i];
            }
            conds.push((x, name.clone()));
            // odometer over the fibres below x
            let mut i = 0;
            while i < dm.len() {
                digits[i] += 1;
                if digits[i] < fibres[dm[i]].len() {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == dm.len() {
                break;
            }
        }
    }
    let labels = conds
        .iter()
        .map(|(x, name)| {
            let vs: Vec<&str> = (0..atoms).map(|a| fibres[a].label(name[a])).collect();
            format!("({}|{})", p.label(*x), vs.join(","))
        })
        .collect();
    let bottom = conds
        .iter()
        .position(|(x, name)| *x == p.bottom() && *name == bottoms)
        .expect("bottom condition");
    let poset = Poset::from_le(labels, bottom, |i, j| {
        let ((x, s), (y, t)) = (&conds[i], &conds[j]);
        p.le(*x, *y) && alg.value(*y).iter().all(|a| fibres[a].le(s[a], t[a]))
    })?;
    let index: BTreeMap<(usize, Vec<usize>), usize> = conds.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    let embedding = (0..p.len()).map(|x| index[&(x, bottoms.clone())]).collect();
    Ok(TwoStep {
        base: p.clone(),
        alg,
        fibres,
        conds,
        index,
        poset,
        embedding,
    })
}

impl TwoStep {
    /// The first step `P`.
    pub fn base(&self) -> &Poset {
        &self.base
    }

    pub fn base_algebra(&self) -> &CompleteAlgebra {
        &self.alg
    }

    pub fn fibres(&self) -> &[Poset] {
        &self.fibres
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    /// `(p, τ)` with `τ` listed per atom of `BA(P)`.
    pub fn condition(&self, i: usize) -> (usize, &[usize]) {
        let (p, name) = &self.conds[i];
        (*p, name)
    }

    pub fn index_of(&self, p: usize, name: &[usize]) -> Option<usize> {
        self.index.get(&(p, name.to_vec())).copied()
    }

    /// `p ↦ (p, bottom name)`.
    pub fn embedding(&self) -> &[usize] {
        &self.embedding
    }

    pub fn inclusion(&self) -> Result<PosetInclusion> {
        PosetInclusion::new(self.base.clone(), self.poset.clone(), self.embedding.clone())
    }
}

/// `P * Ḋ` for the Hechler poset with the given parameters, checking that
/// `P` sits completely inside.
pub fn compose_hechler(p: &Poset, params: HechlerParams) -> Result<TwoStep> {
    let alg = regular_open_completion(p)?;
    let d = hechler_poset(params);
    let ts = two_step(p, vec![d; alg.atom_count()])?;
    if !check_complete_suborder(&ts.inclusion()?) {
        return Err(Error::NotCompleteSuborder);
    }
    Ok(ts)
}

/// Decides whether `P * (Q:P)` and `Q` have the same completion. The
/// correspondence sends `(p, τ)` to the join over atoms `a` below `p` of
/// `value(τ(a)) ∩ value(a)` in `BA(Q)`; it must send the atoms of the
/// iteration bijectively onto those of `BA(Q)` and carry every value of the
/// iteration to the corresponding value.
pub fn two_step_equivalence(inc: &PosetInclusion) -> Result<bool> {
    if !is_complete_suborder_via_reductions(inc) {
        return Err(Error::NotCompleteSuborder);
    }
    let qn = QuotientName::new(inc)?;
    let base = qn.base();
    let fibres = (0..base.atom_count())
        .map(|a| quotient_at_atom(&qn, a))
        .collect::<Result<Vec<_>>>()?;
    let members: Vec<Vec<usize>> = (0..base.atom_count())
        .map(|a| qn.table(a).map(|t| t.to_vec()))
        .collect::<Result<_>>()?;
    let ts = two_step(inc.small(), fibres)?;
    let bq = regular_open_completion(inc.large())?;
    let bt = regular_open_completion(ts.poset())?;
    if bq.atom_count() != bt.atom_count() {
        return Ok(false);
    }
    let mut region = vec![AtomSet::EMPTY; base.atom_count()];
    for m in inc.small().maximal_elements() {
        let a = base.value(m).first().expect("nonzero");
        region[a] = bq.value(inc.image(m));
    }
    let theta = |i: usize| {
        let (p, name) = ts.condition(i);
        base.value(p).iter().fold(AtomSet::EMPTY, |acc, a| {
            acc | (bq.value(members[a][name[a]]) & region[a])
        })
    };
    let mut bij = vec![usize::MAX; bt.atom_count()];
    let mut hit = AtomSet::EMPTY;
    for m in ts.poset().maximal_elements() {
        let t = theta(m);
        if t.count() != 1 || hit.intersects(t) {
            return Ok(false);
        }
        hit = hit | t;
        let a = bt.value(m).first().expect("nonzero");
        bij[a] = t.first().expect("one atom");
    }
    if hit != bq.full() {
        return Ok(false);
    }
    Ok((0..ts.poset().len()).all(|i| {
        let mapped = bt.value(i).iter().fold(AtomSet::EMPTY, |acc, a| acc | AtomSet::singleton(bij[a]));
        mapped == theta(i)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::is_complete_suborder;

    #[test]
    fn hechler_sizes_and_examples() {
        for m in 1..=3 {
            for h in 0..=2 {
                let p = HechlerParams::new(m, h).unwrap();
                assert_eq!(hechler_poset(p).len(), (m + 1) * (h + 1).pow(m as u32));
            }
        }
        let d = hechler_poset(HechlerParams::new(2, 1).unwrap());
        assert_eq!(d.len(), 12);
        assert_eq!(d.label(d.bottom()), "(0,(0,0))");
        let x = d.index_of("(0,(0,0))").unwrap();
        let y = d.index_of("(1,(0,1))").unwrap();
        assert!(d.le(x, y));
        let u = d.index_of("(1,(1,0))").unwrap();
        let v = d.index_of("(1,(0,0))").unwrap();
        assert!(!d.compat(u, v));
        assert!(HechlerParams::new(0, 1).is_err());
    }

    #[test]
    fn two_step_degenerate_cases() {
        let q = Poset::binary_tree(1);
        let ts = two_step(&Poset::trivial(), vec![q.clone()]).unwrap();
        assert_eq!(ts.poset().len(), q.len());
        assert_eq!(ts.poset().covers().len(), q.covers().len());
        let p = Poset::binary_tree(1);
        let ts = two_step(&p, vec![Poset::trivial(); 2]).unwrap();
        assert_eq!(ts.poset().len(), p.len());
        assert!(two_step(&p, vec![Poset::trivial()]).is_err());
    }

    #[test]
    fn two_step_over_a_vee() {
        let p = Poset::antichain_over_bottom(2);
        let ts = two_step(&p, vec![Poset::chain(2); 2]).unwrap();
        // bottom carries 4 names, a and b carry 2 each
        assert_eq!(ts.poset().len(), 8);
        assert!(is_complete_suborder(&ts.inclusion().unwrap()).unwrap());
    }

    #[test]
    fn compose_hechler_embeds_completely() {
        let p = Poset::antichain_over_bottom(2);
        let ts = compose_hechler(&p, HechlerParams::new(1, 1).unwrap()).unwrap();
        assert_eq!(ts.poset().len(), 16 + 4 + 4);
    }

    #[test]
    fn two_step_equivalence_examples() {
        let p = Poset::binary_tree(1);
        assert!(two_step_equivalence(&PosetInclusion::identity(&p)).unwrap());
        let r = Poset::antichain_over_bottom(2);
        let q = p.product(&r);
        let inj = (0..p.len()).map(|i| i * r.len()).collect();
        let inc = PosetInclusion::new(p.clone(), q, inj).unwrap();
        assert!(two_step_equivalence(&inc).unwrap());
        let t = PosetInclusion::by_labels(&p, &Poset::binary_tree(2)).unwrap();
        assert!(two_step_equivalence(&t).unwrap());
        let bad = PosetInclusion::by_labels(&Poset::antichain_over_bottom(2), &Poset::antichain_over_bottom(3)).unwrap();
        assert_eq!(two_step_equivalence(&bad), Err(Error::NotCompleteSuborder));
    }
}
