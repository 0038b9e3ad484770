//! Lemma verification runs.
//!
//! Every run enumerates (or, for the sweetness laws, draws from a seeded
//! generator) its instances up front in a fixed order, checks them in
//! parallel chunk by chunk, and merges the per-instance outcomes in input
//! order. The time budget is only consulted between chunks; when it runs
//! out the report says so instead of claiming an exhaustive sweep.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use forcelab_core::amalgam::{amalgamate_posets, check_identification};
use forcelab_core::bcd::{self, BcdInstance, Reading};
use forcelab_core::bits::AtomSet;
use forcelab_core::completion::{regular_open_completion, CompleteAlgebra, Subalgebra};
use forcelab_core::embed::{check_complete_suborder, forces_unchecked, is_complete_suborder, is_complete_suborder_via_reductions, PosetInclusion};
use forcelab_core::enumerate::{inclusions_into, posets_up_to, surjection_images, surjections};
use forcelab_core::iterate::{compose_hechler, two_step_equivalence, HechlerParams};
use forcelab_core::sweet::{amalgam_obstruction, amalgam_sweet, chain_limit_along, hechler_sweet, label_map, validate_extends_along, validate_sweet, SweetModel};
use forcelab_core::tower::{tower_amalgamate, tower_chain_merge, tower_hechler, tower_leq_by_labels, AmalgamData, DerivedTower};
use forcelab_core::{Poset, SweetReport, Tower, TowerLeqWitness};

use crate::doc::{Decl, Document, PosetDecl, SweetDecl};
use crate::emit::{poset_dsl, sweet_dsl};
use crate::report::VerificationReport;
use crate::Error;

pub const DEFAULT_BUDGET: Duration = Duration::from_secs(60);
const CHUNK: usize = 64;

/// Fixture corpus shipped with the crate.
pub const CORPUS: &[(&str, &str)] = &[
    ("basic.fl", include_str!("../fixtures/valid/basic.fl")),
    ("trees.fl", include_str!("../fixtures/valid/trees.fl")),
    ("towers.fl", include_str!("../fixtures/valid/towers.fl")),
];

#[derive(Clone, Debug)]
pub struct LabConfig {
    pub seed: u64,
    pub budget: Duration,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Record wall-clock time in the report.
    pub timing: bool,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            seed: 0,
            budget: DEFAULT_BUDGET,
            jobs: None,
            timing: false,
        }
    }
}

/// Per-instance result, merged in input order.
#[derive(Default)]
struct Outcome {
    stats: Vec<(&'static str, u64)>,
    counterexamples: Vec<Value>,
}

impl Outcome {
    fn bump(&mut self, key: &'static str) {
        self.stats.push((key, 1));
    }

    fn fail(&mut self, v: Value) {
        self.counterexamples.push(v);
    }
}

fn run<T: Sync>(
    lemma: &str,
    caps: &[(&str, u64)],
    cfg: &LabConfig,
    items: &[T],
    check: impl Fn(&T) -> Outcome + Sync + Send,
) -> VerificationReport {
    let start = Instant::now();
    let caps: BTreeMap<String, u64> = caps.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let mut report = VerificationReport::new(lemma, caps, cfg.seed);
    let body = || {
        let mut out: Vec<Outcome> = Vec::with_capacity(items.len());
        for chunk in items.chunks(CHUNK) {
            if start.elapsed() >= cfg.budget {
                return (out, false);
            }
            out.extend(chunk.par_iter().map(&check).collect::<Vec<_>>());
        }
        (out, true)
    };
    let (outcomes, complete) = match cfg.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .expect("thread pool")
            .install(body),
        None => body(),
    };
    report.exhaustive = complete;
    report.checked = outcomes.len() as u64;
    for o in outcomes {
        for (k, v) in o.stats {
            report.bump(k, v);
        }
        report.counterexamples.extend(o.counterexamples);
    }
    if cfg.timing {
        report.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    }
    report.finish();
    report
}

fn blocks(s: &Subalgebra) -> Vec<Vec<usize>> {
    s.blocks().iter().map(|b| b.iter().collect()).collect()
}

fn atoms(b: AtomSet) -> Vec<usize> {
    b.iter().collect()
}

/// The four-algebra quotient lemma over every configuration with at most
/// `max_atoms` atoms. Hypothesis (2) is evaluated under each reading;
/// counterexamples are reported for the literal and the agreement reading,
/// refutations under the quotient-against-`C0` reading are counted.
pub fn verify_bcd(max_atoms: usize, cfg: &LabConfig) -> Result<VerificationReport, Error> {
    if !(2..=6).contains(&max_atoms) {
        return Err(Error::Usage(format!("bcd needs 2 <= max_atoms <= 6, got {max_atoms}")));
    }
    let items: Vec<BcdInstance> = (1..=max_atoms).flat_map(bcd::instances).collect();
    Ok(run("bcd", &[("max_atoms", max_atoms as u64)], cfg, &items, |inst| {
        let o = bcd::evaluate(inst);
        let mut out = Outcome::default();
        for r in Reading::ALL {
            if o.hypothesis2[r as usize] {
                out.bump(match r {
                    Reading::Literal => "hypothesis2.literal",
                    Reading::Quotient => "hypothesis2.quotient",
                    Reading::Agreement => "hypothesis2.agreement",
                });
            }
            if o.hypotheses(r) {
                out.bump(match r {
                    Reading::Literal => "hypotheses.literal",
                    Reading::Quotient => "hypotheses.quotient",
                    Reading::Agreement => "hypotheses.agreement",
                });
            }
        }
        if o.hypothesis3 {
            out.bump("hypothesis3");
        }
        if o.d_in_c0 {
            out.bump("d_subset_c0");
        }
        if o.conclusion.is_ok() {
            out.bump("conclusion");
        }
        if o.refutes(Reading::Quotient) {
            out.bump("refuted.quotient");
        }
        for r in [Reading::Literal, Reading::Agreement] {
            if o.refutes(r) {
                let w = o.conclusion.unwrap_err();
                out.fail(json!({
                    "reading": r.id(),
                    "atoms": inst.atoms(),
                    "b": blocks(&inst.b),
                    "d": blocks(&inst.d),
                    "c0": blocks(&inst.c0),
                    "witness": {"d": atoms(w.d), "d0": atoms(w.d0)},
                }));
            }
        }
        out
    }))
}

/// Re-runs a BCD certificate in isolation: true when it still refutes.
pub fn recheck_bcd(cert: &Value) -> Result<bool, Error> {
    let bad = || Error::Usage("malformed bcd certificate".into());
    let n = cert["atoms"].as_u64().ok_or_else(bad)? as usize;
    let part = |key: &str| -> Result<Subalgebra, Error> {
        let bs: Vec<Vec<usize>> = serde_json::from_value(cert[key].clone()).map_err(|_| bad())?;
        Ok(Subalgebra::from_blocks(n, bs.into_iter().map(AtomSet::from_atoms))?)
    };
    let reading = match cert["reading"].as_str() {
        Some("literal") => Reading::Literal,
        Some("agreement") => Reading::Agreement,
        Some("quotient") => Reading::Quotient,
        _ => return Err(bad()),
    };
    let inst = BcdInstance::new(part("b")?, part("d")?, part("c0")?)?;
    Ok(bcd::evaluate(&inst).refutes(reading))
}

/// Factors for the amalgam sweep: naturally labeled posets with at most
/// `elements` elements and the condition posets of the algebras with
/// `1..=factor_atoms` atoms, keeping those with at most `factor_atoms`
/// completion atoms.
fn amalgam_factors(factor_atoms: usize, elements: usize) -> Result<Vec<(Poset, usize)>, Error> {
    let mut out = Vec::new();
    for p in posets_up_to(elements) {
        let a = regular_open_completion(&p)?.atom_count();
        if a <= factor_atoms {
            out.push((p, a));
        }
    }
    for n in 1..=factor_atoms {
        let p = CompleteAlgebra::with_atoms(n)?.condition_poset()?;
        if !out.iter().any(|(q, _)| *q == p) {
            out.push((p, n));
        }
    }
    Ok(out)
}

#[derive(Clone)]
struct AmalgamCase {
    base: usize,
    left: usize,
    right: usize,
    f1: Vec<AtomSet>,
    f2: Vec<AtomSet>,
}

/// Finite claims about amalgamation over every instance within the caps:
/// the atom criterion agrees with the witness search, both injections are
/// complete, the two copies of the base are identified, a trivial base
/// gives the product, an identity amalgam collapses to the base, and
/// quotient forcing over complete sub-posets of a factor survives the
/// passage to the amalgam.
pub fn verify_amalgam_claims(base_atoms: usize, factor_atoms: usize, elements: usize, cfg: &LabConfig) -> Result<VerificationReport, Error> {
    if base_atoms == 0 || factor_atoms == 0 || factor_atoms > 4 || base_atoms > factor_atoms || elements > 5 {
        return Err(Error::Usage("amalgam caps need 1 <= base <= factor <= 4 and elements <= 5".into()));
    }
    let factors = amalgam_factors(factor_atoms, elements)?;
    let mut cases = Vec::new();
    for k in 1..=base_atoms {
        for (i, (_, a1)) in factors.iter().enumerate() {
            for (j, (_, a2)) in factors.iter().enumerate() {
                for s1 in surjections(*a1, k) {
                    for s2 in surjections(*a2, k) {
                        cases.push(AmalgamCase {
                            base: k,
                            left: i,
                            right: j,
                            f1: surjection_images(&s1, k),
                            f2: surjection_images(&s2, k),
                        });
                    }
                }
            }
        }
    }
    let caps = [
        ("base_atoms", base_atoms as u64),
        ("factor_atoms", factor_atoms as u64),
        ("factor_elements", elements as u64),
    ];
    Ok(run("amalgam", &caps, cfg, &cases, |c| {
        let (l, r) = (&factors[c.left].0, &factors[c.right].0);
        let mut out = Outcome::default();
        let cert = |claim: &str, detail: Value| {
            json!({
                "claim": claim,
                "base_atoms": c.base,
                "left": poset_dsl(&PosetDecl::from_poset("left".into(), l)),
                "right": poset_dsl(&PosetDecl::from_poset("right".into(), r)),
                "f1": atom_labels(l, &c.f1),
                "f2": atom_labels(r, &c.f2),
                "detail": detail,
            })
        };
        let base = CompleteAlgebra::with_atoms(c.base).expect("small base");
        let inst = match amalgamate_posets(&base, l, r, &c.f1, &c.f2) {
            Ok(i) => i,
            Err(e) => {
                out.fail(cert("construction", json!(e.to_string())));
                return out;
            }
        };
        for x in 0..l.len() {
            for y in 0..r.len() {
                out.bump("membership.pairs");
                if inst.is_member(x, y) != inst.is_member_by_witness(x, y) {
                    out.fail(cert("membership", json!([l.label(x), r.label(y)])));
                }
            }
        }
        let (li, ri) = (inst.left_inclusion(), inst.right_inclusion());
        match (li, ri) {
            (Ok(li), Ok(ri)) => {
                if !check_complete_suborder(&li) || !check_complete_suborder(&ri) {
                    out.fail(cert("injections", json!("not complete")));
                }
                quotient_preservation(&li, &mut out, &cert);
            }
            (Err(e), _) | (_, Err(e)) => out.fail(cert("injections", json!(e.to_string()))),
        }
        if !check_identification(&inst) {
            out.fail(cert("identification", Value::Null));
        }
        if c.base == 1 {
            out.bump("trivial_base");
            if *inst.poset() != l.product(r) {
                out.fail(cert("trivial_base_product", Value::Null));
            }
        }
        if c.left == c.right && c.f1 == c.f2 && factors[c.left].1 == c.base {
            out.bump("identity");
            if inst.completion().atom_count() != c.base {
                out.fail(cert("identity_collapse", json!(inst.completion().atom_count())));
            }
        }
        out
    }))
}

/// For every complete sub-poset `S` of the left factor: `S` stays complete
/// in the amalgam and `p ⊩_S q ∈ (P1:S)` implies `p ⊩_S q ∈ (A:S)`.
fn quotient_preservation(left: &PosetInclusion, out: &mut Outcome, cert: &dyn Fn(&str, Value) -> Value) {
    for sub in inclusions_into(left.small()) {
        if !check_complete_suborder(&sub) {
            continue;
        }
        let up = sub.then(left).expect("composable");
        out.bump("quotient.subposets");
        if !check_complete_suborder(&up) {
            out.fail(cert("suborder_transitivity", json!(sub.small().labels())));
            continue;
        }
        for p in 0..sub.small().len() {
            for q in 0..left.small().len() {
                if forces_unchecked(&sub, p, q) && !forces_unchecked(&up, p, left.image(q)) {
                    out.fail(cert(
                        "quotient_preservation",
                        json!({"sub": sub.small().labels(), "p": sub.small().label(p), "q": left.small().label(q)}),
                    ));
                }
            }
        }
    }
}

/// Both complete-suborder criteria over every inclusion into a poset with at
/// most `size` elements, plus the two-step equivalence on every complete
/// one.
pub fn verify_embedding_criteria(size: usize, cfg: &LabConfig) -> Result<VerificationReport, Error> {
    if !(1..=6).contains(&size) {
        return Err(Error::Usage(format!("embedding needs 1 <= size <= 6, got {size}")));
    }
    let mut incs: Vec<PosetInclusion> = posets_up_to(size).iter().flat_map(inclusions_into).collect();
    incs.push(known_false_inclusion());
    Ok(run("embedding", &[("size", size as u64)], cfg, &incs, |inc| {
        let mut out = Outcome::default();
        let a = is_complete_suborder(inc).expect("within cap");
        let b = is_complete_suborder_via_reductions(inc);
        let cert = |claim: &str| {
            json!({
                "claim": claim,
                "small": inc.small().labels(),
                "large": poset_dsl(&PosetDecl::from_poset("large".into(), inc.large())),
                "injection": inc.injection().iter().map(|&i| inc.large().label(i)).collect::<Vec<_>>(),
            })
        };
        if a != b {
            out.fail(cert("criteria_agree"));
        }
        if a {
            out.bump("complete");
            match two_step_equivalence(inc) {
                Ok(true) => out.bump("two_step.equivalent"),
                Ok(false) => out.fail(cert("two_step_equivalence")),
                Err(e) => out.fail(json!({"claim": "two_step_equivalence", "error": e.to_string()})),
            }
        }
        out
    }))
}

/// `{⊥,a,b}` inside `{⊥,a,b,c}` with `c` above `a` and `b`.
pub fn known_false_inclusion() -> PosetInclusion {
    let large = Poset::from_covers(
        ["0", "a", "b", "c"].map(String::from).to_vec(),
        0,
        &[(0, 1), (0, 2), (1, 3), (2, 3)],
    )
    .expect("poset");
    let small = large.subposet(&[0, 1, 2]).expect("sub-poset");
    PosetInclusion::new(small, large, vec![0, 1, 2]).expect("order embedding")
}

/// Completion checks for every poset with at most `size` elements: the
/// dense map is dense and preserves order and incompatibility, and the
/// completion of the completion's condition order is the same algebra.
pub fn verify_completion(size: usize, cfg: &LabConfig) -> Result<VerificationReport, Error> {
    if !(1..=6).contains(&size) {
        return Err(Error::Usage(format!("completion needs 1 <= size <= 6, got {size}")));
    }
    let ps = posets_up_to(size);
    Ok(run("completion", &[("size", size as u64)], cfg, &ps, |p| {
        let mut out = Outcome::default();
        let cert = |claim: &str| json!({"claim": claim, "poset": poset_dsl(&PosetDecl::from_poset("p".into(), p))});
        let ba = match regular_open_completion(p) {
            Ok(b) => b,
            Err(e) => {
                out.fail(json!({"claim": "construction", "error": e.to_string()}));
                return out;
            }
        };
        if ba.value(p.bottom()) != ba.full() {
            out.fail(cert("bottom_is_one"));
        }
        for x in 0..p.len() {
            for y in 0..p.len() {
                if p.le(x, y) && !ba.value(y).is_subset(ba.value(x)) {
                    out.fail(cert("order"));
                }
                if p.compat(x, y) == (ba.value(x) & ba.value(y)).is_empty() {
                    out.fail(cert("incompatibility"));
                }
            }
        }
        if !ba.nonzero_elements().all(|b| (0..p.len()).any(|x| ba.value(x).is_subset(b))) {
            out.fail(cert("density"));
        }
        match completion_is_idempotent(&ba) {
            Ok(true) => out.bump("idempotent"),
            Ok(false) => out.fail(cert("idempotence")),
            Err(e) => out.fail(json!({"claim": "idempotence", "error": e.to_string()})),
        }
        out.bump("atoms.total");
        out.stats.last_mut().expect("just pushed").1 = ba.atom_count() as u64;
        out
    }))
}

/// `BA(conditions of A) ≅ A` via `{a} ↦` the atom below it, with every
/// condition's value matching the image of its atoms.
pub fn completion_is_idempotent(a: &CompleteAlgebra) -> Result<bool, Error> {
    let cp = a.condition_poset()?;
    let ba = regular_open_completion(&cp)?;
    if ba.atom_count() != a.atom_count() {
        return Ok(false);
    }
    let image: Vec<AtomSet> = (0..a.atom_count())
        .map(|i| ba.value(CompleteAlgebra::condition_index(AtomSet::singleton(i))))
        .collect();
    if image.iter().any(|b| b.count() != 1) || image.iter().fold(AtomSet::EMPTY, |acc, &b| acc | b) != ba.full() {
        return Ok(false);
    }
    Ok(a.nonzero_elements().all(|b| {
        let mapped = b.iter().fold(AtomSet::EMPTY, |acc, i| acc | image[i]);
        ba.value(CompleteAlgebra::condition_index(b)) == mapped
    }))
}

/// Every sweetness model declared in the shipped corpus, with a label.
pub fn corpus_models() -> Result<Vec<(String, SweetModel)>, Error> {
    let mut out = Vec::new();
    for (file, text) in CORPUS {
        let doc = crate::dsl::parse(text)?;
        for d in doc.decls() {
            if let Decl::Sweet(s) = d {
                out.push((format!("{file}:{}", s.name), doc.sweet(&s.name)?));
            }
        }
    }
    Ok(out)
}

/// A model and its poset as DSL, named `name` and `{name}_poset`.
pub fn model_dsl(name: &str, m: &SweetModel) -> String {
    let pname = format!("{name}_poset");
    let mut s = poset_dsl(&PosetDecl::from_poset(pname.clone(), m.poset()));
    s.push_str(&sweet_dsl(&SweetDecl::from_model(name.into(), pname, m)));
    s
}

/// Random naturally labeled poset with `n` elements.
pub fn random_poset(rng: &mut ChaCha8Rng, n: usize) -> Poset {
    let mut rel = vec![vec![false; n]; n];
    for (j, row) in rel.iter_mut().enumerate() {
        row[j] = true;
    }
    for j in 1..n {
        rel[0][j] = true;
        for i in 1..j {
            if rng.gen_bool(0.4) {
                rel[i][j] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if rel[i][k] {
                for j in 0..n {
                    if rel[k][j] {
                        rel[i][j] = true;
                    }
                }
            }
        }
    }
    Poset::from_le((0..n).map(|i| format!("p{i}")).collect(), 0, |a, b| rel[a][b]).expect("closure of a DAG")
}

/// Random refining model on `p` (not necessarily sweet).
pub fn random_model(rng: &mut ChaCha8Rng, p: &Poset, levels: usize) -> SweetModel {
    let mut dense: Vec<usize> = (0..p.len())
        .filter(|&x| p.is_maximal(x) || (x != p.bottom() && rng.gen_bool(0.5)) || rng.gen_bool(0.15))
        .collect();
    dense.sort_unstable();
    dense.dedup();
    let mut classes: Vec<Vec<Vec<usize>>> = Vec::with_capacity(levels);
    let mut current: Vec<Vec<usize>> = Vec::new();
    for &x in &dense {
        if !current.is_empty() && rng.gen_bool(0.5) {
            let i = rng.gen_range(0..current.len());
            current[i].push(x);
        } else {
            current.push(vec![x]);
        }
    }
    classes.push(current.clone());
    for _ in 1..levels {
        let mut next = Vec::new();
        for c in &current {
            let mut a = Vec::new();
            let mut b = Vec::new();
            for &x in c {
                if rng.gen_bool(0.3) {
                    b.push(x)
                } else {
                    a.push(x)
                }
            }
            next.extend([a, b].into_iter().filter(|v| !v.is_empty()));
        }
        classes.push(next.clone());
        current = next;
    }
    SweetModel::new(p.clone(), dense, classes).expect("partitions of the dense set")
}

/// A random model that passes `validate_sweet`, if one turns up quickly.
pub fn random_sweet(rng: &mut ChaCha8Rng, p: &Poset, levels: usize) -> Option<SweetModel> {
    (0..64).map(|_| random_model(rng, p, levels)).find(|m| validate_sweet(m).holds())
}

struct Triple {
    models: [SweetModel; 3],
    maps: [Vec<usize>; 2],
}

/// `m1 < m2 < m3` built top-down: a random sweet model on a random poset,
/// then complete sub-posets carrying either the restriction or a fresh
/// random model.
fn random_triple(rng: &mut ChaCha8Rng) -> Option<Triple> {
    let n = rng.gen_range(3..=6);
    let levels = rng.gen_range(1..=2);
    let p3 = random_poset(rng, n);
    let m3 = random_sweet(rng, &p3, levels)?;
    let (m2, map23) = sub_model(rng, &m3, levels)?;
    let (m1, map12) = sub_model(rng, &m2, levels)?;
    Some(Triple {
        models: [m1, m2, m3],
        maps: [map12, map23],
    })
}

fn sub_model(rng: &mut ChaCha8Rng, m: &SweetModel, levels: usize) -> Option<(SweetModel, Vec<usize>)> {
    let p = m.poset();
    let mut members: Vec<usize> = (0..p.len()).filter(|&x| x == p.bottom() || rng.gen_bool(0.7)).collect();
    members.sort_unstable();
    let inc = PosetInclusion::new(p.subposet(&members).ok()?, p.clone(), members.clone()).ok()?;
    if !check_complete_suborder(&inc) {
        return None;
    }
    let (sub, map) = if rng.gen_bool(0.5) {
        m.restrict(&members).ok()?
    } else {
        (random_sweet(rng, inc.small(), levels)?, members)
    };
    // only premises that hold make a useful triple
    let extends = validate_extends_along(&sub, m, &map).map(|r| r.holds()).unwrap_or(false);
    (validate_sweet(&sub).holds() && extends).then_some((sub, map))
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().map(|&x| b[x]).collect()
}

/// Largest product `|P1|·|P2|` of corpus models amalgamated in the
/// sweetness-law run.
pub const AMALGAM_CORPUS_CAP: usize = 200;

enum SweetCase {
    /// Three models and the maps between consecutive ones.
    Triple { label: String, triple: Triple },
    Amalgam { label: String, m1: SweetModel, m2: SweetModel, base: usize, f1: Vec<AtomSet>, f2: Vec<AtomSet> },
    Hechler { label: String, m: SweetModel, params: HechlerParams },
}

/// Counters from building the sweetness-law instances.
#[derive(Default)]
struct GenStats {
    corpus_cases: usize,
    large_pairs: u64,
    triples: usize,
    amalgams: usize,
    obstructed_draws: u64,
    hechlers: usize,
}

/// The corpus cases followed by the seeded random ones, in a fixed order.
fn sweet_cases(triples: usize, amalgams: usize, hechlers: usize, seed: u64) -> Result<(Vec<SweetCase>, GenStats), Error> {
    let corpus = corpus_models()?;
    let mut st = GenStats::default();
    let mut cases = Vec::new();
    // corpus: all chains of length three under label identification
    for (la, a) in &corpus {
        for (lb, b) in &corpus {
            for (lc, c) in &corpus {
                if a.levels() != b.levels() || b.levels() != c.levels() {
                    continue;
                }
                let (Some(ab), Some(bc)) = (label_map(a.poset(), b.poset()), label_map(b.poset(), c.poset())) else {
                    continue;
                };
                let premise = |x: &SweetModel, y: &SweetModel, m: &[usize]| {
                    validate_sweet(x).holds() && validate_extends_along(x, y, m).map(|r| r.holds()).unwrap_or(false)
                };
                if premise(a, b, &ab) && premise(b, c, &bc) && validate_sweet(c).holds() {
                    cases.push(SweetCase::Triple {
                        label: format!("corpus {la} < {lb} < {lc}"),
                        triple: Triple {
                            models: [a.clone(), b.clone(), c.clone()],
                            maps: [ab, bc],
                        },
                    });
                }
            }
        }
    }
    for (la, a) in &corpus {
        for (lb, b) in &corpus {
            if a.levels() != b.levels() {
                continue;
            }
            if a.poset().len() * b.poset().len() > AMALGAM_CORPUS_CAP {
                st.large_pairs += 1;
                continue;
            }
            for (k, f1, f2) in corpus_bases(a, b)? {
                cases.push(SweetCase::Amalgam {
                    label: format!("corpus {la} x {lb}"),
                    m1: a.clone(),
                    m2: b.clone(),
                    base: k,
                    f1,
                    f2,
                });
            }
        }
        cases.push(SweetCase::Hechler {
            label: format!("corpus {la}"),
            m: a.clone(),
            params: HechlerParams::new(1, 1)?,
        });
    }
    st.corpus_cases = cases.len();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = 0;
    while st.triples < triples && attempts < triples * 200 {
        attempts += 1;
        if let Some(t) = random_triple(&mut rng) {
            st.triples += 1;
            cases.push(SweetCase::Triple {
                label: format!("random #{}", st.triples),
                triple: t,
            });
        }
    }
    attempts = 0;
    while st.amalgams < amalgams && attempts < amalgams * 200 {
        attempts += 1;
        let levels = rng.gen_range(1..=2);
        let (n1, n2) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let (p1, p2) = (random_poset(&mut rng, n1), random_poset(&mut rng, n2));
        let (Some(m1), Some(m2)) = (random_sweet(&mut rng, &p1, levels), random_sweet(&mut rng, &p2, levels)) else {
            continue;
        };
        if amalgam_obstruction(&m1, &m2).is_some() {
            st.obstructed_draws += 1;
            continue;
        }
        let (a1, a2) = (regular_open_completion(&p1)?.atom_count(), regular_open_completion(&p2)?.atom_count());
        let k = rng.gen_range(1..=a1.min(a2).min(2));
        let s1 = surjections(a1, k);
        let s2 = surjections(a2, k);
        let f1 = surjection_images(s1.choose(&mut rng).expect("k <= atoms"), k);
        let f2 = surjection_images(s2.choose(&mut rng).expect("k <= atoms"), k);
        st.amalgams += 1;
        cases.push(SweetCase::Amalgam {
            label: format!("random amalgam #{}", st.amalgams),
            m1,
            m2,
            base: k,
            f1,
            f2,
        });
    }
    attempts = 0;
    while st.hechlers < hechlers && attempts < hechlers * 200 {
        attempts += 1;
        let n = rng.gen_range(1..=5);
        let p = random_poset(&mut rng, n);
        let levels = rng.gen_range(1..=2);
        let Some(m) = random_sweet(&mut rng, &p, levels) else {
            continue;
        };
        st.hechlers += 1;
        cases.push(SweetCase::Hechler {
            label: format!("random hechler #{}", st.hechlers),
            m,
            params: HechlerParams::new(1, 1)?,
        });
    }
    Ok((cases, st))
}

/// Sweetness laws over the shipped corpus and `triples` seeded random
/// triples (`amalgams` and `hechlers` further random instances): extension
/// is transitive, chain limits validate and extend their inputs, and the
/// amalgam and Hechler constructions preserve sweetness. Amalgam instances
/// with the bottom obstruction are counted, not checked.
pub fn verify_sweet_laws(triples: usize, amalgams: usize, hechlers: usize, cfg: &LabConfig) -> Result<VerificationReport, Error> {
    let (cases, st) = sweet_cases(triples, amalgams, hechlers, cfg.seed)?;
    let caps = [
        ("triples", triples as u64),
        ("amalgams", amalgams as u64),
        ("hechlers", hechlers as u64),
    ];
    let mut report = run("sweet", &caps, cfg, &cases, check_sweet_case);
    report.bump("corpus.cases", st.corpus_cases as u64);
    report.bump("corpus.amalgam_pairs_above_cap", st.large_pairs);
    report.bump("random.triples", st.triples as u64);
    report.bump("random.amalgams", st.amalgams as u64);
    report.bump("random.amalgams_obstructed_draws", st.obstructed_draws);
    report.bump("random.hechlers", st.hechlers as u64);
    if st.triples < triples || st.amalgams < amalgams || st.hechlers < hechlers {
        // the generator fell short: the run cannot claim its caps
        report.exhaustive = false;
    }
    report.finish();
    Ok(report)
}

/// Certificates (law `sample`) for the random cases of a seeded run, for
/// exercising the certificate format.
pub fn sample_sweet_certificates(triples: usize, amalgams: usize, hechlers: usize, seed: u64) -> Result<Vec<Value>, Error> {
    let (cases, st) = sweet_cases(triples, amalgams, hechlers, seed)?;
    Ok(cases[st.corpus_cases..].iter().map(|c| case_certificate(c, "sample", String::new())).collect())
}

/// A sweetness-law instance with every reference spelled by label, so it
/// survives the canonical reordering of the DSL.
fn case_certificate(c: &SweetCase, law: &str, detail: String) -> Value {
    let label_pairs = |a: &SweetModel, b: &SweetModel, f: &[usize]| -> Vec<(String, String)> {
        f.iter().enumerate().map(|(x, &y)| (a.poset().label(x).to_string(), b.poset().label(y).to_string())).collect()
    };
    match c {
        SweetCase::Triple { label, triple } => {
            let [m1, m2, m3] = &triple.models;
            let [f, g] = &triple.maps;
            json!({
                "law": law,
                "kind": "triple",
                "case": label,
                "models": [model_dsl("m1", m1), model_dsl("m2", m2), model_dsl("m3", m3)],
                "maps": [label_pairs(m1, m2, f), label_pairs(m2, m3, g)],
                "detail": detail,
            })
        }
        SweetCase::Amalgam { label, m1, m2, base, f1, f2 } => json!({
            "law": law,
            "kind": "amalgam",
            "case": label,
            "models": [model_dsl("m1", m1), model_dsl("m2", m2)],
            "base_atoms": base,
            "f1": atom_labels(m1.poset(), f1),
            "f2": atom_labels(m2.poset(), f2),
            "detail": detail,
        }),
        SweetCase::Hechler { label, m, params } => json!({
            "law": law,
            "kind": "hechler",
            "case": label,
            "models": [model_dsl("m", m)],
            "m": params.m(),
            "h": params.h(),
            "detail": detail,
        }),
    }
}

/// Each base atom's image as the labels of the atom generators it covers.
fn atom_labels(p: &Poset, images: &[AtomSet]) -> Vec<Vec<String>> {
    let gens = regular_open_completion(p).expect("validated model").atom_generators();
    images.iter().map(|b| b.iter().map(|a| p.label(gens[a]).to_string()).collect()).collect()
}

fn atoms_from_labels(p: &Poset, images: &[Vec<String>]) -> Result<Vec<AtomSet>, Error> {
    let ba = regular_open_completion(p)?;
    let bad = |l: &str| Error::Usage(format!("`{l}` does not generate an atom"));
    images
        .iter()
        .map(|ls| {
            ls.iter().try_fold(AtomSet::EMPTY, |acc, l| {
                let v = ba.value(p.index_of(l).ok_or_else(|| bad(l))?);
                if v.count() != 1 {
                    return Err(bad(l));
                }
                Ok(acc | v)
            })
        })
        .collect()
}

fn case_from_certificate(cert: &Value) -> Result<SweetCase, Error> {
    let bad = |what: &str| Error::Usage(format!("malformed sweetness certificate: {what}"));
    let doc = certificate_document(cert)?;
    let label = cert["case"].as_str().unwrap_or("").to_string();
    let field = |k: &str| -> Result<Value, Error> { cert.get(k).cloned().ok_or_else(|| bad(k)) };
    match cert["kind"].as_str() {
        Some("triple") => {
            let ms = [doc.sweet("m1")?, doc.sweet("m2")?, doc.sweet("m3")?];
            let maps: [Vec<(String, String)>; 2] = serde_json::from_value(field("maps")?).map_err(|_| bad("maps"))?;
            let by_label = |a: &SweetModel, b: &SweetModel, pairs: &[(String, String)]| -> Result<Vec<usize>, Error> {
                let mut f = vec![usize::MAX; a.poset().len()];
                for (x, y) in pairs {
                    let (Some(i), Some(j)) = (a.poset().index_of(x), b.poset().index_of(y)) else {
                        return Err(bad("map label"));
                    };
                    f[i] = j;
                }
                if f.contains(&usize::MAX) {
                    return Err(bad("partial map"));
                }
                Ok(f)
            };
            let f = by_label(&ms[0], &ms[1], &maps[0])?;
            let g = by_label(&ms[1], &ms[2], &maps[1])?;
            Ok(SweetCase::Triple {
                label,
                triple: Triple { models: ms, maps: [f, g] },
            })
        }
        Some("amalgam") => {
            let (m1, m2) = (doc.sweet("m1")?, doc.sweet("m2")?);
            let base = field("base_atoms")?.as_u64().ok_or_else(|| bad("base_atoms"))? as usize;
            let f1: Vec<Vec<String>> = serde_json::from_value(field("f1")?).map_err(|_| bad("f1"))?;
            let f2: Vec<Vec<String>> = serde_json::from_value(field("f2")?).map_err(|_| bad("f2"))?;
            let (f1, f2) = (atoms_from_labels(m1.poset(), &f1)?, atoms_from_labels(m2.poset(), &f2)?);
            Ok(SweetCase::Amalgam { label, m1, m2, base, f1, f2 })
        }
        Some("hechler") => {
            let num = |k: &str| -> Result<usize, Error> { Ok(field(k)?.as_u64().ok_or_else(|| bad(k))? as usize) };
            Ok(SweetCase::Hechler {
                label,
                m: doc.sweet("m")?,
                params: HechlerParams::new(num("m")?, num("h")?)?,
            })
        }
        _ => Err(bad("kind")),
    }
}

/// Re-runs a sweetness certificate in isolation and returns the
/// certificates of whatever fails now.
pub fn recheck_sweet(cert: &Value) -> Result<Vec<Value>, Error> {
    Ok(check_sweet_case(&case_from_certificate(cert)?).counterexamples)
}

/// Decodes and re-encodes a sweetness certificate.
pub fn reencode_sweet(cert: &Value) -> Result<Value, Error> {
    let c = case_from_certificate(cert)?;
    Ok(case_certificate(&c, cert["law"].as_str().unwrap_or(""), cert["detail"].as_str().unwrap_or("").to_string()))
}

/// Trivial base, plus every two-atom base when both sides have at least two
/// atoms (capped at 16 per pair).
type BaseImages = (usize, Vec<AtomSet>, Vec<AtomSet>);

fn corpus_bases(a: &SweetModel, b: &SweetModel) -> Result<Vec<BaseImages>, Error> {
    let (a1, a2) = (regular_open_completion(a.poset())?.atom_count(), regular_open_completion(b.poset())?.atom_count());
    let mut out = vec![(1, vec![AtomSet::full(a1)], vec![AtomSet::full(a2)])];
    if a1 >= 2 && a2 >= 2 {
        for s1 in surjections(a1, 2).into_iter().take(4) {
            for s2 in surjections(a2, 2).into_iter().take(4) {
                out.push((2, surjection_images(&s1, 2), surjection_images(&s2, 2)));
            }
        }
    }
    Ok(out)
}

fn check_sweet_case(c: &SweetCase) -> Outcome {
    let mut out = Outcome::default();
    match c {
        SweetCase::Triple { triple, .. } => {
            let [m1, m2, m3] = &triple.models;
            let [f, g] = &triple.maps;
            let cert = |law: &str, detail: String| case_certificate(c, law, detail);
            let ok = |r: forcelab_core::Result<forcelab_core::SweetReport>| r.map(|r| r.holds()).unwrap_or(false);
            let premises = validate_sweet(m1).holds()
                && validate_sweet(m2).holds()
                && validate_sweet(m3).holds()
                && ok(validate_extends_along(m1, m2, f))
                && ok(validate_extends_along(m2, m3, g));
            if !premises {
                out.bump("triples.premise_failed");
                return out;
            }
            out.bump("triples.checked");
            if f.len() < m2.poset().len() || g.len() < m3.poset().len() {
                out.bump("triples.proper");
            }
            let fg = compose(f, g);
            match validate_extends_along(m1, m3, &fg) {
                Ok(r) if r.holds() => {}
                Ok(r) => out.fail(cert("transitivity", r.failures[0].to_string())),
                Err(e) => out.fail(cert("transitivity", e.to_string())),
            }
            let models = [m1.clone(), m2.clone(), m3.clone()];
            match chain_limit_along(&models, &triple.maps) {
                Ok(lim) => {
                    out.bump("limits.checked");
                    let sweet = validate_sweet(&lim);
                    if !sweet.holds() {
                        out.fail(cert("limit_sweet", sweet.failures[0].to_string()));
                    }
                    let into = [compose(&fg, &id_map(m3)), compose(g, &id_map(m3)), id_map(m3)];
                    for (m, map) in models.iter().zip(&into) {
                        if !ok(validate_extends_along(m, &lim, map)) {
                            out.fail(cert("limit_extends", String::new()));
                        }
                    }
                }
                Err(e) => out.fail(cert("limit", e.to_string())),
            }
        }
        SweetCase::Amalgam { m1, m2, base, f1, f2, .. } => {
            let cert = |law: &str, detail: String| case_certificate(c, law, detail);
            if !validate_sweet(m1).holds() || !validate_sweet(m2).holds() {
                out.bump("amalgam.invalid_input");
                return out;
            }
            if amalgam_obstruction(m1, m2).is_some() {
                out.bump("amalgam.obstructed");
                return out;
            }
            let b = CompleteAlgebra::with_atoms(*base).expect("small base");
            let res = amalgamate_posets(&b, m1.poset(), m2.poset(), f1, f2).and_then(|inst| amalgam_sweet(m1, m2, &inst));
            match res {
                Ok(p) if p.holds() => out.bump("amalgam.preserved"),
                Err(forcelab_core::Error::TooLarge { .. }) => out.bump("amalgam.skipped_too_large"),
                Ok(p) => {
                    let f = p.sweet.failures.iter().chain(p.extends.iter().flat_map(|r| r.failures.iter())).next();
                    out.fail(cert("amalgam_sweet", f.map(|f| f.to_string()).unwrap_or_default()));
                }
                Err(e) => out.fail(cert("amalgam_sweet", e.to_string())),
            }
        }
        SweetCase::Hechler { m, params, .. } => {
            let cert = |law: &str, detail: String| case_certificate(c, law, detail);
            if !validate_sweet(m).holds() {
                out.bump("hechler.invalid_input");
                return out;
            }
            let res = compose_hechler(m.poset(), *params).and_then(|it| hechler_sweet(m, &it));
            match res {
                Ok(p) if p.holds() => out.bump("hechler.preserved"),
                Ok(p) => {
                    let f = p.sweet.failures.iter().chain(p.extends.iter().flat_map(|r| r.failures.iter())).next();
                    out.fail(cert("hechler_sweet", f.map(|f| f.to_string()).unwrap_or_default()));
                }
                Err(forcelab_core::Error::TooLarge { .. }) => out.bump("hechler.skipped_too_large"),
                Err(e) => out.fail(cert("hechler_sweet", e.to_string())),
            }
        }
    }
    out
}

fn id_map(m: &SweetModel) -> Vec<usize> {
    (0..m.poset().len()).collect()
}

/// Every tower declared in the shipped corpus, with a label.
pub fn corpus_towers() -> Result<Vec<(String, Tower)>, Error> {
    let mut out = Vec::new();
    for (file, text) in CORPUS {
        let doc = crate::dsl::parse(text)?;
        for d in doc.decls() {
            if let Decl::Tower(t) = d {
                out.push((format!("{file}:{}", t.name), doc.tower(&t.name)?));
            }
        }
    }
    Ok(out)
}

/// Constant tower on `{⊥,a,b}` with singleton classes, shaped like `t`;
/// `⊥` is dense exactly when it is dense at the top of `t`.
pub fn vee_factor(t: &Tower) -> Result<Tower, Error> {
    let v = Poset::from_covers(["0", "a", "b"].map(String::from).to_vec(), 0, &[(0, 1), (0, 2)])?;
    let top = t.top();
    let dense = if top.dense().contains(top.poset().bottom()) { vec![0, 1, 2] } else { vec![1, 2] };
    let m = SweetModel::discrete(v, dense, top.levels())?;
    Ok(Tower::constant(m, t.len())?)
}

/// `t ≤ t×V ≤ t×V×V`: each step amalgamates with [`vee_factor`] over the
/// trivial base from index 0. `None` when some level meets the bottom
/// obstruction against the factor.
pub fn product_growth(t: &Tower, steps: usize) -> Result<Option<Vec<DerivedTower>>, Error> {
    let mut out: Vec<DerivedTower> = Vec::with_capacity(steps);
    for _ in 0..steps {
        let cur = out.last().map_or(t, |d| &d.tower);
        let v = vee_factor(cur)?;
        if cur.levels().iter().any(|m| amalgam_obstruction(m, v.top()).is_some()) {
            return Ok(None);
        }
        let (d, _) = tower_amalgamate(cur, &v, &AmalgamData::trivial(cur, &v)?, 0)?;
        out.push(d);
    }
    Ok(Some(out))
}

fn first_failure(r: &SweetReport) -> String {
    r.failures.first().map(ToString::to_string).unwrap_or_default()
}

fn derived_failure(d: &DerivedTower) -> String {
    let leq = d.leq.iter().find(|r| !r.holds()).map(first_failure);
    leq.unwrap_or_else(|| first_failure(&d.invariants))
}

/// Largest top poset the tower constructions (growth, Hechler, amalgam
/// with itself) are applied to; above it only the invariants and
/// reflexivity are checked.
pub const TOWER_CONSTRUCTION_CAP: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TowerLaw {
    Reflexive,
    Growth,
    Hechler,
    Amalgam,
    ShippedChain,
}

/// Tower laws on every corpus tower: invariants and reflexivity; for tops
/// within [`TOWER_CONSTRUCTION_CAP`] also a merged product-growth chain
/// dominating its members and the Hechler and amalgam towers satisfying the
/// invariants and their `≤` claims. The shipped chain
/// `base ≤ grown1 ≤ grown2` is merged as well.
pub fn verify_tower_laws(cfg: &LabConfig) -> Result<VerificationReport, Error> {
    let towers = corpus_towers()?;
    let mut items: Vec<(String, Vec<Tower>, TowerLaw)> = Vec::new();
    let mut skipped = 0;
    for (label, t) in &towers {
        items.push((label.clone(), vec![t.clone()], TowerLaw::Reflexive));
        if t.top().poset().len() <= TOWER_CONSTRUCTION_CAP {
            for law in [TowerLaw::Growth, TowerLaw::Hechler, TowerLaw::Amalgam] {
                items.push((label.clone(), vec![t.clone()], law));
            }
        } else {
            skipped += 1;
        }
    }
    let shipped: Vec<Tower> = towers
        .iter()
        .filter(|(l, _)| ["towers.fl:base", "towers.fl:grown1", "towers.fl:grown2"].contains(&l.as_str()))
        .map(|(_, t)| t.clone())
        .collect();
    if shipped.len() == 3 {
        items.push(("towers.fl:base<=grown1<=grown2".into(), shipped, TowerLaw::ShippedChain));
    }
    let mut r = run("tower", &[("construction_cap", TOWER_CONSTRUCTION_CAP as u64)], cfg, &items, |(label, ts, law)| {
        let mut out = Outcome::default();
        let cert = |law: &str, detail: String| json!({"law": law, "tower": label, "detail": detail});
        let t = &ts[0];
        match law {
            TowerLaw::Reflexive => {
                let inv = t.validate();
                if !inv.holds() {
                    out.fail(cert("invariants", first_failure(&inv)));
                }
                match tower_leq_by_labels(t, t, &TowerLeqWitness::all(t.len())) {
                    Ok(r) if r.holds() => out.bump("reflexive"),
                    Ok(r) => out.fail(cert("reflexive", first_failure(&r))),
                    Err(e) => out.fail(cert("reflexive", e.to_string())),
                }
            }
            TowerLaw::Growth => match product_growth(t, 2) {
                Ok(None) => out.bump("product_growth.obstructed"),
                Ok(Some(chain)) => {
                    for d in chain.iter().filter(|d| !d.holds()) {
                        out.fail(cert("product_growth", derived_failure(d)));
                    }
                    let mut members = vec![t.clone()];
                    members.extend(chain.iter().map(|d| d.tower.clone()));
                    let maps: Vec<Vec<usize>> = chain.iter().map(|d| d.top_maps[0].clone()).collect();
                    let wits: Vec<TowerLeqWitness> = chain.iter().map(|d| d.witness.clone()).collect();
                    merge_into(&mut out, &cert, &members, &maps, &wits);
                }
                Err(e) => out.fail(cert("product_growth", e.to_string())),
            },
            TowerLaw::Hechler => match HechlerParams::new(1, 1).map_err(Error::from).and_then(|h| Ok(tower_hechler(t, h)?)) {
                Ok((d, pres)) if d.holds() && pres.iter().all(|p| p.holds()) => out.bump("hechler"),
                Ok((d, _)) => out.fail(cert("tower_hechler", derived_failure(&d))),
                Err(Error::Core(forcelab_core::Error::TooLarge { .. })) => out.bump("hechler.skipped_too_large"),
                Err(e) => out.fail(cert("tower_hechler", e.to_string())),
            },
            TowerLaw::Amalgam => {
                for (kind, data) in amalgam_data(t) {
                    match tower_amalgamate(t, t, &data, 0) {
                        Ok((d, pres)) if d.holds() && pres.iter().all(|p| p.holds()) => out.bump(kind),
                        Ok((d, _)) => out.fail(cert(kind, derived_failure(&d))),
                        Err(e) => out.fail(cert(kind, e.to_string())),
                    }
                }
            }
            TowerLaw::ShippedChain => {
                let maps: Option<Vec<Vec<usize>>> = ts.windows(2).map(|w| left_pair_map(w[0].top().poset(), w[1].top().poset())).collect();
                match maps {
                    Some(maps) => {
                        let all = TowerLeqWitness::all(t.len());
                        merge_into(&mut out, &cert, ts, &maps, &vec![all; ts.len() - 1]);
                    }
                    None => out.fail(cert("chain_merge", "labels are not left pairs".into())),
                }
            }
        }
        out
    });
    r.bump("construction_skipped_large", skipped);
    r.finish();
    Ok(r)
}

fn merge_into(out: &mut Outcome, cert: &dyn Fn(&str, String) -> Value, members: &[Tower], maps: &[Vec<usize>], wits: &[TowerLeqWitness]) {
    match tower_chain_merge(members, maps, wits) {
        Ok(m) if m.holds() && m.leq.len() == members.len() => out.bump("chain_merge"),
        Ok(m) => out.fail(cert("chain_merge", derived_failure(&m))),
        Err(e) => out.fail(cert("chain_merge", e.to_string())),
    }
}

/// `x ↦ (x,⊥)` by labels, the left injection into an amalgam over the
/// trivial base.
pub fn left_pair_map(small: &Poset, large: &Poset) -> Option<Vec<usize>> {
    let bottom = large.label(large.bottom());
    let inner = bottom.strip_prefix('(')?.strip_suffix(')')?;
    let right_bottom = &inner[inner.rfind(',')? + 1..];
    (0..small.len())
        .map(|x| large.index_of(&format!("({},{right_bottom})", small.label(x))))
        .collect()
}

/// Trivial, identity and (when the top has at least two atoms) a
/// block-swapping base for amalgamating `t` with itself.
fn amalgam_data(t: &Tower) -> Vec<(&'static str, AmalgamData)> {
    let mut out = Vec::new();
    if let Ok(d) = AmalgamData::trivial(t, t) {
        out.push(("amalgam.trivial", d));
    }
    let atoms = match regular_open_completion(t.top().poset()) {
        Ok(a) => a.atom_count(),
        Err(_) => return out,
    };
    let whole = Subalgebra::whole(atoms);
    out.push((
        "amalgam.identity",
        AmalgamData {
            q0: whole.clone(),
            q2: whole,
            perm: (0..atoms).collect(),
        },
    ));
    // the coarsest two-block subalgebra that every level also carries
    for i in 0..t.len() {
        let level = match regular_open_completion(t.level(i).poset()) {
            Ok(a) => a,
            Err(_) => return out,
        };
        if level.atom_count() >= 2 {
            let proj = t.to_top(i);
            let top = regular_open_completion(t.top().poset()).expect("computed above");
            let first = top.value(proj[level.atom_generators()[0]]);
            if let Ok(q) = Subalgebra::from_blocks(atoms, [first, first.complement(atoms)]) {
                out.push(("amalgam.swap", AmalgamData { q0: q.clone(), q2: q, perm: vec![1, 0] }));
            }
            break;
        }
    }
    out
}

/// The DSL text of every model in a sweetness certificate, as one document.
pub fn certificate_document(cert: &Value) -> Result<Document, Error> {
    let text: String = cert["models"]
        .as_array()
        .map(|ms| ms.iter().filter_map(|m| m.as_str()).collect::<Vec<_>>().join("\n"))
        .unwrap_or_default();
    Ok(crate::dsl::parse(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> LabConfig {
        LabConfig::default()
    }

    #[test]
    fn bcd_small() {
        let r = verify_bcd(3, &cfg()).unwrap();
        assert!(r.passed(), "{}", r.to_json());
        assert_eq!(r.checked, 1 + 6 + 60);
        assert_eq!(r.stat("hypothesis2.literal"), r.stat("d_subset_c0"));
        assert!(verify_bcd(1, &cfg()).is_err());
    }

    #[test]
    fn bcd_certificates_recheck() {
        let cert = json!({"reading": "quotient", "atoms": 4, "b": [[0, 1], [2, 3]], "d": [[0, 1], [2], [3]], "c0": [[0, 2], [1, 3]]});
        assert!(recheck_bcd(&cert).unwrap());
        let cert = json!({"reading": "literal", "atoms": 4, "b": [[0, 1], [2, 3]], "d": [[0, 1], [2], [3]], "c0": [[0, 2], [1, 3]]});
        assert!(!recheck_bcd(&cert).unwrap());
    }

    #[test]
    fn embedding_small() {
        let r = verify_embedding_criteria(4, &cfg()).unwrap();
        assert!(r.passed(), "{}", r.to_json());
        let k = known_false_inclusion();
        assert!(!is_complete_suborder(&k).unwrap());
        assert!(!is_complete_suborder_via_reductions(&k));
    }

    #[test]
    fn completion_small() {
        let r = verify_completion(4, &cfg()).unwrap();
        assert!(r.passed(), "{}", r.to_json());
        assert_eq!(r.stat("idempotent"), r.checked);
    }

    #[test]
    fn amalgam_small() {
        let r = verify_amalgam_claims(1, 2, 3, &cfg()).unwrap();
        assert!(r.passed(), "{}", r.to_json());
        assert!(r.stat("identity") > 0 && r.stat("trivial_base") > 0);
    }

    #[test]
    fn sweet_small_is_deterministic() {
        let c = LabConfig { seed: 7, ..cfg() };
        let a = verify_sweet_laws(30, 10, 5, &c).unwrap();
        assert!(a.passed(), "{}", a.to_json());
        let b = verify_sweet_laws(30, 10, 5, &LabConfig { jobs: Some(2), ..c }).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn zero_budget_is_incomplete() {
        let c = LabConfig {
            budget: Duration::ZERO,
            ..cfg()
        };
        let r = verify_bcd(3, &c).unwrap();
        assert!(!r.exhaustive);
        assert!(!r.passed());
    }

    #[test]
    fn corpus_loads() {
        let ms = corpus_models().unwrap();
        assert!(ms.len() >= 8);
    }
}
