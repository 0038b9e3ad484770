//! The four-algebra quotient lemma as a decidable check on finite algebras.
//!
//! All four algebras `B ⊆ D ⊆ C` and `C0 ⊆ C` are subalgebras of one finite
//! algebra `C`, given as partitions of its atoms. A generic filter of a
//! subalgebra `A` is one of its blocks, so "`a ⊩_A x ∈ (C:A)`" reads: every
//! block of `A` below `a` meets `x`.

use alloc::vec::Vec;

use crate::bits::AtomSet;
use crate::completion::{intersect_subalgebras, Subalgebra};
use crate::{Error, Result};

/// `p ⊩_A x ∈ (C:A)` for `p ∈ A`, atom quantification.
pub fn forces_member(a: &Subalgebra, p: AtomSet, x: AtomSet) -> bool {
    a.blocks().iter().filter(|b| b.is_subset(p)).all(|&b| b.intersects(x))
}

/// How "`B ⊩ (D:B) ⊆ (C0:B)`" is read at a generic block `β` of `B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reading {
    /// As sets of conditions: every member of `D` meeting `β` is a member of
    /// `C0`. On finite algebras this forces `D ⊆ C0`.
    Literal,
    /// As quotient algebras: every `d ∈ D` agrees below `β` with some member
    /// of `C0`. Too weak for the conclusion from 4 atoms on.
    Quotient,
    /// As the argument uses it: every `d ∈ D` agrees below `β` with some
    /// member of `D0 = D ∩ C0`.
    Agreement,
}

impl Reading {
    pub const ALL: [Reading; 3] = [Reading::Literal, Reading::Quotient, Reading::Agreement];

    pub fn id(self) -> &'static str {
        match self {
            Reading::Literal => "literal",
            Reading::Quotient => "quotient",
            Reading::Agreement => "agreement",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BcdInstance {
    pub b: Subalgebra,
    pub d: Subalgebra,
    pub c0: Subalgebra,
}

/// A failure of the conclusion: `d0 ⊩_{D0} d ∈ (D:D0)` but not
/// `d0 ⊩_{C0} d ∈ (C:C0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BcdWitness {
    pub d: AtomSet,
    pub d0: AtomSet,
}

impl BcdInstance {
    /// Checks hypothesis (1): a common parent and `B ⊆ D`.
    pub fn new(b: Subalgebra, d: Subalgebra, c0: Subalgebra) -> Result<Self> {
        let n = b.parent_atoms();
        for s in [&d, &c0] {
            if s.parent_atoms() != n {
                return Err(Error::ParentMismatch {
                    left: n,
                    right: s.parent_atoms(),
                });
            }
        }
        if !b.is_subalgebra_of(&d) {
            return Err(Error::InvalidSubalgebra("B is not a subalgebra of D".into()));
        }
        Ok(BcdInstance { b, d, c0 })
    }

    pub fn atoms(&self) -> usize {
        self.b.parent_atoms()
    }

    pub fn b0(&self) -> Subalgebra {
        intersect_subalgebras(&self.b, &self.c0).expect("same parent")
    }

    pub fn d0(&self) -> Subalgebra {
        intersect_subalgebras(&self.d, &self.c0).expect("same parent")
    }

    pub fn hypothesis2(&self, reading: Reading) -> bool {
        let members = self.d.members();
        let d0 = self.d0();
        self.b.blocks().iter().all(|&beta| match reading {
            Reading::Literal => members
                .iter()
                .filter(|m| m.intersects(beta))
                .all(|&m| self.c0.contains(m)),
            Reading::Quotient => self.d.blocks().iter().all(|&delta| {
                self.c0
                    .blocks()
                    .iter()
                    .map(|&g| g & beta)
                    .all(|g| !g.intersects(delta) || g.is_subset(delta))
            }),
            Reading::Agreement => self
                .d
                .blocks()
                .iter()
                .all(|&delta| d0.blocks().iter().map(|&g| g & beta).all(|g| !g.intersects(delta) || g.is_subset(delta))),
        })
    }

    /// Hypothesis (3), or the first `(b, b0)` breaking it.
    pub fn hypothesis3(&self) -> core::result::Result<(), (AtomSet, AtomSet)> {
        transfer(&self.b, &self.b0(), &self.c0)
    }

    /// The conclusion (3*), or the first `(d, d0)` breaking it.
    pub fn conclusion(&self) -> core::result::Result<(), BcdWitness> {
        transfer(&self.d, &self.d0(), &self.c0).map_err(|(d, d0)| BcdWitness { d, d0 })
    }
}

/// For nonzero `x ∈ big` and `x0 ∈ small`: `x0 ⊩_small x ∈ (big:small)`
/// implies `x0 ⊩_c0 x ∈ (C:c0)`.
fn transfer(big: &Subalgebra, small: &Subalgebra, c0: &Subalgebra) -> core::result::Result<(), (AtomSet, AtomSet)> {
    let xs: Vec<AtomSet> = big.members().into_iter().filter(|m| !m.is_empty()).collect();
    for x0 in small.members().into_iter().filter(|m| !m.is_empty()) {
        for &x in &xs {
            if forces_member(small, x0, x) && !forces_member(c0, x0, x) {
                return Err((x, x0));
            }
        }
    }
    Ok(())
}

/// Every instance over an algebra with `atoms` atoms: pairs `B ⊆ D` times
/// all `C0`.
pub fn instances(atoms: usize) -> Vec<BcdInstance> {
    let subs = crate::enumerate::subalgebras(atoms);
    let mut out = Vec::new();
    for b in &subs {
        for d in subs.iter().filter(|d| b.is_subalgebra_of(d)) {
            for c0 in &subs {
                out.push(BcdInstance {
                    b: b.clone(),
                    d: d.clone(),
                    c0: c0.clone(),
                });
            }
        }
    }
    out
}

/// Evaluation of one instance under every reading.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BcdOutcome {
    pub hypothesis2: [bool; 3],
    pub hypothesis3: bool,
    /// `D ⊆ C0`.
    pub d_in_c0: bool,
    pub conclusion: core::result::Result<(), BcdWitness>,
}

impl BcdOutcome {
    pub fn hypotheses(&self, reading: Reading) -> bool {
        self.hypothesis2[reading as usize] && self.hypothesis3
    }

    /// A counterexample under `reading`.
    pub fn refutes(&self, reading: Reading) -> bool {
        self.hypotheses(reading) && self.conclusion.is_err()
    }
}

pub fn evaluate(inst: &BcdInstance) -> BcdOutcome {
    BcdOutcome {
        hypothesis2: Reading::ALL.map(|r| inst.hypothesis2(r)),
        hypothesis3: inst.hypothesis3().is_ok(),
        d_in_c0: inst.d.is_subalgebra_of(&inst.c0),
        conclusion: inst.conclusion(),
    }
}
