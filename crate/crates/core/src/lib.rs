//! Finite-scale forcing combinatorics.
//!
//! Everything here works on finite partial orders read with the forcing
//! convention: `p <= q` means `q` is the *stronger* condition, and every
//! poset carries an explicit least element (the trivial condition).
//!
//! The crate is `no_std` (it needs `alloc`). IO, file formats, the command
//! line and the lemma verification runner live in the `forcelab` crate.
//!
//! Module map:
//!
//! * [`poset`]: posets with bottom, compatibility, antichains, density.
//! * [`completion`]: regular-open completions as atom-set algebras,
//!   subalgebras as atom partitions.
//! * [`embed`]: complete suborders, reductions, quotient forcing `(Q:P)`.
//! * [`amalgam`]: amalgamation over a common complete subalgebra and the
//!   back-and-forth extension of partial isomorphisms.
//! * [`sweet`]: sweetness models, the extension relation, chain limits and
//!   the sweetness-preserving constructions.
//! * [`iterate`]: finite Hechler posets and two-step iterations.
//! * [`tower`]: finite towers of (poset, sweetness model) pairs and the
//!   `<=` relation between them.
//! * [`bcd`]: the four-algebra quotient lemma as a decidable check.
//! * [`enumerate`]: exhaustive generators used by the verification runs.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod amalgam;
pub mod bcd;
pub mod bits;
pub mod completion;
pub mod embed;
pub mod enumerate;
mod error;
pub mod iterate;
pub mod poset;
pub mod sweet;
pub mod tower;

pub use amalgam::{AmalgamInstance, PartialIso};
pub use bits::{AtomSet, BitSet};
pub use completion::{CompleteAlgebra, Subalgebra};
pub use embed::{CompleteEmbedding, PosetInclusion, QuotientName};
pub use error::{Error, Result};
pub use iterate::{HechlerCondition, HechlerParams, TwoStep};
pub use poset::{ConditionSet, Poset};
pub use sweet::{Clause, Failure, SweetModel, SweetReport};
pub use tower::{Tower, TowerLeqWitness};
