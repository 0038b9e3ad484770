use alloc::string::String;

/// Input errors raised by the constructions and checks in this crate.
///
/// A check that merely *fails* (an antichain that is not maximal, a
/// sweetness clause with a counterexample) is reported through its return
/// value; this type is reserved for violated preconditions so callers can
/// never mistake a malformed input for a negative answer.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("element index {index} out of range for a poset of {len} elements")]
    UnknownElement { index: usize, len: usize },
    #[error("atom {atom} out of range for an algebra of {atoms} atoms")]
    UnknownAtom { atom: usize, atoms: usize },
    #[error("not a partial order with bottom: {0}")]
    InvalidPoset(String),
    #[error("{what} has size {size}, above the configured cap of {cap}")]
    TooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("invalid inclusion: {0}")]
    InvalidInclusion(String),
    #[error("inclusion is not a complete suborder")]
    NotCompleteSuborder,
    #[error("invalid complete embedding: {0}")]
    InvalidEmbedding(String),
    #[error("not a subalgebra: {0}")]
    InvalidSubalgebra(String),
    #[error("subalgebras have different parent algebras ({left} vs {right} atoms)")]
    ParentMismatch { left: usize, right: usize },
    #[error("invalid partial isomorphism: {0}")]
    InvalidIso(String),
    #[error("malformed sweetness model: {0}")]
    InvalidModel(String),
    #[error("models use {left} and {right} equivalence relations")]
    RelationCountMismatch { left: usize, right: usize },
    #[error("models do not form an extension chain: {0}")]
    NotAChain(String),
    #[error("invalid two-step name: {0}")]
    InvalidName(String),
    #[error("invalid Hechler parameters: {0}")]
    InvalidParams(String),
    #[error("invalid tower: {0}")]
    InvalidTower(String),
    #[error("invalid tower witness: {0}")]
    InvalidWitness(String),
    #[error("amalgamation hypothesis fails at level {index}: {reason}")]
    HypothesisViolation { index: usize, reason: String },
    #[error("instance does not match its inputs: {0}")]
    Mismatch(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
