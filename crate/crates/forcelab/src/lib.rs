//! Text formats, lemma verification runs and the command line for
//! `forcelab-core`.
//!
//! * [`dsl`] parses the declaration language into a [`doc::Document`];
//! * [`emit`] writes documents back as canonical DSL, JSON or DOT;
//! * [`lab`] runs the exhaustive and seeded lemma checks and produces
//!   [`report::VerificationReport`]s;
//! * [`cli`] is the `forcelab` binary.

pub mod cli;
pub mod doc;
pub mod dsl;
pub mod emit;
pub mod lab;
pub mod report;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Parse(#[from] dsl::Diagnostic),
    #[error("invalid JSON document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema `{0}`, expected `{expected}`", expected = emit::SCHEMA)]
    Schema(String),
    #[error(transparent)]
    Resolve(#[from] doc::ResolveError),
    #[error(transparent)]
    Core(#[from] forcelab_core::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

/// Parses DSL text, or JSON when the text starts with `{`.
pub fn load_str(text: &str) -> Result<doc::Document, Error> {
    if text.trim_start().starts_with('{') {
        emit::from_json(text)
    } else {
        Ok(dsl::parse(text)?)
    }
}
