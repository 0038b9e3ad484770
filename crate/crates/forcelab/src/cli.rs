//! The `forcelab` command line.
//!
//! Standard output carries results and certificates; diagnostics go to
//! standard error. Exit status 0 means everything checked passed, 1 a
//! validation failure or counterexample, 2 a usage or parse error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use forcelab_core::amalgam::check_identification;
use forcelab_core::completion::{atom_set_label, regular_open_completion};
use forcelab_core::embed::{check_complete_suborder, PosetInclusion};
use forcelab_core::iterate::hechler_poset;
use forcelab_core::sweet::{validate_extends, validate_sweet, SweetReport};
use forcelab_core::tower::tower_leq_by_labels;
use forcelab_core::{Tower, TowerLeqWitness};

use crate::doc::{Decl, Document, PosetDecl, ResolveError};
use crate::emit::{emit, Format};
use crate::lab::{self, LabConfig};
use crate::report::VerificationReport;
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "forcelab", version, about = "Finite forcing posets, amalgams, sweetness models and lemma checks")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest poset a loaded document may declare; for `verify`, the
    /// default size cap of the enumerating lemmas.
    #[arg(long, global = true)]
    pub max_elements: Option<usize>,
    /// Print results as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate every declaration in a file.
    Check { file: PathBuf },
    /// Print the regular open completion of a poset.
    Completion { file: PathBuf, poset: String },
    /// Build an amalgam and print its poset.
    Amalgamate { file: PathBuf, amalgam: String },
    /// Validate a sweetness model, optionally as an extension of another.
    SweetValidate {
        file: PathBuf,
        sweet: String,
        /// Check that SWEET extends this model (matched by labels).
        #[arg(long)]
        extends: Option<String>,
    },
    /// Check `T1 <= T2` for two towers (matched by labels).
    TowerLeq {
        file: PathBuf,
        t1: String,
        t2: String,
        /// Witness indices, comma separated; defaults to all levels.
        #[arg(long, value_delimiter = ',')]
        witness: Option<Vec<usize>>,
    },
    /// Run a lemma check and print its report.
    Verify {
        #[arg(value_enum)]
        lemma: Lemma,
        /// A single number for the main cap, or `key=value,...`.
        #[arg(long)]
        caps: Option<String>,
        /// Time budget in milliseconds (default 60000, or FORCELAB_BUDGET_MS).
        #[arg(long)]
        budget: Option<u64>,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// Record elapsed time in the report.
        #[arg(long)]
        timing: bool,
        /// Write each counterexample to this directory.
        #[arg(long)]
        persist: Option<PathBuf>,
    },
    /// Re-emit a document.
    Emit {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Dsl)]
        format: Format,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Lemma {
    Bcd,
    Amalgam,
    Sweet,
    Embedding,
    Completion,
    Tower,
}

/// Result of a command: text for standard output and an exit status.
pub struct Outcome {
    pub stdout: String,
    pub status: i32,
}

/// Runs a parsed command line. Errors are usage, parse or reference errors.
pub fn execute(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Check { file } => check(&load(file, cli)?, cli.json),
        Command::Completion { file, poset } => completion(&load(file, cli)?, poset, cli.json),
        Command::Amalgamate { file, amalgam } => amalgamate(&load(file, cli)?, amalgam, cli.json),
        Command::SweetValidate { file, sweet, extends } => sweet_validate(&load(file, cli)?, sweet, extends.as_deref(), cli.json),
        Command::TowerLeq { file, t1, t2, witness } => tower_leq(&load(file, cli)?, t1, t2, witness.as_deref(), cli.json),
        Command::Verify {
            lemma,
            caps,
            budget,
            jobs,
            timing,
            persist,
        } => {
            let cfg = LabConfig {
                seed: cli.seed,
                budget: budget_from(*budget)?,
                jobs: *jobs,
                timing: *timing,
            };
            let report = verify(*lemma, caps.as_deref(), cli.max_elements, &cfg)?;
            if let Some(dir) = persist {
                persist_counterexamples(dir, &report)?;
            }
            Ok(Outcome {
                stdout: report.to_json(),
                status: if report.passed() { EXIT_OK } else { EXIT_FAIL },
            })
        }
        Command::Emit { file, format } => {
            let doc = load(file, cli)?;
            let format = if cli.json { Format::Json } else { *format };
            Ok(Outcome {
                stdout: emit(&doc, format),
                status: EXIT_OK,
            })
        }
    }
}

/// Parses `args`, runs the command and returns (stdout, stderr, status).
pub fn run<I, T>(args: I) -> (String, String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let status = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                (String::new(), text, status)
            } else {
                (text, String::new(), status)
            };
        }
    };
    match execute(&cli) {
        Ok(o) => (o.stdout, String::new(), o.status),
        Err(e) => (String::new(), format!("error: {e}\n"), exit_code(&e)),
    }
}

/// Parse and reference problems are usage errors; anything the core
/// rejects while building a declared object is a validation failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Core(_) | Error::Resolve(ResolveError::Core { .. }) | Error::Resolve(ResolveError::Invalid { .. }) => EXIT_FAIL,
        _ => EXIT_USAGE,
    }
}

fn budget_from(flag: Option<u64>) -> Result<Duration, Error> {
    if let Some(ms) = flag {
        return Ok(Duration::from_millis(ms));
    }
    match std::env::var("FORCELAB_BUDGET_MS") {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map(Duration::from_millis)
            .map_err(|_| Error::Usage(format!("FORCELAB_BUDGET_MS is not a number of milliseconds: `{v}`"))),
        Err(_) => Ok(lab::DEFAULT_BUDGET),
    }
}

fn load(path: &Path, cli: &Cli) -> Result<Document, Error> {
    let text = std::fs::read_to_string(path)?;
    let doc = crate::load_str(&text)?;
    if let Some(max) = cli.max_elements {
        for d in doc.decls() {
            if let Decl::Poset(p) = d {
                if p.poset.len() > max {
                    return Err(Error::Usage(format!("poset `{}` has {} elements, above --max-elements {max}", p.name, p.poset.len())));
                }
            }
        }
    }
    Ok(doc)
}

/// Parses `--caps`: either a bare number for `main` or `key=value` pairs.
pub fn parse_caps(text: Option<&str>, main: &str, known: &[&str]) -> Result<BTreeMap<String, usize>, Error> {
    let mut out = BTreeMap::new();
    let Some(text) = text else { return Ok(out) };
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = match part.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => (main, part),
        };
        if !known.contains(&k) {
            return Err(Error::Usage(format!("unknown cap `{k}`; expected one of {}", known.join(", "))));
        }
        let v: usize = v.parse().map_err(|_| Error::Usage(format!("cap `{k}` needs a number, got `{v}`")))?;
        out.insert(k.to_string(), v);
    }
    Ok(out)
}

pub fn verify(lemma: Lemma, caps: Option<&str>, max_elements: Option<usize>, cfg: &LabConfig) -> Result<VerificationReport, Error> {
    match lemma {
        Lemma::Bcd => {
            let c = parse_caps(caps, "max_atoms", &["max_atoms"])?;
            lab::verify_bcd(c.get("max_atoms").copied().unwrap_or(4), cfg)
        }
        Lemma::Amalgam => {
            let c = parse_caps(caps, "factor", &["base", "factor", "elements"])?;
            let get = |k: &str, d: usize| c.get(k).copied().unwrap_or(d);
            lab::verify_amalgam_claims(get("base", 2), get("factor", 3), get("elements", max_elements.unwrap_or(4)), cfg)
        }
        Lemma::Sweet => {
            let c = parse_caps(caps, "triples", &["triples", "amalgams", "hechlers"])?;
            let get = |k: &str, d: usize| c.get(k).copied().unwrap_or(d);
            lab::verify_sweet_laws(get("triples", 1000), get("amalgams", 200), get("hechlers", 50), cfg)
        }
        Lemma::Embedding => {
            let c = parse_caps(caps, "size", &["size"])?;
            lab::verify_embedding_criteria(c.get("size").copied().or(max_elements).unwrap_or(5), cfg)
        }
        Lemma::Tower => {
            parse_caps(caps, "none", &[])?;
            lab::verify_tower_laws(cfg)
        }
        Lemma::Completion => {
            let c = parse_caps(caps, "size", &["size"])?;
            lab::verify_completion(c.get("size").copied().or(max_elements).unwrap_or(5), cfg)
        }
    }
}

fn persist_counterexamples(dir: &Path, report: &VerificationReport) -> Result<(), Error> {
    if report.counterexamples.is_empty() {
        return Ok(());
    }
    std::fs::create_dir_all(dir)?;
    for (i, c) in report.counterexamples.iter().enumerate() {
        let stem = format!("{}-seed{}-{i:04}", report.lemma, report.seed);
        match c["models"].as_array() {
            Some(models) => {
                let mut text = format!("# expect: {}\n# {}\n", c["law"].as_str().unwrap_or("?"), c["case"].as_str().unwrap_or(""));
                for m in models.iter().filter_map(Value::as_str) {
                    text.push_str(m);
                }
                std::fs::write(dir.join(format!("{stem}.fl")), text)?;
            }
            None => std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(c)? + "\n")?,
        }
    }
    Ok(())
}

struct Lines {
    json: bool,
    text: String,
    items: Vec<Value>,
    failed: bool,
}

impl Lines {
    fn new(json: bool) -> Self {
        Lines {
            json,
            text: String::new(),
            items: Vec::new(),
            failed: false,
        }
    }

    fn ok(&mut self, kind: &str, name: &str, note: String) {
        let _ = writeln!(self.text, "ok {kind} {name}{}", if note.is_empty() { String::new() } else { format!(": {note}") });
        self.items.push(json!({"kind": kind, "name": name, "ok": true, "note": note}));
    }

    fn fail(&mut self, kind: &str, name: &str, certificate: Vec<String>) {
        self.failed = true;
        let _ = writeln!(self.text, "FAIL {kind} {name}");
        for c in &certificate {
            let _ = writeln!(self.text, "  {c}");
        }
        self.items.push(json!({"kind": kind, "name": name, "ok": false, "certificate": certificate}));
    }

    fn report(&mut self, kind: &str, name: &str, r: &SweetReport, note: String) {
        if r.holds() {
            self.ok(kind, name, note);
        } else {
            self.fail(kind, name, r.failures.iter().map(ToString::to_string).collect());
        }
    }

    fn finish(self) -> Outcome {
        let status = if self.failed { EXIT_FAIL } else { EXIT_OK };
        let stdout = if self.json {
            let mut s = serde_json::to_string_pretty(&json!({"passed": !self.failed, "results": self.items})).expect("plain data");
            s.push('\n');
            s
        } else {
            self.text
        };
        Outcome { stdout, status }
    }
}

/// Why an inclusion is not a complete suborder: a pair of incompatible
/// conditions that become compatible, or a maximal antichain whose image
/// misses some condition of the large poset.
pub fn embedding_certificate(inc: &PosetInclusion) -> Vec<String> {
    let (s, l) = (inc.small(), inc.large());
    for a in 0..s.len() {
        for b in a + 1..s.len() {
            if !s.compat(a, b) && l.compat(inc.image(a), inc.image(b)) {
                return vec![format!("incompatibility not preserved: {} and {} are compatible in the target", s.label(a), s.label(b))];
            }
        }
    }
    if let Ok(acs) = s.maximal_antichains() {
        for ac in acs {
            let img: Vec<usize> = ac.members().iter().map(|&x| inc.image(x)).collect();
            if let Some(x) = (0..l.len()).find(|&x| img.iter().all(|&y| !l.compat(x, y))) {
                let names: Vec<&str> = ac.members().iter().map(|&m| s.label(m)).collect();
                return vec![format!("maximal antichain {{{}}} is not maximal: {} is incompatible with its image", names.join(", "), l.label(x))];
            }
        }
    }
    vec!["some condition of the target has no reduction".into()]
}

pub fn check(doc: &Document, json: bool) -> Result<Outcome, Error> {
    let mut out = Lines::new(json);
    for d in doc.decls() {
        let name = d.name();
        match d {
            Decl::Poset(p) => {
                let atoms = regular_open_completion(&p.poset).map(|a| a.atom_count());
                match atoms {
                    Ok(a) => out.ok("poset", name, format!("{} elements, {a} atoms", p.poset.len())),
                    Err(e) => out.fail("poset", name, vec![e.to_string()]),
                }
            }
            Decl::Map(_) => {
                let inc = doc.inclusion(name)?;
                if check_complete_suborder(&inc) {
                    out.ok("map", name, "complete suborder".into());
                } else {
                    let mut cert = vec!["not-complete".to_string()];
                    cert.extend(embedding_certificate(&inc));
                    out.fail("map", name, cert);
                }
            }
            Decl::Sweet(_) => {
                let m = doc.sweet(name)?;
                out.report("sweet", name, &validate_sweet(&m), String::new());
            }
            Decl::Hechler(_) => {
                let h = doc.hechler(name)?;
                out.ok("hechler", name, format!("{} conditions", hechler_poset(h).len()));
            }
            Decl::Amalgam(_) => match doc.amalgam(name) {
                Ok(inst) => {
                    let mut cert = Vec::new();
                    for (side, inc) in [("left", inst.left_inclusion()), ("right", inst.right_inclusion())] {
                        match inc {
                            Ok(i) if check_complete_suborder(&i) => {}
                            Ok(_) => cert.push(format!("{side} injection is not a complete suborder")),
                            Err(e) => cert.push(format!("{side} injection: {e}")),
                        }
                    }
                    if !check_identification(&inst) {
                        cert.push("the two copies of the base are not identified".into());
                    }
                    if cert.is_empty() {
                        out.ok("amalgam", name, format!("{} conditions, {} atoms", inst.poset().len(), inst.completion().atom_count()));
                    } else {
                        out.fail("amalgam", name, cert);
                    }
                }
                Err(e @ ResolveError::Missing { .. }) => return Err(e.into()),
                Err(e) => out.fail("amalgam", name, vec![e.to_string()]),
            },
            Decl::Tower(_) => match doc.tower(name) {
                Ok(t) => out.report("tower", name, &t.validate(), format!("{} levels", t.len())),
                Err(e @ ResolveError::Missing { .. }) => return Err(e.into()),
                Err(e) => out.fail("tower", name, vec![e.to_string()]),
            },
        }
    }
    Ok(out.finish())
}

pub fn completion(doc: &Document, name: &str, json: bool) -> Result<Outcome, Error> {
    let p = doc.poset(name)?;
    let ba = regular_open_completion(p)?;
    let stdout = if json {
        let values: BTreeMap<&str, Vec<usize>> = (0..p.len()).map(|x| (p.label(x), ba.value(x).iter().collect())).collect();
        let mut s = serde_json::to_string_pretty(&json!({"poset": name, "atoms": ba.atom_count(), "values": values}))?;
        s.push('\n');
        s
    } else {
        let mut s = format!("completion of {name}: {} atoms\n", ba.atom_count());
        for x in 0..p.len() {
            let _ = writeln!(s, "  {} -> {}", p.label(x), atom_set_label(ba.value(x)));
        }
        s
    };
    Ok(Outcome { stdout, status: EXIT_OK })
}

pub fn amalgamate(doc: &Document, name: &str, json: bool) -> Result<Outcome, Error> {
    let inst = doc.amalgam(name)?;
    let out = Document::new(vec![Decl::Poset(PosetDecl::from_poset(name.to_string(), inst.poset()))]);
    Ok(Outcome {
        stdout: emit(&out, if json { Format::Json } else { Format::Dsl }),
        status: EXIT_OK,
    })
}

pub fn sweet_validate(doc: &Document, name: &str, extends: Option<&str>, json: bool) -> Result<Outcome, Error> {
    let m = doc.sweet(name)?;
    let mut out = Lines::new(json);
    out.report("sweet", name, &validate_sweet(&m), String::new());
    if let Some(other) = extends {
        let big = doc.sweet(other)?;
        let label = format!("{other} extends {name}");
        match validate_extends(&m, &big) {
            Ok(r) => out.report("extends", &label, &r, String::new()),
            Err(e) => out.fail("extends", &label, vec![e.to_string()]),
        }
    }
    Ok(out.finish())
}

pub fn tower_leq(doc: &Document, t1: &str, t2: &str, witness: Option<&[usize]>, json: bool) -> Result<Outcome, Error> {
    let (a, b): (Tower, Tower) = (doc.tower(t1)?, doc.tower(t2)?);
    let c = match witness {
        Some(ix) => TowerLeqWitness::new(ix.iter().copied(), a.len()).map_err(|e| Error::Usage(e.to_string()))?,
        None => TowerLeqWitness::all(a.len()),
    };
    let mut out = Lines::new(json);
    let label = format!("{t1} <= {t2}");
    match tower_leq_by_labels(&a, &b, &c) {
        Ok(r) => out.report("tower-leq", &label, &r, format!("witness {:?}", c.indices())),
        Err(e) => out.fail("tower-leq", &label, vec![e.to_string()]),
    }
    Ok(out.finish())
}
