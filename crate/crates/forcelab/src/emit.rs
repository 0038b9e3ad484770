//! Canonical DSL, versioned JSON and DOT output for documents.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::doc::{AmalgamDecl, Decl, Document, HechlerDecl, MapDecl, PosetDecl, SweetDecl, TowerDecl, TowerLevel};
use crate::dsl::is_bare_char;

pub const SCHEMA: &str = "forcelab.v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Dsl,
    Json,
    Dot,
}

pub fn emit(doc: &Document, format: Format) -> String {
    match format {
        Format::Dsl => to_dsl(doc),
        Format::Json => to_json(doc),
        Format::Dot => to_dot(doc),
    }
}

/// A label as written in the DSL, quoted when needed.
pub fn quote(label: &str) -> String {
    if !label.is_empty() && label.chars().all(is_bare_char) {
        label.to_string()
    } else {
        let mut s = String::from("\"");
        for c in label.chars() {
            if c == '"' || c == '\\' {
                s.push('\\');
            }
            s.push(c);
        }
        s.push('"');
        s
    }
}

fn words<'a>(it: impl IntoIterator<Item = &'a String>) -> String {
    it.into_iter().map(|l| quote(l)).collect::<Vec<_>>().join(" ")
}

pub fn poset_dsl(d: &PosetDecl) -> String {
    let p = &d.poset;
    let mut s = format!("poset {} {{\n", quote(&d.name));
    let _ = writeln!(s, "  elements: {};", words(p.labels()));
    let _ = writeln!(s, "  bottom: {};", quote(p.label(p.bottom())));
    let covers = p.covers();
    if !covers.is_empty() {
        let cs: Vec<String> = covers
            .iter()
            .map(|&(a, b)| format!("{}<{}", quote(p.label(a)), quote(p.label(b))))
            .collect();
        let _ = writeln!(s, "  covers: {};", cs.join(", "));
    }
    s.push_str("}\n");
    s
}

pub fn sweet_dsl(d: &SweetDecl) -> String {
    let mut s = format!("sweet {} on {} {{\n", quote(&d.name), quote(&d.poset));
    let _ = writeln!(s, "  dense: {};", words(&d.dense));
    for (n, level) in d.relations.iter().enumerate() {
        let cs: String = level.iter().map(|c| format!("[{}]", words(c))).collect();
        let _ = writeln!(s, "  E{n}: {cs};");
    }
    s.push_str("}\n");
    s
}

fn decl_dsl(d: &Decl) -> String {
    match d {
        Decl::Poset(p) => poset_dsl(p),
        Decl::Map(m) => {
            let mut s = format!("map {}: {} -> {} {{\n", quote(&m.name), quote(&m.source), quote(&m.target));
            for (a, b) in &m.pairs {
                let _ = writeln!(s, "  {} -> {};", quote(a), quote(b));
            }
            s.push_str("}\n");
            s
        }
        Decl::Sweet(w) => sweet_dsl(w),
        Decl::Hechler(h) => format!("hechler {} m={} h={};\n", quote(&h.name), h.m, h.h),
        Decl::Amalgam(a) => format!("amalgam {}: {}, {};\n", quote(&a.name), quote(&a.left), quote(&a.right)),
        Decl::Tower(t) => {
            let mut s = format!("tower {} {{\n", quote(&t.name));
            for lv in &t.levels {
                let _ = writeln!(s, "  level: {} {};", quote(&lv.poset), quote(&lv.sweet));
            }
            s.push_str("}\n");
            s
        }
    }
}

/// Declarations separated by blank lines; the empty document is empty.
pub fn to_dsl(doc: &Document) -> String {
    doc.decls().iter().map(decl_dsl).collect::<Vec<_>>().join("\n")
}

/// Hasse diagrams of every poset, stronger conditions drawn above.
pub fn to_dot(doc: &Document) -> String {
    let mut s = String::new();
    for d in doc.decls() {
        if let Decl::Poset(p) = d {
            s.push_str(&poset_dot(p));
        }
    }
    s
}

pub fn poset_dot(d: &PosetDecl) -> String {
    let p = &d.poset;
    let esc = |l: &str| l.replace('\\', "\\\\").replace('"', "\\\"");
    let mut s = format!("digraph \"{}\" {{\n  rankdir=BT;\n", esc(&d.name));
    for l in p.labels() {
        let _ = writeln!(s, "  \"{}\";", esc(l));
    }
    for (a, b) in p.covers() {
        let _ = writeln!(s, "  \"{}\" -> \"{}\";", esc(p.label(a)), esc(p.label(b)));
    }
    s.push_str("}\n");
    s
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonDocument {
    schema: String,
    declarations: Vec<JsonDecl>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum JsonDecl {
    Poset {
        name: String,
        elements: Vec<String>,
        bottom: String,
        covers: Vec<(String, String)>,
    },
    Map {
        name: String,
        source: String,
        target: String,
        pairs: Vec<(String, String)>,
    },
    Sweet {
        name: String,
        poset: String,
        dense: Vec<String>,
        relations: Vec<Vec<Vec<String>>>,
    },
    Hechler {
        name: String,
        m: usize,
        h: usize,
    },
    Amalgam {
        name: String,
        left: String,
        right: String,
    },
    Tower {
        name: String,
        levels: Vec<JsonLevel>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonLevel {
    poset: String,
    sweet: String,
}

pub fn to_json(doc: &Document) -> String {
    let declarations = doc
        .decls()
        .iter()
        .map(|d| match d {
            Decl::Poset(p) => {
                let q = &p.poset;
                JsonDecl::Poset {
                    name: p.name.clone(),
                    elements: q.labels().to_vec(),
                    bottom: q.label(q.bottom()).to_string(),
                    covers: q
                        .covers()
                        .into_iter()
                        .map(|(a, b)| (q.label(a).to_string(), q.label(b).to_string()))
                        .collect(),
                }
            }
            Decl::Map(m) => JsonDecl::Map {
                name: m.name.clone(),
                source: m.source.clone(),
                target: m.target.clone(),
                pairs: m.pairs.clone(),
            },
            Decl::Sweet(w) => JsonDecl::Sweet {
                name: w.name.clone(),
                poset: w.poset.clone(),
                dense: w.dense.clone(),
                relations: w.relations.clone(),
            },
            Decl::Hechler(h) => JsonDecl::Hechler {
                name: h.name.clone(),
                m: h.m,
                h: h.h,
            },
            Decl::Amalgam(a) => JsonDecl::Amalgam {
                name: a.name.clone(),
                left: a.left.clone(),
                right: a.right.clone(),
            },
            Decl::Tower(t) => JsonDecl::Tower {
                name: t.name.clone(),
                levels: t
                    .levels
                    .iter()
                    .map(|l| JsonLevel {
                        poset: l.poset.clone(),
                        sweet: l.sweet.clone(),
                    })
                    .collect(),
            },
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&JsonDocument {
        schema: SCHEMA.into(),
        declarations,
    })
    .expect("plain data serializes");
    s.push('\n');
    s
}

/// Reads the JSON form. The content is re-checked by rendering it to the
/// DSL and parsing that, so both formats accept exactly the same documents.
pub fn from_json(text: &str) -> Result<Document, crate::Error> {
    let j: JsonDocument = serde_json::from_str(text)?;
    if j.schema != SCHEMA {
        return Err(crate::Error::Schema(j.schema));
    }
    let mut decls = Vec::with_capacity(j.declarations.len());
    let mut dsl = String::new();
    for d in j.declarations {
        let decl = match d {
            JsonDecl::Poset {
                name,
                elements,
                bottom,
                covers,
            } => {
                // rendered directly: the poset may be invalid, which the
                // parser then reports
                let mut s = format!("poset {} {{\n  elements: {};\n  bottom: {};\n", quote(&name), words(&elements), quote(&bottom));
                if !covers.is_empty() {
                    let cs: Vec<String> = covers.iter().map(|(a, b)| format!("{}<{}", quote(a), quote(b))).collect();
                    let _ = writeln!(s, "  covers: {};", cs.join(", "));
                }
                s.push_str("}\n");
                dsl.push_str(&s);
                continue;
            }
            JsonDecl::Map {
                name,
                source,
                target,
                pairs,
            } => Decl::Map(MapDecl {
                name,
                source,
                target,
                pairs,
            }),
            JsonDecl::Sweet {
                name,
                poset,
                dense,
                relations,
            } => Decl::Sweet(SweetDecl {
                name,
                poset,
                dense,
                relations,
            }),
            JsonDecl::Hechler { name, m, h } => Decl::Hechler(HechlerDecl { name, m, h }),
            JsonDecl::Amalgam { name, left, right } => Decl::Amalgam(AmalgamDecl { name, left, right }),
            JsonDecl::Tower { name, levels } => Decl::Tower(TowerDecl {
                name,
                levels: levels
                    .into_iter()
                    .map(|l| TowerLevel {
                        poset: l.poset,
                        sweet: l.sweet,
                    })
                    .collect(),
            }),
        };
        decls.push(decl);
    }
    for d in &decls {
        dsl.push_str(&decl_dsl(d));
    }
    Ok(crate::dsl::parse(&dsl)?)
}
