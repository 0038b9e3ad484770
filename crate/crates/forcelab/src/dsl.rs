//! Parser for the line-oriented declaration language.
//!
//! ```text
//! poset vee { elements: 0 a b; bottom: 0; covers: 0<a, 0<b; }
//! map inc: small -> vee { 0 -> 0; a -> a; }
//! sweet s on vee { dense: a b; E0: [a][b]; }
//! tower t { level: small s0; level: vee s; }
//! hechler d m=2 h=1;
//! amalgam am: left, right;
//! ```
//!
//! Labels are bare words or double-quoted strings. `#` starts a comment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::doc::{AmalgamDecl, Decl, Document, HechlerDecl, MapDecl, PosetDecl, SweetDecl, TowerDecl, TowerLevel};

/// Diagnostic codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Code {
    /// Malformed input.
    Syntax,
    /// A name or element that is not declared.
    Unresolved,
    /// No bottom, or a bottom that is not below everything.
    Bottom,
    /// Covers that do not describe a partial order.
    Cycle,
    /// Two declarations with one name.
    DuplicateName,
    /// Element listed twice or used without being listed.
    Element,
    /// Well-formed but structurally invalid declaration.
    Invalid,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::Syntax => "E001",
            Code::Unresolved => "E002",
            Code::Bottom => "E003",
            Code::Cycle => "E004",
            Code::DuplicateName => "E005",
            Code::Element => "E006",
            Code::Invalid => "E007",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct Diagnostic {
    pub code: Code,
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}:{}: {}", self.code.as_str(), self.pos.line, self.pos.col, self.message)
    }
}

fn diag(code: Code, pos: Pos, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        code,
        pos,
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Quoted(String),
    Sym(char),
    Arrow,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Quoted(w) => write!(f, "\"{w}\""),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Arrow => f.write_str("`->`"),
        }
    }
}

const SYMBOLS: &str = "{}[];:,<=";

/// Characters that force a label to be quoted.
pub(crate) fn is_bare_char(c: char) -> bool {
    !c.is_whitespace() && !SYMBOLS.contains(c) && !"\"#->()".contains(c)
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, Diagnostic> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let pos = Pos { line: ln + 1, col: i + 1 };
            if c.is_whitespace() {
                i += 1;
            } else if c == '#' {
                break;
            } else if c == '-' && chars.get(i + 1) == Some(&'>') {
                out.push((Tok::Arrow, pos));
                i += 2;
            } else if SYMBOLS.contains(c) {
                out.push((Tok::Sym(c), pos));
                i += 1;
            } else if c == '"' {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(diag(Code::Syntax, pos, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => match chars.get(i + 1) {
                            Some(&e @ ('"' | '\\')) => {
                                s.push(e);
                                i += 2;
                            }
                            _ => return Err(diag(Code::Syntax, Pos { line: ln + 1, col: i + 1 }, "bad escape")),
                        },
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                i += 1;
                if s.is_empty() {
                    return Err(diag(Code::Syntax, pos, "empty label"));
                }
                out.push((Tok::Quoted(s), pos));
            } else if is_bare_char(c) {
                let start = i;
                while i < chars.len() && is_bare_char(chars[i]) {
                    i += 1;
                }
                out.push((Tok::Word(chars[start..i].iter().collect()), pos));
            } else {
                return Err(diag(Code::Syntax, pos, format!("unexpected character `{c}`")));
            }
        }
    }
    Ok(out)
}

/// A name or label with the position it was written at.
#[derive(Clone, Debug)]
struct Spanned {
    text: String,
    pos: Pos,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        match self.peek() {
            Some(t) => diag(Code::Syntax, self.pos(), format!("expected {wanted}, found {t}")),
            None => diag(Code::Syntax, self.pos(), format!("expected {wanted}, found end of input")),
        }
    }

    fn sym(&mut self, c: char) -> Result<(), Diagnostic> {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn arrow(&mut self) -> Result<(), Diagnostic> {
        if self.peek() == Some(&Tok::Arrow) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.unexpected("`->`"))
        }
    }

    /// A bare word or a quoted label.
    fn label(&mut self, wanted: &str) -> Result<Spanned, Diagnostic> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Word(w)) | Some(Tok::Quoted(w)) => {
                let text = w.clone();
                self.at += 1;
                Ok(Spanned { text, pos })
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), Diagnostic> {
        match self.peek() {
            Some(Tok::Word(w)) if w == kw => {
                self.at += 1;
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn is_label(&self) -> bool {
        matches!(self.peek(), Some(Tok::Word(_)) | Some(Tok::Quoted(_)))
    }

    fn number(&mut self) -> Result<usize, Diagnostic> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Word(w)) => {
                let n = w.parse().map_err(|_| diag(Code::Syntax, pos, format!("`{w}` is not a number")))?;
                self.at += 1;
                Ok(n)
            }
            _ => Err(self.unexpected("a number")),
        }
    }
}

/// Raw declarations with source positions, before cross-checking.
enum Raw {
    Poset(PosetDecl),
    Map { decl: MapDecl, refs: Vec<Spanned>, src: Spanned, dst: Spanned },
    Sweet { decl: SweetDecl, poset: Spanned, labels: Vec<Spanned>, pos: Pos },
    Tower { decl: TowerDecl, refs: Vec<(Spanned, Spanned)>, pos: Pos },
    Hechler(HechlerDecl),
    Amalgam { decl: AmalgamDecl, left: Spanned, right: Spanned, pos: Pos },
}

pub fn parse(src: &str) -> Result<Document, Diagnostic> {
    let toks = lex(src)?;
    let end = Pos {
        line: src.lines().count().max(1),
        col: src.lines().last().map_or(1, |l| l.chars().count() + 1),
    };
    let mut p = Parser { toks, at: 0, end };
    let mut raws: Vec<(Spanned, Raw)> = Vec::new();
    let mut names: BTreeMap<String, Pos> = BTreeMap::new();
    while p.peek().is_some() {
        let kw = p.label("a declaration keyword")?;
        let name = p.label("a name")?;
        if let Some(first) = names.get(&name.text) {
            return Err(diag(
                Code::DuplicateName,
                name.pos,
                format!("`{}` is already declared at {}:{}", name.text, first.line, first.col),
            ));
        }
        names.insert(name.text.clone(), name.pos);
        let raw = match kw.text.as_str() {
            "poset" => poset_body(&mut p, &name)?,
            "map" => map_body(&mut p, &name)?,
            "sweet" => sweet_body(&mut p, &name)?,
            "tower" => tower_body(&mut p, &name)?,
            "hechler" => hechler_body(&mut p, &name)?,
            "amalgam" => amalgam_body(&mut p, &name)?,
            other => {
                return Err(diag(Code::Syntax, kw.pos, format!("unknown declaration `{other}`")));
            }
        };
        raws.push((name, raw));
    }
    resolve(raws)
}

fn poset_body(p: &mut Parser, name: &Spanned) -> Result<Raw, Diagnostic> {
    p.sym('{')?;
    let mut elements: Option<Vec<Spanned>> = None;
    let mut bottom: Option<Spanned> = None;
    let mut covers: Option<Vec<Vec<Spanned>>> = None;
    while !p.eat_sym('}') {
        let field = p.label("`elements`, `bottom`, `covers` or `}`")?;
        p.sym(':')?;
        let dup = || diag(Code::Syntax, field.pos, format!("`{}` given twice", field.text));
        match field.text.as_str() {
            "elements" => {
                let mut es = Vec::new();
                while p.is_label() {
                    es.push(p.label("an element")?);
                }
                if elements.replace(es).is_some() {
                    return Err(dup());
                }
            }
            "bottom" => {
                let b = p.label("the bottom element")?;
                if bottom.replace(b).is_some() {
                    return Err(dup());
                }
            }
            "covers" => {
                let mut chains = Vec::new();
                if p.is_label() {
                    loop {
                        let mut chain = vec![p.label("an element")?];
                        p.sym('<')?;
                        chain.push(p.label("an element")?);
                        while p.eat_sym('<') {
                            chain.push(p.label("an element")?);
                        }
                        chains.push(chain);
                        if !p.eat_sym(',') {
                            break;
                        }
                    }
                }
                if covers.replace(chains).is_some() {
                    return Err(dup());
                }
            }
            other => return Err(diag(Code::Syntax, field.pos, format!("unknown poset field `{other}`"))),
        }
        p.sym(';')?;
    }
    let elements = elements.ok_or_else(|| diag(Code::Syntax, name.pos, format!("poset `{}` lists no elements", name.text)))?;
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, e) in elements.iter().enumerate() {
        if index.insert(&e.text, i).is_some() {
            return Err(diag(Code::Element, e.pos, format!("element `{}` listed twice", e.text)));
        }
    }
    let lookup = |s: &Spanned| {
        index
            .get(s.text.as_str())
            .copied()
            .ok_or_else(|| diag(Code::Element, s.pos, format!("`{}` is not an element of `{}`", s.text, name.text)))
    };
    let bottom = bottom.ok_or_else(|| diag(Code::Bottom, name.pos, format!("poset `{}` declares no bottom", name.text)))?;
    let b = lookup(&bottom)?;
    let mut pairs = Vec::new();
    let mut pair_pos = Vec::new();
    for chain in covers.unwrap_or_default() {
        for w in chain.windows(2) {
            pairs.push((lookup(&w[0])?, lookup(&w[1])?));
            pair_pos.push(w[0].pos);
        }
    }
    if let Some(at) = find_cycle(elements.len(), &pairs) {
        let (a, c) = pairs[at];
        return Err(diag(
            Code::Cycle,
            pair_pos[at],
            format!("covers are cyclic through `{}` < `{}`", elements[a].text, elements[c].text),
        ));
    }
    let labels: Vec<String> = elements.iter().map(|e| e.text.clone()).collect();
    let decl = PosetDecl::new(name.text.clone(), &labels, b, &pairs).map_err(|e| {
        diag(Code::Bottom, bottom.pos, format!("`{}` is not below every element: {e}", bottom.text))
    })?;
    Ok(Raw::Poset(decl))
}

/// Index of a cover pair lying on a directed cycle.
fn find_cycle(n: usize, pairs: &[(usize, usize)]) -> Option<usize> {
    let mut reach = vec![vec![false; n]; n];
    for &(a, b) in pairs {
        reach[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    pairs.iter().position(|&(a, b)| a == b || reach[b][a])
}

fn map_body(p: &mut Parser, name: &Spanned) -> Result<Raw, Diagnostic> {
    p.sym(':')?;
    let src = p.label("the source poset")?;
    p.arrow()?;
    let dst = p.label("the target poset")?;
    p.sym('{')?;
    let mut pairs = Vec::new();
    let mut refs = Vec::new();
    let mut seen = BTreeSet::new();
    while !p.eat_sym('}') {
        let a = p.label("a source element")?;
        p.arrow()?;
        let b = p.label("a target element")?;
        p.sym(';')?;
        if !seen.insert(a.text.clone()) {
            return Err(diag(Code::Element, a.pos, format!("`{}` is mapped twice", a.text)));
        }
        pairs.push((a.text.clone(), b.text.clone()));
        refs.push(a);
        refs.push(b);
    }
    pairs.sort();
    Ok(Raw::Map {
        decl: MapDecl {
            name: name.text.clone(),
            source: src.text.clone(),
            target: dst.text.clone(),
            pairs,
        },
        refs,
        src,
        dst,
    })
}

fn sweet_body(p: &mut Parser, name: &Spanned) -> Result<Raw, Diagnostic> {
    p.keyword("on")?;
    let poset = p.label("a poset name")?;
    p.sym('{')?;
    p.keyword("dense")?;
    p.sym(':')?;
    let mut labels = Vec::new();
    let mut dense = Vec::new();
    while p.is_label() {
        let l = p.label("an element")?;
        dense.push(l.text.clone());
        labels.push(l);
    }
    p.sym(';')?;
    let mut relations = Vec::new();
    while !p.eat_sym('}') {
        let rel = p.label("`E<n>` or `}`")?;
        if rel.text != format!("E{}", relations.len()) {
            return Err(diag(
                Code::Syntax,
                rel.pos,
                format!("expected `E{}`, found `{}`", relations.len(), rel.text),
            ));
        }
        p.sym(':')?;
        let mut classes = Vec::new();
        while p.eat_sym('[') {
            let mut c = Vec::new();
            while !p.eat_sym(']') {
                let l = p.label("an element or `]`")?;
                c.push(l.text.clone());
                labels.push(l);
            }
            classes.push(c);
        }
        p.sym(';')?;
        relations.push(classes);
    }
    let mut decl = SweetDecl {
        name: name.text.clone(),
        poset: poset.text.clone(),
        dense,
        relations,
    };
    decl.canonicalize();
    Ok(Raw::Sweet {
        decl,
        poset,
        labels,
        pos: name.pos,
    })
}

fn tower_body(p: &mut Parser, name: &Spanned) -> Result<Raw, Diagnostic> {
    p.sym('{')?;
    let mut levels = Vec::new();
    let mut refs = Vec::new();
    while !p.eat_sym('}') {
        p.keyword("level")?;
        p.sym(':')?;
        let poset = p.label("a poset name")?;
        let sweet = p.label("a sweet model name")?;
        p.sym(';')?;
        levels.push(TowerLevel {
            poset: poset.text.clone(),
            sweet: sweet.text.clone(),
        });
        refs.push((poset, sweet));
    }
    Ok(Raw::Tower {
        decl: TowerDecl {
            name: name.text.clone(),
            levels,
        },
        refs,
        pos: name.pos,
    })
}

fn hechler_body(p: &mut Parser, name: &Spanned) -> Result<Raw, Diagnostic> {
    p.keyword("m")?;
    p.sym('=')?;
    let mpos = p.pos();
    let m = p.number()?;
    p.keyword("h")?;
    p.sym('=')?;
    let h = p.number()?;
    p.sym(';')?;
    if let Err(e) = forcelab_core::iterate::HechlerParams::new(m, h) {
        return Err(diag(Code::Invalid, mpos, e.to_string()));
    }
    Ok(Raw::Hechler(HechlerDecl {
        name: name.text.clone(),
        m,
        h,
    }))
}

fn amalgam_body(p: &mut Parser, name: &Spanned) -> Result<Raw, Diagnostic> {
    p.sym(':')?;
    let left = p.label("a map name")?;
    p.sym(',')?;
    let right = p.label("a map name")?;
    p.sym(';')?;
    Ok(Raw::Amalgam {
        decl: AmalgamDecl {
            name: name.text.clone(),
            left: left.text.clone(),
            right: right.text.clone(),
        },
        left,
        right,
        pos: name.pos,
    })
}

/// Cross-references: every name resolves to a declaration of the right kind
/// and every element label to an element of the right poset.
fn resolve(raws: Vec<(Spanned, Raw)>) -> Result<Document, Diagnostic> {
    let posets: BTreeMap<String, forcelab_core::Poset> = raws
        .iter()
        .filter_map(|(_, r)| match r {
            Raw::Poset(d) => Some((d.name.clone(), d.poset.clone())),
            _ => None,
        })
        .collect();
    let kind_of: BTreeMap<&str, &'static str> = raws
        .iter()
        .map(|(n, r)| {
            let k = match r {
                Raw::Poset(_) => "poset",
                Raw::Map { .. } => "map",
                Raw::Sweet { .. } => "sweet",
                Raw::Tower { .. } => "tower",
                Raw::Hechler(_) => "hechler",
                Raw::Amalgam { .. } => "amalgam",
            };
            (n.text.as_str(), k)
        })
        .collect();
    let want = |s: &Spanned, kind: &str| -> Result<(), Diagnostic> {
        match kind_of.get(s.text.as_str()) {
            Some(&k) if k == kind => Ok(()),
            Some(&k) => Err(diag(Code::Unresolved, s.pos, format!("`{}` is a {k}, not a {kind}", s.text))),
            None => Err(diag(Code::Unresolved, s.pos, format!("no {kind} named `{}`", s.text))),
        }
    };
    let element = |poset: &str, s: &Spanned| -> Result<(), Diagnostic> {
        if posets[poset].index_of(&s.text).is_none() {
            return Err(diag(Code::Unresolved, s.pos, format!("`{}` is not an element of `{poset}`", s.text)));
        }
        Ok(())
    };
    let sweet_poset: BTreeMap<&str, &str> = raws
        .iter()
        .filter_map(|(_, r)| match r {
            Raw::Sweet { decl, .. } => Some((decl.name.as_str(), decl.poset.as_str())),
            _ => None,
        })
        .collect();
    let map_source: BTreeMap<&str, &str> = raws
        .iter()
        .filter_map(|(_, r)| match r {
            Raw::Map { decl, .. } => Some((decl.name.as_str(), decl.source.as_str())),
            _ => None,
        })
        .collect();

    let mut decls = Vec::with_capacity(raws.len());
    for (_, raw) in &raws {
        let d = match raw {
            Raw::Poset(d) => Decl::Poset(d.clone()),
            Raw::Map { decl, refs, src, dst } => {
                want(src, "poset")?;
                want(dst, "poset")?;
                for pair in refs.chunks(2) {
                    element(&decl.source, &pair[0])?;
                    element(&decl.target, &pair[1])?;
                }
                let src_len = posets[&decl.source].len();
                if decl.pairs.len() != src_len {
                    let missing = posets[&decl.source]
                        .labels()
                        .iter()
                        .find(|l| !decl.pairs.iter().any(|(a, _)| a == *l))
                        .cloned()
                        .unwrap_or_default();
                    return Err(diag(Code::Invalid, src.pos, format!("map `{}` does not send `{missing}` anywhere", decl.name)));
                }
                Decl::Map(decl.clone())
            }
            Raw::Sweet { decl, poset, labels, pos } => {
                want(poset, "poset")?;
                for l in labels {
                    element(&decl.poset, l)?;
                }
                if decl.relations.is_empty() {
                    return Err(diag(Code::Invalid, *pos, format!("sweet model `{}` has no relations", decl.name)));
                }
                let d = Decl::Sweet(decl.clone());
                let one = Document::new(vec![Decl::Poset(PosetDecl::from_poset(decl.poset.clone(), &posets[&decl.poset])), d.clone()]);
                if let Err(e) = one.sweet(&decl.name) {
                    return Err(diag(Code::Invalid, *pos, e.to_string()));
                }
                d
            }
            Raw::Tower { decl, refs, pos } => {
                if refs.is_empty() {
                    return Err(diag(Code::Invalid, *pos, format!("tower `{}` has no levels", decl.name)));
                }
                for (poset, sweet) in refs {
                    want(poset, "poset")?;
                    want(sweet, "sweet")?;
                    if sweet_poset[sweet.text.as_str()] != poset.text {
                        return Err(diag(
                            Code::Invalid,
                            sweet.pos,
                            format!("sweet model `{}` is not based on `{}`", sweet.text, poset.text),
                        ));
                    }
                }
                Decl::Tower(decl.clone())
            }
            Raw::Hechler(d) => Decl::Hechler(d.clone()),
            Raw::Amalgam { decl, left, right, pos } => {
                want(left, "map")?;
                want(right, "map")?;
                if map_source[left.text.as_str()] != map_source[right.text.as_str()] {
                    return Err(diag(Code::Invalid, *pos, format!("maps of amalgam `{}` have different sources", decl.name)));
                }
                Decl::Amalgam(decl.clone())
            }
        };
        decls.push(d);
    }
    Ok(Document::new(decls))
}
