//! The declaration model shared by the DSL, the JSON format and the CLI.
//!
//! A [`Document`] is kept canonical: declarations are sorted by kind then
//! name, poset elements list the bottom first and the rest by label, covers
//! are the Hasse covers, and every member list is sorted. Two parses of the
//! same content therefore compare equal however the source was laid out.

use std::collections::BTreeMap;

use forcelab_core::amalgam::{amalgamate_posets, AmalgamInstance};
use forcelab_core::bits::AtomSet;
use forcelab_core::completion::regular_open_completion;
use forcelab_core::embed::{check_complete_suborder, PosetInclusion};
use forcelab_core::iterate::HechlerParams;
use forcelab_core::sweet::SweetModel;
use forcelab_core::tower::Tower;
use forcelab_core::{Error as CoreError, Poset};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosetDecl {
    pub name: String,
    pub poset: Poset,
}

impl PosetDecl {
    /// Builds the canonical form from labels, a bottom and cover pairs of
    /// indices into `labels`.
    pub fn new(name: String, labels: &[String], bottom: usize, covers: &[(usize, usize)]) -> Result<Self, CoreError> {
        let mut order: Vec<usize> = (0..labels.len()).filter(|&i| i != bottom).collect();
        order.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
        order.insert(0, bottom);
        let mut pos = vec![0; labels.len()];
        for (new, &old) in order.iter().enumerate() {
            pos[old] = new;
        }
        let ls: Vec<String> = order.iter().map(|&i| labels[i].clone()).collect();
        let cs: Vec<(usize, usize)> = covers.iter().map(|&(a, b)| (pos[a], pos[b])).collect();
        Ok(PosetDecl {
            name,
            poset: Poset::from_covers(ls, 0, &cs)?,
        })
    }

    /// Canonical copy of an existing poset.
    pub fn from_poset(name: String, p: &Poset) -> Self {
        Self::new(name, p.labels(), p.bottom(), &p.covers()).expect("valid poset stays valid")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapDecl {
    pub name: String,
    pub source: String,
    pub target: String,
    /// Sorted by source label.
    pub pairs: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweetDecl {
    pub name: String,
    pub poset: String,
    pub dense: Vec<String>,
    /// `relations[n]` lists the classes of `E_n`, each sorted, sorted among
    /// themselves.
    pub relations: Vec<Vec<Vec<String>>>,
}

impl SweetDecl {
    pub fn from_model(name: String, poset: String, m: &SweetModel) -> Self {
        let l = |p: &usize| m.poset().label(*p).to_string();
        let mut s = SweetDecl {
            name,
            poset,
            dense: m.dense().members().iter().map(l).collect(),
            relations: m
                .all_classes()
                .iter()
                .map(|cs| cs.iter().map(|c| c.iter().map(l).collect()).collect())
                .collect(),
        };
        s.canonicalize();
        s
    }

    pub(crate) fn canonicalize(&mut self) {
        self.dense.sort();
        for level in &mut self.relations {
            for c in level.iter_mut() {
                c.sort();
            }
            level.sort();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerLevel {
    pub poset: String,
    pub sweet: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerDecl {
    pub name: String,
    pub levels: Vec<TowerLevel>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HechlerDecl {
    pub name: String,
    pub m: usize,
    pub h: usize,
}

/// Amalgamation of the targets of two maps with a common source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgamDecl {
    pub name: String,
    pub left: String,
    pub right: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Poset(PosetDecl),
    Map(MapDecl),
    Sweet(SweetDecl),
    Hechler(HechlerDecl),
    Amalgam(AmalgamDecl),
    Tower(TowerDecl),
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Poset(d) => &d.name,
            Decl::Map(d) => &d.name,
            Decl::Sweet(d) => &d.name,
            Decl::Hechler(d) => &d.name,
            Decl::Amalgam(d) => &d.name,
            Decl::Tower(d) => &d.name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Decl::Poset(_) => "poset",
            Decl::Map(_) => "map",
            Decl::Sweet(_) => "sweet",
            Decl::Hechler(_) => "hechler",
            Decl::Amalgam(_) => "amalgam",
            Decl::Tower(_) => "tower",
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Decl::Poset(_) => 0,
            Decl::Map(_) => 1,
            Decl::Sweet(_) => 2,
            Decl::Hechler(_) => 3,
            Decl::Amalgam(_) => 4,
            Decl::Tower(_) => 5,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    decls: Vec<Decl>,
    index: BTreeMap<String, usize>,
}

/// Problems met while turning declarations into core values.
#[derive(Debug, thiserror::Error)]
pub enum ResolveError {
    #[error("no {kind} named {name}")]
    Missing { kind: &'static str, name: String },
    #[error("{name}: {source}")]
    Core {
        name: String,
        #[source]
        source: CoreError,
    },
    #[error("{name}: {reason}")]
    Invalid { name: String, reason: String },
}

fn core_err(name: &str) -> impl FnOnce(CoreError) -> ResolveError + '_ {
    move |source| ResolveError::Core {
        name: name.to_string(),
        source,
    }
}

impl Document {
    /// Sorts the declarations. Names must be unique.
    pub fn new(mut decls: Vec<Decl>) -> Self {
        decls.sort_by(|a, b| (a.rank(), a.name()).cmp(&(b.rank(), b.name())));
        let index = decls.iter().enumerate().map(|(i, d)| (d.name().to_string(), i)).collect();
        Document { decls, index }
    }

    pub fn decls(&self) -> &[Decl] {
        &self.decls
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Decl> {
        self.index.get(name).map(|&i| &self.decls[i])
    }

    /// Adds or replaces a declaration.
    pub fn insert(&mut self, d: Decl) {
        let mut decls: Vec<Decl> = std::mem::take(&mut self.decls)
            .into_iter()
            .filter(|x| x.name() != d.name())
            .collect();
        decls.push(d);
        *self = Document::new(decls);
    }

    /// Declares `t` as a tower named `name`, with one poset and one model
    /// per distinct level, named `{name}_{i}` after the first level using
    /// them. Existing declarations with those names are replaced.
    pub fn insert_tower(&mut self, name: &str, t: &Tower) {
        let mut levels: Vec<TowerLevel> = Vec::with_capacity(t.len());
        for (i, m) in t.levels().iter().enumerate() {
            let earlier = t.levels()[..i].iter().position(|x| x == m);
            let lv = match earlier {
                Some(j) => levels[j].clone(),
                None => {
                    let n = format!("{name}_{i}");
                    let (pn, sn) = (format!("{n}_poset"), format!("{n}_sweet"));
                    self.insert(Decl::Poset(PosetDecl::from_poset(pn.clone(), m.poset())));
                    self.insert(Decl::Sweet(SweetDecl::from_model(sn.clone(), pn.clone(), m)));
                    TowerLevel { poset: pn, sweet: sn }
                }
            };
            levels.push(lv);
        }
        self.insert(Decl::Tower(TowerDecl { name: name.into(), levels }));
    }

    pub fn poset(&self, name: &str) -> Result<&Poset, ResolveError> {
        match self.get(name) {
            Some(Decl::Poset(p)) => Ok(&p.poset),
            _ => Err(ResolveError::Missing {
                kind: "poset",
                name: name.into(),
            }),
        }
    }

    fn map_decl(&self, name: &str) -> Result<&MapDecl, ResolveError> {
        match self.get(name) {
            Some(Decl::Map(m)) => Ok(m),
            _ => Err(ResolveError::Missing {
                kind: "map",
                name: name.into(),
            }),
        }
    }

    /// The map as an order embedding; whether it is a complete suborder is
    /// left to the caller.
    pub fn inclusion(&self, name: &str) -> Result<PosetInclusion, ResolveError> {
        let m = self.map_decl(name)?;
        let src = self.poset(&m.source)?;
        let dst = self.poset(&m.target)?;
        let mut inj = vec![usize::MAX; src.len()];
        for (a, b) in &m.pairs {
            let (i, j) = match (src.index_of(a), dst.index_of(b)) {
                (Some(i), Some(j)) => (i, j),
                _ => {
                    return Err(ResolveError::Invalid {
                        name: name.into(),
                        reason: format!("unknown element in {a} -> {b}"),
                    })
                }
            };
            inj[i] = j;
        }
        if let Some(i) = inj.iter().position(|&j| j == usize::MAX) {
            return Err(ResolveError::Invalid {
                name: name.into(),
                reason: format!("{} is not mapped", src.label(i)),
            });
        }
        PosetInclusion::new(src.clone(), dst.clone(), inj).map_err(core_err(name))
    }

    pub fn sweet(&self, name: &str) -> Result<SweetModel, ResolveError> {
        let s = match self.get(name) {
            Some(Decl::Sweet(s)) => s,
            _ => {
                return Err(ResolveError::Missing {
                    kind: "sweet model",
                    name: name.into(),
                })
            }
        };
        let p = self.poset(&s.poset)?;
        let idx = |l: &String| {
            p.index_of(l).ok_or_else(|| ResolveError::Invalid {
                name: name.into(),
                reason: format!("{l} is not an element of {}", s.poset),
            })
        };
        let dense = s.dense.iter().map(idx).collect::<Result<Vec<_>, _>>()?;
        let classes = s
            .relations
            .iter()
            .map(|lv| lv.iter().map(|c| c.iter().map(idx).collect::<Result<Vec<_>, _>>()).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        SweetModel::new(p.clone(), dense, classes).map_err(core_err(name))
    }

    pub fn hechler(&self, name: &str) -> Result<HechlerParams, ResolveError> {
        match self.get(name) {
            Some(Decl::Hechler(h)) => HechlerParams::new(h.m, h.h).map_err(core_err(name)),
            _ => Err(ResolveError::Missing {
                kind: "hechler declaration",
                name: name.into(),
            }),
        }
    }

    /// Levels linked by label.
    pub fn tower(&self, name: &str) -> Result<Tower, ResolveError> {
        let t = match self.get(name) {
            Some(Decl::Tower(t)) => t,
            _ => {
                return Err(ResolveError::Missing {
                    kind: "tower",
                    name: name.into(),
                })
            }
        };
        let mut models = Vec::with_capacity(t.levels.len());
        for lv in &t.levels {
            let m = self.sweet(&lv.sweet)?;
            if m.poset() != self.poset(&lv.poset)? {
                return Err(ResolveError::Invalid {
                    name: name.into(),
                    reason: format!("sweet model {} is not based on {}", lv.sweet, lv.poset),
                });
            }
            models.push(m);
        }
        Tower::by_labels(models).map_err(core_err(name))
    }

    /// Both maps must be complete suborders out of the same poset `B`; the
    /// base algebra is `BA(B)` and each factor receives the atom images of
    /// its map.
    pub fn amalgam(&self, name: &str) -> Result<AmalgamInstance, ResolveError> {
        let a = match self.get(name) {
            Some(Decl::Amalgam(a)) => a,
            _ => {
                return Err(ResolveError::Missing {
                    kind: "amalgam",
                    name: name.into(),
                })
            }
        };
        let (l, r) = (self.map_decl(&a.left)?, self.map_decl(&a.right)?);
        if l.source != r.source {
            return Err(ResolveError::Invalid {
                name: name.into(),
                reason: format!("maps start at {} and {}", l.source, r.source),
            });
        }
        let f1 = self.inclusion(&a.left)?;
        let f2 = self.inclusion(&a.right)?;
        let base = regular_open_completion(f1.small()).map_err(core_err(name))?;
        let images = |inc: &PosetInclusion, map: &str| -> Result<Vec<AtomSet>, ResolveError> {
            if !check_complete_suborder(inc) {
                return Err(ResolveError::Invalid {
                    name: name.into(),
                    reason: format!("{map} is not a complete suborder"),
                });
            }
            let target = regular_open_completion(inc.large()).map_err(core_err(name))?;
            Ok(base
                .atom_generators()
                .into_iter()
                .map(|g| target.value(inc.image(g)))
                .collect())
        };
        let (i1, i2) = (images(&f1, &a.left)?, images(&f2, &a.right)?);
        amalgamate_posets(&base, f1.large(), f2.large(), &i1, &i2).map_err(core_err(name))
    }
}
