//! The `.lfoc` text format: parsing into a resolved [`Document`], printing
//! back to canonical text, and the JSON result encoding.
//!
//! A document starts with `base set;` or `base graph;` and then declares, in
//! dependency order, objects, morphisms, footprints, expressions, structures,
//! sketches, rules, and registries. Each kind of declaration has its own
//! namespace.

use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::cat::{CatObject, Kind, Morphism};
use crate::error::Error;
use crate::expr::Expr;
use crate::footprint::{Bounds, Footprint, Registry, Structure};
use crate::rules::SketchRule;
use crate::sketch::Sketch;

pub mod json;
mod lexer;
mod parser;
mod printer;

pub use parser::{parse, parse_file, parse_morphism};
pub use printer::print;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Lex,
    Syntax,
    Resolve,
    Io,
}

/// A located error from reading a document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceError {
    pub kind: ErrorKind,
    pub file: Option<String>,
    pub line: usize,
    pub column: usize,
    pub token: String,
    pub message: String,
}

impl SurfaceError {
    pub(crate) fn lex(line: usize, column: usize, token: &str, message: &str) -> Self {
        SurfaceError {
            kind: ErrorKind::Lex,
            file: None,
            line,
            column,
            token: token.to_string(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for SurfaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}:")?;
        }
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.token.is_empty() {
            write!(f, " (at `{}`)", self.token)?;
        }
        Ok(())
    }
}

impl std::error::Error for SurfaceError {}

/// An object as written: by name or as a literal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjRef {
    pub name: Option<String>,
    pub object: Arc<CatObject>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleDef {
    Explicit {
        lhs: String,
        rhs: String,
        /// `None` when the rule is read along the inclusion of contexts.
        via: Option<Morphism>,
    },
    Unfold(String, String),
    Fold(String, String),
    ModusPonens(String),
    Intro(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegistryDef {
    Explicit(Vec<String>),
    Bounded { bounds: Bounds, iso: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Object {
        name: String,
        object: Arc<CatObject>,
    },
    Morphism {
        name: String,
        dom: ObjRef,
        cod: ObjRef,
        morphism: Morphism,
    },
    Footprint {
        name: String,
        features: Vec<(String, ObjRef)>,
        footprint: Arc<Footprint>,
    },
    Expr {
        name: String,
        footprint: String,
        arity: ObjRef,
        expr: Expr,
    },
    Structure {
        name: String,
        footprint: String,
        carrier: ObjRef,
        structure: Arc<Structure>,
    },
    Sketch {
        name: String,
        footprint: String,
        context: ObjRef,
        /// Expression name and binding of each constraint, as written.
        constraints: Vec<(String, Morphism)>,
        sketch: Sketch,
    },
    Rule {
        name: String,
        footprint: String,
        def: RuleDef,
        rule: SketchRule,
    },
    Registry {
        name: String,
        footprint: String,
        def: RegistryDef,
    },
}

/// Everything a document can refer to by name, including imported names.
#[derive(Clone, Debug, Default)]
pub struct Env {
    pub objects: IndexMap<String, Arc<CatObject>>,
    pub morphisms: IndexMap<String, Morphism>,
    pub footprints: IndexMap<String, Arc<Footprint>>,
    pub exprs: IndexMap<String, (String, Expr)>,
    pub structures: IndexMap<String, (String, Arc<Structure>)>,
    pub sketches: IndexMap<String, (String, Sketch)>,
    pub rules: IndexMap<String, (String, SketchRule)>,
    pub registries: IndexMap<String, (String, RegistryDef)>,
}

#[derive(Clone, Debug)]
pub struct Document {
    pub base: Kind,
    pub imports: Vec<String>,
    pub items: Vec<Item>,
    pub env: Env,
}

/// Documents are equal when they declare the same things; the environment
/// is derived from the declarations and imports.
impl PartialEq for Document {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.imports == other.imports && self.items == other.items
    }
}

impl Document {
    pub fn footprint(&self, name: &str) -> Option<&Arc<Footprint>> {
        self.env.footprints.get(name)
    }

    pub fn object(&self, name: &str) -> Option<&Arc<CatObject>> {
        self.env.objects.get(name)
    }

    pub fn morphism(&self, name: &str) -> Option<&Morphism> {
        self.env.morphisms.get(name)
    }

    pub fn expr(&self, name: &str) -> Option<&Expr> {
        self.env.exprs.get(name).map(|(_, e)| e)
    }

    pub fn structure(&self, name: &str) -> Option<&Arc<Structure>> {
        self.env.structures.get(name).map(|(_, s)| s)
    }

    pub fn sketch(&self, name: &str) -> Option<&Sketch> {
        self.env.sketches.get(name).map(|(_, s)| s)
    }

    pub fn rule(&self, name: &str) -> Option<&SketchRule> {
        self.env.rules.get(name).map(|(_, r)| r)
    }

    /// Footprint name recorded for a named expression, structure, sketch,
    /// rule, or registry.
    pub fn footprint_of(&self, name: &str) -> Option<&str> {
        let env = &self.env;
        env.exprs
            .get(name)
            .map(|(f, _)| f)
            .or_else(|| env.structures.get(name).map(|(f, _)| f))
            .or_else(|| env.sketches.get(name).map(|(f, _)| f))
            .or_else(|| env.rules.get(name).map(|(f, _)| f))
            .or_else(|| env.registries.get(name).map(|(f, _)| f))
            .map(String::as_str)
    }

    /// Builds a declared registry, enumerating bounded ones.
    pub fn registry(&self, name: &str) -> Option<Result<Registry, Error>> {
        let (fp, def) = self.env.registries.get(name)?;
        let footprint = self.env.footprints.get(fp)?.clone();
        Some(match def {
            RegistryDef::Bounded { bounds, iso } => Registry::bounded(&footprint, *bounds, *iso),
            RegistryDef::Explicit(names) => {
                let structures = names
                    .iter()
                    .map(|n| (*self.env.structures[n].1).clone())
                    .collect();
                Registry::explicit(name, footprint, structures)
            }
        })
    }

    /// All structures declared in this document (not imported ones).
    pub fn declared_structures(&self) -> impl Iterator<Item = &Arc<Structure>> {
        self.items.iter().filter_map(|i| match i {
            Item::Structure { structure, .. } => Some(structure),
            _ => None,
        })
    }
}
