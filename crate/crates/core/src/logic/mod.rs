//! Finite geometric logic over relational signatures with constants, and the
//! topological groupoids of indexed models it induces.

mod groupoid;
mod model;
mod syntax;

pub use groupoid::*;
pub use model::*;
pub use syntax::*;

use thiserror::Error;

pub type SortId = usize;
pub type Element = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("parse error at {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("sort error at {pos}: {message}")]
    Sort { pos: usize, message: String },
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("malformed signature: {0}")]
    Signature(String),
    #[error("malformed model {model}: {message}")]
    Model { model: String, message: String },
    #[error("malformed model groupoid: {0}")]
    Groupoid(String),
    #[error("definable sheaf fails the sheaf axioms at this depth: {0}")]
    NotASheaf(String),
}

/// Sorts, relation symbols with their argument sorts, and constant symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    sorts: Vec<String>,
    relations: Vec<(String, Vec<SortId>)>,
    constants: Vec<(String, SortId)>,
}

impl Signature {
    pub fn new(
        sorts: Vec<String>,
        relations: Vec<(String, Vec<SortId>)>,
        constants: Vec<(String, SortId)>,
    ) -> Result<Self, LogicError> {
        let bad = |m: String| Err(LogicError::Signature(m));
        let mut names: Vec<&str> = relations.iter().map(|r| r.0.as_str()).collect();
        names.extend(constants.iter().map(|c| c.0.as_str()));
        for (i, n) in names.iter().enumerate() {
            if !is_ident(n) || KEYWORDS.contains(n) {
                return bad(format!("{n:?} is not a usable symbol name"));
            }
            if names[..i].contains(n) {
                return bad(format!("symbol {n} declared twice"));
            }
        }
        for (i, s) in sorts.iter().enumerate() {
            if !is_ident(s) || sorts[..i].contains(s) {
                return bad(format!("bad or repeated sort {s:?}"));
            }
        }
        for (r, arity) in &relations {
            if arity.iter().any(|&s| s >= sorts.len()) {
                return bad(format!("relation {r} uses an undeclared sort"));
            }
        }
        for (c, s) in &constants {
            if *s >= sorts.len() {
                return bad(format!("constant {c} has an undeclared sort"));
            }
        }
        Ok(Signature { sorts, relations, constants })
    }

    /// One sort and the given relation symbols.
    pub fn single_sorted(relations: &[(&str, usize)]) -> Self {
        Self::new(
            vec!["S".into()],
            relations.iter().map(|(r, n)| (r.to_string(), vec![0; *n])).collect(),
            vec![],
        )
        .expect("single-sorted signature")
    }

    pub fn sorts(&self) -> &[String] {
        &self.sorts
    }

    pub fn relations(&self) -> &[(String, Vec<SortId>)] {
        &self.relations
    }

    pub fn constants(&self) -> &[(String, SortId)] {
        &self.constants
    }

    pub fn sort(&self, name: &str) -> Option<SortId> {
        self.sorts.iter().position(|s| s == name)
    }

    pub fn relation(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.0 == name)
    }

    pub fn constant(&self, name: &str) -> Option<usize> {
        self.constants.iter().position(|c| c.0 == name)
    }
}

pub(crate) const KEYWORDS: [&str; 3] = ["T", "F", "exists"];

pub(crate) fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}
