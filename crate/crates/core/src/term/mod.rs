//! Datalog term language: terms, atoms, clauses and substitutions.
//!
//! Terms are flat. A constant is a lowercase symbol, a variable an uppercase
//! name, and a word list (`[call,mother]`) is a ground list of constants used
//! to represent a tokenized sentence. There are no other function symbols.

mod parse;
mod render;
mod unify;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use parse::{
    parse_atom, parse_program, parse_rule_file, ParseError, RawArg, RawAtom, RawMetarule, RawName,
    RuleFile,
};
pub use render::{canonical_string, render, render_clause};
pub use unify::{unify, unify_terms};

/// True when `s` matches `[a-z][a-z0-9_]*`.
pub fn is_constant_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// True when `s` matches `[A-Z][A-Za-z0-9_]*`.
pub fn is_variable_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
    /// A tokenized sentence. Always ground.
    WordList(Vec<String>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(symbol: impl Into<String>) -> Self {
        Term::Const(symbol.into())
    }

    pub fn words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Term::WordList(words.into_iter().map(Into::into).collect())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_ground(&self) -> bool {
        !self.is_var()
    }

    /// Whether `var` occurs in this term. Word lists are ground, so this only
    /// holds for the variable itself.
    pub fn mentions(&self, var: &str) -> bool {
        matches!(self, Term::Var(v) if v == var)
    }

    /// Checks the symbol grammar of constants, variables and list elements.
    pub fn is_well_formed(&self) -> bool {
        match self {
            Term::Var(v) => is_variable_name(v),
            Term::Const(c) => is_constant_symbol(c),
            Term::WordList(ws) => ws.iter().all(|w| is_constant_symbol(w)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => f.write_str(c),
            Term::WordList(ws) => write!(f, "[{}]", ws.join(",")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    /// Convenience for the common binary ground case, e.g. `related_to(mother, family)`.
    pub fn binary(predicate: &str, a: Term, b: Term) -> Self {
        Atom::new(predicate, vec![a, b])
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            _ => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, arg) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{arg}")?;
        }
        f.write_str(")")
    }
}

/// A definite clause. An empty body makes it a fact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn new(head: Atom, body: Vec<Atom>) -> Self {
        Clause { head, body }
    }

    pub fn fact(head: Atom) -> Self {
        Clause {
            head,
            body: Vec::new(),
        }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        self.head.is_ground() && self.body.iter().all(Atom::is_ground)
    }

    /// Variables in first-occurrence order, head first, then body left to right.
    pub fn variables(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for atom in std::iter::once(&self.head).chain(self.body.iter()) {
            for v in atom.variables() {
                if seen.insert(v) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// Datalog safety: every head variable also occurs in the body.
    pub fn is_range_restricted(&self) -> bool {
        let body_vars: BTreeSet<&str> = self.body.iter().flat_map(Atom::variables).collect();
        self.head.variables().all(|v| body_vars.contains(v))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_clause(self))
    }
}

/// Variable bindings. Kept fully resolved, so applying twice equals applying once.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.bindings.iter()
    }

    /// Adds `var ↦ term`, rewriting existing bindings to keep the map resolved.
    /// Returns false (and leaves the map untouched) on an occurs-check failure.
    pub fn bind(&mut self, var: &str, term: Term) -> bool {
        let term = self.apply_term(&term);
        if term == Term::Var(var.to_string()) {
            return true;
        }
        if term.mentions(var) {
            return false;
        }
        for value in self.bindings.values_mut() {
            if value.mentions(var) {
                *value = term.clone();
            }
        }
        self.bindings.insert(var.to_string(), term);
        true
    }

    pub fn apply_term(&self, term: &Term) -> Term {
        match term {
            Term::Var(v) => self.bindings.get(v).cloned().unwrap_or_else(|| term.clone()),
            _ => term.clone(),
        }
    }

    pub fn apply_atom(&self, atom: &Atom) -> Atom {
        Atom {
            predicate: atom.predicate.clone(),
            args: atom.args.iter().map(|t| self.apply_term(t)).collect(),
        }
    }

    pub fn apply_clause(&self, clause: &Clause) -> Clause {
        Clause {
            head: self.apply_atom(&clause.head),
            body: clause.body.iter().map(|a| self.apply_atom(a)).collect(),
        }
    }
}

impl FromIterator<(String, Term)> for Substitution {
    fn from_iter<T: IntoIterator<Item = (String, Term)>>(iter: T) -> Self {
        let mut s = Substitution::new();
        for (v, t) in iter {
            s.bind(&v, t);
        }
        s
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} ↦ {t}")?;
        }
        f.write_str("}")
    }
}
