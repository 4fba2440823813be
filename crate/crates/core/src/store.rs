//! Ground background knowledge.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::term::{parse_program, render_clause, Atom, Clause, ParseError, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("background fact `{0}` is not ground")]
    NotGround(String),
    #[error("arity conflict for `{predicate}`: store has {expected}, fact has {found}")]
    ArityConflict {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("background knowledge must be facts, found rule `{0}`")]
    NotAFact(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// An insertion-ordered, duplicate-free set of ground facts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactStore {
    facts: Vec<Atom>,
    seen: HashSet<Atom>,
    arities: HashMap<String, usize>,
}

impl FactStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a fact. Returns `Ok(false)` if it was already present.
    pub fn insert(&mut self, fact: Atom) -> Result<bool, StoreError> {
        if !fact.is_ground() {
            return Err(StoreError::NotGround(fact.to_string()));
        }
        match self.arities.get(&fact.predicate) {
            Some(&n) if n != fact.arity() => {
                return Err(StoreError::ArityConflict {
                    predicate: fact.predicate.clone(),
                    expected: n,
                    found: fact.arity(),
                })
            }
            Some(_) => {}
            None => {
                self.arities.insert(fact.predicate.clone(), fact.arity());
            }
        }
        if self.seen.contains(&fact) {
            return Ok(false);
        }
        self.seen.insert(fact.clone());
        self.facts.push(fact);
        Ok(true)
    }

    pub fn from_facts<I: IntoIterator<Item = Atom>>(facts: I) -> Result<Self, StoreError> {
        let mut store = FactStore::new();
        for f in facts {
            store.insert(f)?;
        }
        Ok(store)
    }

    pub fn from_clauses<I: IntoIterator<Item = Clause>>(clauses: I) -> Result<Self, StoreError> {
        let mut store = FactStore::new();
        for c in clauses {
            if !c.is_fact() {
                return Err(StoreError::NotAFact(render_clause(&c)));
            }
            store.insert(c.head)?;
        }
        Ok(store)
    }

    /// Parses a `.facts` text.
    pub fn parse(text: &str) -> Result<Self, StoreError> {
        Self::from_clauses(parse_program(text)?)
    }

    /// Adds every fact of `other`, keeping this store's order first.
    pub fn extend_from(&mut self, other: &FactStore) -> Result<(), StoreError> {
        for f in &other.facts {
            self.insert(f.clone())?;
        }
        Ok(())
    }

    pub fn contains(&self, fact: &Atom) -> bool {
        self.seen.contains(fact)
    }

    pub fn facts(&self) -> &[Atom] {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn arity_of(&self, predicate: &str) -> Option<usize> {
        self.arities.get(predicate).copied()
    }

    /// Predicate symbols in order of first appearance.
    pub fn predicates(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.facts
            .iter()
            .filter(|f| seen.insert(f.predicate.as_str()))
            .map(|f| f.predicate.clone())
            .collect()
    }

    /// Second arguments of `related_to(word, _)` facts, in store order.
    pub fn related(&self, word: &str) -> Vec<&str> {
        self.facts
            .iter()
            .filter(|f| f.predicate == "related_to" && f.args.first() == Some(&Term::constant(word)))
            .filter_map(|f| match f.args.get(1) {
                Some(Term::Const(c)) => Some(c.as_str()),
                _ => None,
            })
            .collect()
    }

    /// One fact per line in insertion order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for f in &self.facts {
            out.push_str(&render_clause(&Clause::fact(f.clone())));
            out.push('\n');
        }
        out
    }
}
