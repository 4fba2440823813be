//! Interactive one-shot classification of short task descriptions.
//!
//! Every category keeps its own hypothesis for `category(Sentence, Category)`.
//! A label that the current hypothesis does not cover triggers a learn run
//! with all stored examples of the category as positives and all other
//! stored examples, retargeted to the category, as negatives.

mod session_io;

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::bk::{example_store, tokenize, BkError, BkOptions, Snapshot};
use crate::mil::{entails, learn, verify, Hypothesis, LearnError, LearnTask, Metarule};
use crate::store::FactStore;
use crate::term::{is_constant_symbol, render_clause, Atom, Clause, Term};

pub use session_io::SessionIoError;

/// Predicate learned for every category.
pub const TARGET: &str = "category";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifierError {
    #[error("text has no words after tokenization")]
    EmptyText,
    #[error("`{0}` is not a valid category")]
    InvalidCategory(String),
    #[error(transparent)]
    Bk(#[from] BkError),
    #[error(transparent)]
    Learn(#[from] LearnError),
}

/// Source of example timestamps in milliseconds since the Unix epoch.
pub trait Clock: Send + Sync {
    fn now_ms(&self) -> i64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> i64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis() as i64)
    }
}

/// A clock that always reports the same instant.
#[derive(Debug, Clone, Copy)]
pub struct FixedClock(pub i64);

impl Clock for FixedClock {
    fn now_ms(&self) -> i64 {
        self.0
    }
}

/// Learner settings used for every category.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineDefaults {
    pub metarules: Vec<Metarule>,
    pub predicate_pool: Vec<String>,
    pub constant_pool: Vec<String>,
    pub max_clauses: usize,
    pub depth_limit: usize,
}

impl Default for EngineDefaults {
    fn default() -> Self {
        EngineDefaults {
            metarules: vec![Metarule::chain()],
            predicate_pool: vec!["contains".to_string(), "related_to".to_string()],
            constant_pool: Vec::new(),
            max_clauses: 2,
            depth_limit: 10,
        }
    }
}

impl EngineDefaults {
    pub fn task(&self, background: FactStore, positives: Vec<Atom>, negatives: Vec<Atom>) -> LearnTask {
        LearnTask::new(self.metarules.clone(), background, positives, negatives)
            .with_predicate_pool(self.predicate_pool.clone())
            .with_constant_pool(self.constant_pool.clone())
            .with_max_clauses(self.max_clauses)
            .with_depth_limit(self.depth_limit)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledExample {
    pub id: String,
    pub text: String,
    pub words: Vec<String>,
    pub category: String,
    pub timestamp: i64,
}

impl LabeledExample {
    /// `category(Words, c)`.
    pub fn atom_for(&self, category: &str) -> Atom {
        example_atom(&self.words, category)
    }
}

pub fn example_atom(words: &[String], category: &str) -> Atom {
    Atom::binary(TARGET, Term::WordList(words.to_vec()), Term::constant(category))
}

fn serialize_clauses<S: Serializer>(clauses: &[Clause], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(clauses.iter().map(render_clause))
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Prediction {
    pub categories: Vec<String>,
    #[serde(serialize_with = "serialize_clauses")]
    pub matched_rules: Vec<Clause>,
    /// The text had no words left after tokenization.
    pub empty_tokens: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct LearnOutcome {
    pub already_covered: bool,
    #[serde(serialize_with = "serialize_hypothesis")]
    pub new_hypothesis: Option<Hypothesis>,
    pub failure_reason: Option<String>,
}

fn serialize_hypothesis<S: Serializer>(h: &Option<Hypothesis>, s: S) -> Result<S::Ok, S::Error> {
    match h {
        Some(h) => serialize_clauses(&h.program(), s),
        None => s.serialize_none(),
    }
}

/// Rules added to and removed from one category's hypothesis.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
pub struct RuleDelta {
    pub added: Vec<String>,
    pub removed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct InteractionRecord {
    pub text: String,
    pub prediction: Vec<String>,
    pub label: String,
    pub delta: RuleDelta,
    pub already_covered: bool,
    pub failure_reason: Option<String>,
    /// Categories that already hold an example with the same words.
    pub conflicts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    pub examples: Vec<LabeledExample>,
    pub hypotheses: BTreeMap<String, Hypothesis>,
    pub snapshot: Snapshot,
    /// Where the snapshot was loaded from. Sessions without one embed it.
    pub snapshot_path: Option<String>,
    pub options: BkOptions,
    pub engine: EngineDefaults,
    pub history: Vec<InteractionRecord>,
}

impl SessionState {
    pub fn new(snapshot: Snapshot, options: BkOptions, engine: EngineDefaults) -> Self {
        SessionState {
            examples: Vec::new(),
            hypotheses: BTreeMap::new(),
            snapshot,
            snapshot_path: None,
            options,
            engine,
            history: Vec::new(),
        }
    }

    /// Categories with at least one example or hypothesis, sorted.
    pub fn categories(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .examples
            .iter()
            .map(|e| e.category.clone())
            .chain(self.hypotheses.keys().cloned())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Background knowledge for one sentence: its words' edges plus the edges
    /// of every known category.
    pub fn sentence_store(&self, words: &[String], extra_category: Option<&str>) -> Result<FactStore, BkError> {
        let mut categories = self.categories();
        if let Some(c) = extra_category {
            if !categories.iter().any(|x| x == c) {
                categories.push(c.to_string());
            }
        }
        example_store(words, &categories, &self.snapshot, &self.options)
    }

    /// Categories whose hypothesis entails the text, with the target rules
    /// that fired. Never mutates the session.
    pub fn predict(&self, text: &str) -> Result<Prediction, ClassifierError> {
        let words = tokenize(text);
        if words.is_empty() {
            return Ok(Prediction {
                empty_tokens: true,
                ..Prediction::default()
            });
        }
        let store = self.sentence_store(&words, None)?;
        let mut out = Prediction::default();
        for (category, h) in &self.hypotheses {
            let goal = example_atom(&words, category);
            let fired = matched_rules(h, &store, &goal, self.engine.depth_limit);
            if !fired.is_empty() {
                out.categories.push(category.clone());
                out.matched_rules.extend(fired);
            }
        }
        Ok(out)
    }

    /// Stores a labelled example and learns for its category if needed.
    pub fn label(&mut self, text: &str, category: &str, clock: &dyn Clock) -> Result<LearnOutcome, ClassifierError> {
        let category = category.trim().to_ascii_lowercase();
        if !is_constant_symbol(&category) {
            return Err(ClassifierError::InvalidCategory(category));
        }
        let words = tokenize(text);
        if words.is_empty() {
            return Err(ClassifierError::EmptyText);
        }
        let prediction = self.predict(text)?.categories;
        let conflicts: Vec<String> = self
            .examples
            .iter()
            .filter(|e| e.words == words && e.category != category)
            .map(|e| e.category.clone())
            .collect();
        let covered = match self.hypotheses.get(&category) {
            Some(h) => {
                let store = self.sentence_store(&words, Some(&category))?;
                entails(&h.program(), &store, &example_atom(&words, &category), self.engine.depth_limit)
            }
            None => false,
        };

        self.examples.push(LabeledExample {
            id: format!("e{}", self.examples.len() + 1),
            text: text.to_string(),
            words,
            category: category.clone(),
            timestamp: clock.now_ms(),
        });

        let mut outcome = LearnOutcome {
            already_covered: covered,
            ..LearnOutcome::default()
        };
        let mut delta = RuleDelta::default();
        if !covered {
            let task = self.learn_task(&category)?;
            match learn(&task)? {
                Some(h) if verify(&h, &task).accepted() => {
                    delta = rule_delta(self.hypotheses.get(&category), &h);
                    self.hypotheses.insert(category.clone(), h.clone());
                    outcome.new_hypothesis = Some(h);
                }
                Some(_) => outcome.failure_reason = Some("learned program failed verification".to_string()),
                None => {
                    outcome.failure_reason = Some(format!(
                        "no hypothesis with at most {} clauses covers the {} examples of `{category}` without covering another category",
                        task.max_clauses,
                        task.positives.len()
                    ))
                }
            }
        }
        self.history.push(InteractionRecord {
            text: text.to_string(),
            prediction,
            label: category,
            delta,
            already_covered: outcome.already_covered,
            failure_reason: outcome.failure_reason.clone(),
            conflicts,
        });
        Ok(outcome)
    }

    /// The learning problem for `category` over all stored examples. An
    /// example of another category with the same words as a positive is left
    /// out of the negatives.
    pub fn learn_task(&self, category: &str) -> Result<LearnTask, ClassifierError> {
        let positives: Vec<Atom> = self
            .examples
            .iter()
            .filter(|e| e.category == category)
            .map(|e| e.atom_for(category))
            .collect();
        let mut negatives: Vec<Atom> = Vec::new();
        for e in self.examples.iter().filter(|e| e.category != category) {
            let a = e.atom_for(category);
            if !positives.contains(&a) && !negatives.contains(&a) {
                negatives.push(a);
            }
        }
        let mut categories = self.categories();
        if !categories.iter().any(|c| c == category) {
            categories.push(category.to_string());
        }
        let mut store = FactStore::new();
        for e in &self.examples {
            let part = example_store(&e.words, &categories, &self.snapshot, &self.options)?;
            store.extend_from(&part).expect("stores share arities");
        }
        Ok(self.engine.task(store, positives, negatives))
    }

    /// Drops examples, hypotheses and history; keeps snapshot and settings.
    pub fn reset(&mut self) {
        self.examples.clear();
        self.hypotheses.clear();
        self.history.clear();
    }
}

/// Target clauses of `h` that prove `goal` together with the invented
/// predicates' clauses.
fn matched_rules(h: &Hypothesis, store: &FactStore, goal: &Atom, depth_limit: usize) -> Vec<Clause> {
    let program = h.program();
    let (target, support): (Vec<&Clause>, Vec<&Clause>) =
        program.iter().partition(|c| c.head.predicate == goal.predicate);
    target
        .into_iter()
        .filter(|clause| {
            let mut p: Vec<Clause> = vec![(*clause).clone()];
            p.extend(support.iter().map(|c| (*c).clone()));
            entails(&p, store, goal, depth_limit)
        })
        .cloned()
        .collect()
}

fn rule_delta(old: Option<&Hypothesis>, new: &Hypothesis) -> RuleDelta {
    let old: Vec<String> = old.map_or_else(Vec::new, |h| h.program().iter().map(render_clause).collect());
    let new: Vec<String> = new.program().iter().map(render_clause).collect();
    RuleDelta {
        added: new.iter().filter(|r| !old.contains(r)).cloned().collect(),
        removed: old.iter().filter(|r| !new.contains(r)).cloned().collect(),
    }
}
