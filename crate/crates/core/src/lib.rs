//! Meta-interpretive learning and one-shot text classification over
//! commonsense background knowledge.

pub mod bk;
pub mod classifier;
pub mod eval;
pub mod mil;
pub mod store;
pub mod term;

pub use bk::{BkOptions, KnowledgeEdge, Snapshot};
pub use classifier::{EngineDefaults, LearnOutcome, Prediction, SessionState};
pub use mil::{
    brute_force_learn, entails, learn, verify, Hypothesis, HypothesisClause, LearnTask, Metarule,
    VerificationReport,
};
pub use store::FactStore;
pub use term::{parse_program, render, Atom, Clause, Substitution, Term};
