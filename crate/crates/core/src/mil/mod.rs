//! Meta-interpretive learning: entailment, metarules and hypothesis search.

mod compiled;
pub mod learn;
pub mod metarule;
pub mod oracle;
pub mod prove;
pub mod verify;

pub use learn::{invent_symbol, learn, Hypothesis, LearnError, LearnTask, DEFAULT_DEPTH_LIMIT, DEFAULT_MAX_CLAUSES};
pub use metarule::{canonicalize, HypothesisClause, MetaArg, MetaAtom, Metarule, MetaruleError, PredSlot};
pub use oracle::{brute_force_learn, search_space, OracleError};
pub use prove::{entailment, entails, Entailment, Prover};
pub use verify::{verify, VerificationReport};
