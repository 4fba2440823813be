//! Background knowledge from text and a commonsense graph.

mod build;
mod fetch;
mod snapshot;
mod tokenize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::is_constant_symbol;

pub use build::{build_bk, example_store, BkBuild, Sentence};
pub use fetch::{
    fetch_many, fetch_related, parse_response, query_url, FetchError, FetchPolicy, FetchReport, HttpResponse,
    RetryPolicy, Transport, TransportError,
};
pub use snapshot::{Snapshot, SnapshotError};
pub(crate) use snapshot::write_atomic;
pub use tokenize::{contains_facts, is_stop_word, normalize_symbol, tokenize, STOP_WORDS};

/// The only relation kept from the graph.
pub const RELATED_TO: &str = "related_to";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BkError {
    #[error("sentence has no words after tokenization")]
    EmptySentence,
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error("invalid edge: {0}")]
    InvalidEdge(String),
}

/// A weighted `related_to` edge between two symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeEdge {
    pub head: String,
    pub relation: String,
    pub tail: String,
    pub weight: f64,
}

impl KnowledgeEdge {
    pub fn related(head: &str, tail: &str, weight: f64) -> Result<Self, BkError> {
        if !is_constant_symbol(head) || !is_constant_symbol(tail) {
            return Err(BkError::InvalidEdge(format!("{head} -> {tail}: not a symbol")));
        }
        if head == tail {
            return Err(BkError::InvalidEdge(format!("self loop on {head}")));
        }
        if !weight.is_finite() || weight < 0.0 {
            return Err(BkError::InvalidEdge(format!("{head} -> {tail}: weight {weight}")));
        }
        Ok(KnowledgeEdge {
            head: head.to_string(),
            relation: RELATED_TO.to_string(),
            tail: tail.to_string(),
            weight,
        })
    }
}

/// How much of the graph goes into background knowledge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BkOptions {
    pub max_related_per_word: usize,
    pub min_weight: f64,
    /// 1: edges of the sentence words; 2: also edges of their neighbours.
    pub hops: u8,
    /// One store per example instead of one shared store.
    pub split_per_example: bool,
}

impl Default for BkOptions {
    fn default() -> Self {
        BkOptions {
            max_related_per_word: 20,
            min_weight: 1.0,
            hops: 1,
            split_per_example: false,
        }
    }
}

impl BkOptions {
    pub fn new(
        max_related_per_word: usize,
        min_weight: f64,
        hops: u8,
        split_per_example: bool,
    ) -> Result<Self, BkError> {
        let o = BkOptions {
            max_related_per_word,
            min_weight,
            hops,
            split_per_example,
        };
        o.validate()?;
        Ok(o)
    }

    /// Defaults for batch evaluation: per-example stores.
    pub fn evaluation() -> Self {
        BkOptions {
            split_per_example: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), BkError> {
        if self.max_related_per_word == 0 {
            return Err(BkError::InvalidOption("max_related_per_word must be positive".into()));
        }
        if !self.min_weight.is_finite() || self.min_weight < 0.0 {
            return Err(BkError::InvalidOption(format!("min_weight {} is negative", self.min_weight)));
        }
        if !(1..=2).contains(&self.hops) {
            return Err(BkError::InvalidOption(format!("hops must be 1 or 2, got {}", self.hops)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_invariants() {
        assert!(KnowledgeEdge::related("mother", "family", 2.0).is_ok());
        assert!(KnowledgeEdge::related("mother", "mother", 2.0).is_err());
        assert!(KnowledgeEdge::related("mother", "family", -1.0).is_err());
        assert!(KnowledgeEdge::related("Mother", "family", 1.0).is_err());
    }

    #[test]
    fn option_ranges() {
        assert!(BkOptions::new(20, 1.0, 1, true).is_ok());
        assert!(BkOptions::new(0, 1.0, 1, true).is_err());
        assert!(BkOptions::new(5, -0.5, 1, true).is_err());
        assert!(BkOptions::new(5, 1.0, 3, true).is_err());
        assert!(BkOptions::evaluation().split_per_example);
        assert!(!BkOptions::default().split_per_example);
    }
}
