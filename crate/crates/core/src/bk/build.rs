//! Background knowledge for a batch of sentences.

use std::collections::BTreeMap;

use crate::store::FactStore;
use crate::term::{Atom, Term};

use super::{contains_facts, BkError, BkOptions, Snapshot, RELATED_TO};

/// A tokenized example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub id: String,
    pub words: Vec<String>,
}

impl Sentence {
    pub fn new(id: impl Into<String>, words: Vec<String>) -> Self {
        Sentence { id: id.into(), words }
    }
}

/// Output of [`build_bk`].
#[derive(Debug, Clone, PartialEq)]
pub enum BkBuild {
    Shared { store: FactStore, missing_words: usize },
    Split { stores: BTreeMap<String, FactStore>, missing_words: usize },
}

impl BkBuild {
    /// Number of distinct words the snapshot knew nothing about.
    pub fn missing_words(&self) -> usize {
        match self {
            BkBuild::Shared { missing_words, .. } | BkBuild::Split { missing_words, .. } => *missing_words,
        }
    }
}

fn related_pair(store: &mut FactStore, a: &str, b: &str) {
    for (x, y) in [(a, b), (b, a)] {
        store
            .insert(Atom::binary(RELATED_TO, Term::constant(x), Term::constant(y)))
            .expect("related_to facts are binary and ground");
    }
}

fn add_word_edges(store: &mut FactStore, word: &str, snapshot: &Snapshot, options: &BkOptions) {
    for n in snapshot.related(word, options) {
        related_pair(store, word, n);
    }
    if options.hops == 2 {
        for n in snapshot.related(word, options) {
            for m in snapshot.related(n, options) {
                related_pair(store, n, m);
            }
        }
    }
}

/// Facts for one sentence: its `contains` facts, `related_to` facts in both
/// directions for its words, then the category labels' own edges.
pub fn example_store(
    words: &[String],
    categories: &[String],
    snapshot: &Snapshot,
    options: &BkOptions,
) -> Result<FactStore, BkError> {
    let mut store = FactStore::from_clauses(contains_facts(words)?).expect("contains facts are well formed");
    for (i, w) in words.iter().enumerate() {
        if !words[..i].contains(w) {
            add_word_edges(&mut store, w, snapshot, options);
        }
    }
    for c in categories {
        add_word_edges(&mut store, c, snapshot, options);
    }
    Ok(store)
}

/// Builds one shared store, or one store per sentence in split mode. The
/// shared store is the union of the per-sentence stores in input order.
pub fn build_bk(
    sentences: &[Sentence],
    categories: &[String],
    snapshot: &Snapshot,
    options: &BkOptions,
) -> Result<BkBuild, BkError> {
    options.validate()?;
    let mut missing: Vec<&str> = Vec::new();
    for s in sentences {
        for w in &s.words {
            if !snapshot.knows(w) && !missing.contains(&w.as_str()) {
                missing.push(w);
            }
        }
    }
    if !missing.is_empty() {
        log::warn!("{} words have no snapshot entry", missing.len());
    }
    let missing_words = missing.len();
    if options.split_per_example {
        let mut stores = BTreeMap::new();
        for s in sentences {
            stores.insert(s.id.clone(), example_store(&s.words, categories, snapshot, options)?);
        }
        Ok(BkBuild::Split { stores, missing_words })
    } else {
        let mut store = FactStore::new();
        for s in sentences {
            let part = example_store(&s.words, categories, snapshot, options)?;
            store.extend_from(&part).expect("stores share arities");
        }
        Ok(BkBuild::Shared { store, missing_words })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bk::KnowledgeEdge;

    fn words(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn snapshot(edges: &[(&str, &str)]) -> Snapshot {
        let mut s = Snapshot::new("test");
        for (a, b) in edges {
            s.insert(KnowledgeEdge::related(a, b, 1.0).unwrap()).unwrap();
        }
        s
    }

    #[test]
    fn one_sentence_store() {
        let snap = snapshot(&[("mother", "family")]);
        let sentences = [Sentence::new("1", words(&["call", "mother"]))];
        let BkBuild::Shared { store, missing_words } =
            build_bk(&sentences, &words(&["family"]), &snap, &BkOptions::default()).unwrap()
        else {
            panic!("expected a shared store");
        };
        assert_eq!(
            store.render(),
            "contains([call,mother], call).\ncontains([call,mother], mother).\n\
             related_to(mother, family).\nrelated_to(family, mother).\n"
        );
        assert_eq!(missing_words, 1);
    }

    #[test]
    fn split_stores_are_isolated() {
        let snap = snapshot(&[("mother", "family"), ("swim", "sport")]);
        let sentences = [
            Sentence::new("a", words(&["call", "mother"])),
            Sentence::new("b", words(&["swim", "lesson"])),
        ];
        let BkBuild::Split { stores, .. } =
            build_bk(&sentences, &[], &snap, &BkOptions::evaluation()).unwrap()
        else {
            panic!("expected split stores");
        };
        assert_eq!(stores.len(), 2);
        let first = stores["a"].render();
        for w in ["swim", "lesson", "sport"] {
            assert!(!first.contains(w), "{first}");
        }
    }

    #[test]
    fn two_hops() {
        let snap = snapshot(&[("mother", "family"), ("family", "home")]);
        let one = example_store(&words(&["mother"]), &[], &snap, &BkOptions::default()).unwrap();
        let two = example_store(
            &words(&["mother"]),
            &[],
            &snap,
            &BkOptions {
                hops: 2,
                ..BkOptions::default()
            },
        )
        .unwrap();
        assert!(!one.render().contains("home"));
        assert!(two.render().contains("related_to(family, home)."));
    }

    #[test]
    fn empty_input() {
        let b = build_bk(&[], &[], &Snapshot::new("t"), &BkOptions::default()).unwrap();
        assert_eq!(
            b,
            BkBuild::Shared {
                store: FactStore::new(),
                missing_words: 0
            }
        );
    }
}
