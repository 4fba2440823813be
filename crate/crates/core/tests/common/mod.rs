#![allow(dead_code)]

use std::path::PathBuf;

use mgl_core::mil::{HypothesisClause, Prover};
use mgl_core::{Atom, FactStore, LearnTask, Metarule, Term};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn atom(text: &str) -> Atom {
    mgl_core::term::parse_atom(text).unwrap()
}

pub fn atoms(texts: &[&str]) -> Vec<Atom> {
    texts.iter().map(|t| atom(t)).collect()
}

const PREDICATES: [&str; 6] = ["p", "q", "r", "s", "u", "v"];
const CONSTANTS: [&str; 4] = ["a", "b", "c", "d"];

/// A small seeded learning task with binary predicates over four constants.
///
/// About half the tasks take their examples from a hidden program built from
/// the task's own metarules, so a good share of them is learnable.
pub fn random_task(seed: u64) -> LearnTask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_clauses = *[1usize, 2, 2, 3].choose(&mut rng).unwrap();
    let n_preds = if max_clauses == 3 { rng.random_range(1..=2) } else { rng.random_range(1..=3) };
    let n_meta = if max_clauses == 3 { 1 } else { rng.random_range(1..=2) };
    let mut preds: Vec<&str> = PREDICATES.to_vec();
    preds.shuffle(&mut rng);
    preds.truncate(n_preds);

    let mut bk = FactStore::new();
    for _ in 0..rng.random_range(3..=10) {
        let p = preds.choose(&mut rng).unwrap();
        let a = CONSTANTS.choose(&mut rng).unwrap();
        let b = CONSTANTS.choose(&mut rng).unwrap();
        bk.insert(Atom::binary(p, Term::constant(*a), Term::constant(*b))).unwrap();
    }

    let mut library = Metarule::library();
    library.shuffle(&mut rng);
    library.truncate(n_meta);
    let constant_pool: Vec<String> = CONSTANTS
        .iter()
        .filter(|_| rng.random_bool(0.3))
        .map(|c| c.to_string())
        .take(2)
        .collect();

    let all_pairs: Vec<Atom> = CONSTANTS
        .iter()
        .flat_map(|a| CONSTANTS.iter().map(move |b| Atom::binary("t", Term::constant(*a), Term::constant(*b))))
        .collect();
    let depth_limit = rng.random_range(2..=4);

    let mut covered: Vec<Atom> = Vec::new();
    if rng.random_bool(0.5) {
        let hidden = hidden_program(&mut rng, &library, &preds, &constant_pool);
        let mut prover = Prover::new(&bk);
        prover.set_program(&hidden.iter().map(|c| c.clause.clone()).collect::<Vec<_>>());
        covered = all_pairs.iter().filter(|a| prover.entails(a, depth_limit)).cloned().collect();
    }
    let (positives, negatives) = if covered.is_empty() {
        let mut pairs = all_pairs.clone();
        pairs.shuffle(&mut rng);
        let np = rng.random_range(1..=3);
        let nn = rng.random_range(0..=3);
        (pairs[..np].to_vec(), pairs[np..np + nn].to_vec())
    } else {
        let mut pos = covered.clone();
        pos.shuffle(&mut rng);
        pos.truncate(rng.random_range(1..=3));
        let mut neg: Vec<Atom> = all_pairs.iter().filter(|a| !covered.contains(a)).cloned().collect();
        neg.shuffle(&mut rng);
        neg.truncate(rng.random_range(0..=3));
        (pos, neg)
    };

    LearnTask::new(library, bk, positives, negatives)
        .with_predicate_pool(preds.iter().copied())
        .with_constant_pool(constant_pool)
        .with_max_clauses(max_clauses)
        .with_depth_limit(depth_limit)
}

fn hidden_program(
    rng: &mut ChaCha8Rng,
    library: &[Metarule],
    preds: &[&str],
    consts: &[String],
) -> Vec<HypothesisClause> {
    let mut symbols: Vec<&str> = preds.to_vec();
    symbols.push("t");
    let mut out = Vec::new();
    for _ in 0..rng.random_range(1..=2) {
        let m = library.choose(rng).unwrap();
        let mut chosen = vec!["t"];
        for _ in 1..m.predicate_vars().len() {
            chosen.push(symbols.choose(rng).unwrap());
        }
        let cs: Vec<&str> = m
            .constant_slots()
            .iter()
            .filter_map(|_| consts.choose(rng).map(String::as_str))
            .collect();
        if let Ok(c) = m.instantiate_with(&chosen, &cs) {
            out.push(c);
        }
    }
    out
}

/// Every rule and fact printed in the source material, in several spacings.
pub const KNOWN_CLAUSES: [&str; 16] = [
    "category(A,B) :- contains(A,C), related_to(C,B).",
    "category(A,B) :- contains(A,C), category_1(C,B).",
    "category_1(A,B) :- related_to(A,C), related_to(C,B).",
    "category_1(A,B):- related_to(A,C),related_to(C,B).",
    "category(A,B):-contains(A,C),category_1(C,B).",
    "category_1(A,B):-related_to(A,C),category_1(C,B).",
    "category_1(A,home):-related_to(A,home).",
    "category(A,family) :-   contains(A,B), related_to(B,shop).",
    "category(A,work) :-   contains(A,B), related_to(B,letter).",
    "category(A,sport) :-  contains(A,B), related_to(B,exercise).",
    "contains(X,call).",
    "contains(X,mum).",
    "related_to(call, phone).",
    "related_to(mother, family).",
    "contains([registering,gym],gym).",
    "related_to(mother,family).",
];

const WORDS: [&str; 8] = ["call", "mother", "gym", "home", "family", "n2024", "shop", "letter"];
const PREDS: [&str; 5] = ["category", "category_1", "contains", "related_to", "p"];
const VARS: [&str; 6] = ["A", "B", "C", "X", "Y", "Var_2"];

fn random_term(rng: &mut ChaCha8Rng, ground: bool) -> Term {
    match rng.random_range(0..if ground { 2 } else { 3 }) {
        0 => Term::constant(*WORDS.choose(rng).unwrap()),
        1 => {
            let n = rng.random_range(0..=3);
            Term::words((0..n).map(|_| *WORDS.choose(rng).unwrap()))
        }
        _ => Term::var(*VARS.choose(rng).unwrap()),
    }
}

fn random_atom(rng: &mut ChaCha8Rng, ground: bool) -> Atom {
    let pred = *PREDS.choose(rng).unwrap();
    let arity = if pred == "p" { 3 } else { 2 };
    Atom::new(
        pred,
        (0..arity).map(|_| random_term(rng, ground)).collect(),
    )
}

/// Clause text in one of several layouts.
fn layout(rng: &mut ChaCha8Rng, clause: &mgl_core::Clause) -> String {
    let atom = |a: &Atom, sep: &str| {
        let args: Vec<String> = a.args.iter().map(|t| t.to_string()).collect();
        format!("{}({})", a.predicate, args.join(sep))
    };
    let (arg_sep, body_sep, neck) = *[(",", ",", ":-"), (", ", ", ", " :- "), (" ,", " , ", "  :-\n  ")]
        .choose(rng)
        .unwrap();
    let mut out = atom(&clause.head, arg_sep);
    if !clause.body.is_empty() {
        out.push_str(neck);
        let body: Vec<String> = clause.body.iter().map(|b| atom(b, arg_sep)).collect();
        out.push_str(&body.join(body_sep));
    }
    out.push('.');
    out
}

/// The known clauses followed by seeded random clauses, `n` in total.
pub fn clause_corpus(n: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut out: Vec<String> = KNOWN_CLAUSES.iter().map(|s| s.to_string()).collect();
    while out.len() < n {
        let clause = if rng.random_bool(0.3) {
            mgl_core::Clause::fact(random_atom(&mut rng, true))
        } else {
            let head = random_atom(&mut rng, false);
            let body = (0..rng.random_range(1..=3)).map(|_| random_atom(&mut rng, false)).collect();
            mgl_core::Clause::new(head, body)
        };
        out.push(layout(&mut rng, &clause));
    }
    out
}

/// Parses, renders and parses again; returns the two renders.
pub fn round_trip(text: &str) -> Result<(String, String), String> {
    let first = mgl_core::parse_program(text).map_err(|e| format!("{text}: {e}"))?;
    let r1 = mgl_core::render(&first);
    let second = mgl_core::parse_program(&r1).map_err(|e| format!("{r1}: {e}"))?;
    let r2 = mgl_core::render(&second);
    Ok((r1, r2))
}
