mod common;

use std::collections::{BTreeSet, HashMap};

use common::random_task;
use mgl_core::mil::{entailment, Prover};
use mgl_core::{entails, learn, Atom, Clause, FactStore, Term};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CONSTS: [&str; 4] = ["a", "b", "c", "d"];
const VARS: [&str; 3] = ["A", "B", "C"];

type Facts = BTreeSet<(String, String, String)>;

fn bind(s: &mut HashMap<String, String>, t: &Term, value: &str) -> bool {
    match t {
        Term::Const(c) => c == value,
        Term::Var(v) => match s.get(v) {
            Some(x) => x == value,
            None => {
                s.insert(v.clone(), value.to_string());
                true
            }
        },
        Term::WordList(_) => false,
    }
}

fn ground(s: &HashMap<String, String>, t: &Term) -> String {
    match t {
        Term::Const(c) => c.clone(),
        Term::Var(v) => s[v].clone(),
        Term::WordList(_) => unreachable!(),
    }
}

fn joins(body: &[Atom], facts: &Facts, s: HashMap<String, String>, out: &mut Vec<HashMap<String, String>>) {
    let Some((first, rest)) = body.split_first() else {
        out.push(s);
        return;
    };
    for (p, x, y) in facts {
        if *p != first.predicate {
            continue;
        }
        let mut s2 = s.clone();
        if bind(&mut s2, &first.args[0], x) && bind(&mut s2, &first.args[1], y) {
            joins(rest, facts, s2, out);
        }
    }
}

/// Least model by naive bottom-up iteration.
fn least_model(program: &[Clause], bk: &FactStore) -> Facts {
    let mut facts: Facts = bk
        .facts()
        .iter()
        .map(|f| (f.predicate.clone(), f.args[0].to_string(), f.args[1].to_string()))
        .collect();
    loop {
        let mut new = Vec::new();
        for c in program {
            let mut subs = Vec::new();
            joins(&c.body, &facts, HashMap::new(), &mut subs);
            for s in subs {
                let f = (c.head.predicate.clone(), ground(&s, &c.head.args[0]), ground(&s, &c.head.args[1]));
                if !facts.contains(&f) {
                    new.push(f);
                }
            }
        }
        if new.is_empty() {
            return facts;
        }
        facts.extend(new);
    }
}

fn term(rng: &mut ChaCha8Rng, vars: &[&str]) -> Term {
    if rng.random_bool(0.8) {
        Term::var(*vars.choose(rng).unwrap())
    } else {
        Term::constant(*CONSTS.choose(rng).unwrap())
    }
}

/// A range-restricted binary clause for `head` over `body_preds`.
fn clause(rng: &mut ChaCha8Rng, head: &str, body_preds: &[&str]) -> Clause {
    let body: Vec<Atom> = (0..rng.random_range(1..=2))
        .map(|_| {
            let p = body_preds.choose(rng).unwrap();
            Atom::binary(p, term(rng, &VARS), term(rng, &VARS))
        })
        .collect();
    let body_vars: Vec<&str> = VARS
        .iter()
        .copied()
        .filter(|v| body.iter().any(|a| a.args.contains(&Term::var(*v))))
        .collect();
    let pick = |rng: &mut ChaCha8Rng| {
        if body_vars.is_empty() || rng.random_bool(0.15) {
            Term::constant(*CONSTS.choose(rng).unwrap())
        } else {
            Term::var(*body_vars.choose(rng).unwrap())
        }
    };
    let head = Atom::binary(head, pick(rng), pick(rng));
    Clause::new(head, body)
}

fn random_bk(rng: &mut ChaCha8Rng) -> FactStore {
    let mut bk = FactStore::new();
    for _ in 0..rng.random_range(2..=8) {
        let p = ["p", "q"].choose(rng).unwrap();
        let a = CONSTS.choose(rng).unwrap();
        let b = CONSTS.choose(rng).unwrap();
        bk.insert(Atom::binary(p, Term::constant(*a), Term::constant(*b))).unwrap();
    }
    bk
}

fn all_goals(preds: &[&str]) -> Vec<Atom> {
    preds
        .iter()
        .flat_map(|p| {
            CONSTS
                .iter()
                .flat_map(move |a| CONSTS.iter().map(move |b| Atom::binary(p, Term::constant(*a), Term::constant(*b))))
        })
        .collect()
}

#[test]
fn top_down_matches_least_model_on_layered_programs() {
    for seed in 0..300u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bk = random_bk(&mut rng);
        let mut program = Vec::new();
        for _ in 0..rng.random_range(1..=2) {
            program.push(clause(&mut rng, "r", &["p", "q"]));
        }
        for _ in 0..rng.random_range(1..=2) {
            program.push(clause(&mut rng, "t", &["p", "q", "r"]));
        }
        let model = least_model(&program, &bk);
        for goal in all_goals(&["r", "t", "p"]) {
            let key = (goal.predicate.clone(), goal.args[0].to_string(), goal.args[1].to_string());
            let e = entailment(&program, &bk, &goal, 10);
            assert!(!e.truncated, "seed {seed}");
            assert_eq!(e.entailed, model.contains(&key), "seed {seed} goal {goal}\n{program:?}");
        }
    }
}

#[test]
fn right_recursion_reaches_the_least_model() {
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let bk = random_bk(&mut rng);
        let program = mgl_core::parse_program("t(A,B) :- p(A,B).\nt(A,B) :- q(A,C), t(C,B).").unwrap();
        let model = least_model(&program, &bk);
        for goal in all_goals(&["t"]) {
            let key = (goal.predicate.clone(), goal.args[0].to_string(), goal.args[1].to_string());
            // Any proof needs at most one step per constant plus the base case.
            assert_eq!(entails(&program, &bk, &goal, 8), model.contains(&key), "seed {seed} {goal}");
        }
    }
}

#[test]
fn entailment_is_monotone_in_depth() {
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let bk = random_bk(&mut rng);
        let program: Vec<Clause> = (0..rng.random_range(1..=3))
            .map(|_| clause(&mut rng, "t", &["p", "q", "t"]))
            .collect();
        let mut prover = Prover::new(&bk);
        prover.set_program(&program);
        for goal in all_goals(&["t"]) {
            let mut previous = false;
            for depth in 1..=6 {
                let now = prover.entails(&goal, depth);
                assert!(!previous || now, "seed {seed} {goal} lost at depth {depth}");
                previous = now;
            }
        }
    }
}

#[test]
fn learning_is_deterministic() {
    for seed in 0..100u64 {
        let task = random_task(seed);
        assert_eq!(learn(&task).unwrap(), learn(&task).unwrap(), "seed {seed}");
    }
}
