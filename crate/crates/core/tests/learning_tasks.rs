mod common;

use std::time::{Duration, Instant};

use common::{fixture, read_fixture};
use mgl_core::bk::Snapshot;
use mgl_core::mil::{brute_force_learn, verify};
use mgl_core::{learn, FactStore, LearnTask, Metarule};

fn task(dir: &str, metarules: Vec<Metarule>) -> LearnTask {
    let bk = FactStore::parse(&read_fixture(&format!("{dir}/bk.facts"))).unwrap();
    let pos = FactStore::parse(&read_fixture(&format!("{dir}/pos.facts"))).unwrap();
    let neg = FactStore::parse(&read_fixture(&format!("{dir}/neg.facts"))).unwrap();
    LearnTask::new(metarules, bk, pos.facts().to_vec(), neg.facts().to_vec())
        .with_predicate_pool(["contains", "related_to"])
}

fn timed(task: &LearnTask) -> (String, Duration) {
    let start = Instant::now();
    let h = learn(task).unwrap().expect("hypothesis");
    let elapsed = start.elapsed();
    let report = verify(&h, task);
    assert!(report.complete && report.strongly_consistent, "{report:?}");
    (h.render(), elapsed)
}

#[test]
fn one_hop_chain() {
    let t = task("exp1", vec![Metarule::chain()]).with_max_clauses(1);
    let (rules, elapsed) = timed(&t);
    assert_eq!(rules, "category(A,B) :- contains(A,C), related_to(C,B).");
    assert!(elapsed < Duration::from_secs(1));
}

#[test]
fn two_hop_invention() {
    let t = task("exp2", vec![Metarule::chain()]).with_max_clauses(2);
    assert_eq!((t.positives.len(), t.negatives.len()), (4, 6));
    let (rules, elapsed) = timed(&t);
    assert_eq!(
        rules,
        "category(A,B) :- contains(A,C), category_1(C,B).\n\
         category_1(A,B) :- related_to(A,C), related_to(C,B)."
    );
    assert!(elapsed < Duration::from_secs(5));
}

#[test]
fn recursion_with_constant_base_case() {
    let t = task(
        "exp3",
        vec![Metarule::chain(), Metarule::tailrec(), Metarule::ident_const()],
    )
    .with_constant_pool(["home"])
    .with_max_clauses(3);
    let (rules, elapsed) = timed(&t);
    let lines: Vec<&str> = rules.lines().collect();
    assert_eq!(lines[0], "category(A,B) :- contains(A,C), category_1(C,B).");
    assert!(lines.contains(&"category_1(A,B) :- related_to(A,C), category_1(C,B)."), "{rules}");
    assert!(lines.contains(&"category_1(A,home) :- related_to(A,home)."), "{rules}");
    assert_eq!(lines.len(), 3);
    assert!(elapsed < Duration::from_secs(10));
}

#[test]
fn learner_agrees_with_exhaustive_search_on_fixtures() {
    for (dir, k) in [("exp1", 1), ("exp2", 2)] {
        let t = task(dir, vec![Metarule::chain()]).with_max_clauses(k);
        let learned = learn(&t).unwrap().unwrap();
        let oracle = brute_force_learn(&t).unwrap().unwrap();
        assert_eq!(learned.len(), oracle.len(), "{dir}");
    }
    let t = task("exp3", vec![Metarule::chain(), Metarule::tailrec(), Metarule::ident_const()])
        .with_constant_pool(["home"])
        .with_max_clauses(3);
    let oracle = brute_force_learn(&t).unwrap().unwrap();
    assert_eq!(oracle.len(), 3);
}

#[test]
fn word_level_recursion() {
    let bk = FactStore::parse(&read_fixture("exp3/bk.facts")).unwrap();
    let pos = common::atoms(&["category_1(house,home)", "category_1(mother,home)", "category_1(trip,home)"]);
    let neg = common::atoms(&["category_1(swim,home)", "category_1(write,home)"]);
    let t = LearnTask::new(vec![Metarule::tailrec(), Metarule::ident_const()], bk, pos, neg)
        .with_predicate_pool(["related_to"])
        .with_constant_pool(["home"])
        .with_max_clauses(2);
    let h = learn(&t).unwrap().unwrap();
    assert_eq!(
        h.render(),
        "category_1(A,home) :- related_to(A,home).\n\
         category_1(A,B) :- related_to(A,C), category_1(C,B)."
    );
    assert_eq!(brute_force_learn(&t).unwrap().unwrap().len(), 2);
}

#[test]
fn snapshot_fixtures_render_byte_for_byte() {
    for name in ["tasks_bk.facts", "synthetic_bk.facts", "news_bk.facts"] {
        let text = read_fixture(name);
        let snap = Snapshot::load(fixture(name)).unwrap();
        assert_eq!(snap.render(), text, "{name}");
    }
    let snap = Snapshot::load(fixture("tasks_bk.facts")).unwrap();
    assert!(snap.has_edge("mother", "family"));
    assert!(snap.has_edge("call", "phone"));
    assert!(snap.has_edge("swim", "exercise"));
}
