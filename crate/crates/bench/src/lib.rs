//! Fixture loading shared by the benchmarks.

use std::path::{Path, PathBuf};

use mgl_core::{FactStore, LearnTask, Metarule};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn store(path: &Path) -> FactStore {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    FactStore::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// One of the `exp1`, `exp2`, `exp3` fixture tasks with the settings that
/// solve it.
pub fn experiment(name: &str) -> LearnTask {
    let dir = fixtures().join(name);
    let bk = store(&dir.join("bk.facts"));
    let pos = store(&dir.join("pos.facts")).facts().to_vec();
    let neg = store(&dir.join("neg.facts")).facts().to_vec();
    let base = |metarules| {
        LearnTask::new(metarules, bk.clone(), pos.clone(), neg.clone()).with_predicate_pool(["contains", "related_to"])
    };
    match name {
        "exp1" => base(vec![Metarule::chain()]).with_max_clauses(1),
        "exp2" => base(vec![Metarule::chain()]).with_max_clauses(2),
        "exp3" => base(vec![Metarule::chain(), Metarule::tailrec(), Metarule::ident_const()])
            .with_constant_pool(["home"])
            .with_max_clauses(3),
        other => panic!("unknown experiment {other}"),
    }
}
