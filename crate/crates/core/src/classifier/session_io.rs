//! Session files.
//!
//! ```text
//! %% mgl-session v1
//! %% snapshot-path: fixtures/tasks_bk.facts
//! %% options: max_related=20 min_weight=1.0 hops=1 split=false
//! %% engine: max_clauses=2 depth_limit=10 pool=contains,related_to constants=
//! %% metarule: meta chain: P(A,B) :- Q(A,C), R(C,B).
//! example(e1, [call,mother], family, 1700000000000).
//! %% text: e1 "call mother"
//! %% category: family
//! category(A,B) :- contains(A,C), related_to(C,B). % chain
//! %% history: {...}
//! %% sha256: <hex of everything above>
//! ```
//!
//! A session without a snapshot path embeds the snapshot as `%%| ` lines.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bk::{BkOptions, Snapshot, SnapshotError};
use crate::mil::{Hypothesis, HypothesisClause, Metarule};
use crate::term::{parse_program, render_clause, Term};

use super::{EngineDefaults, InteractionRecord, LabeledExample, SessionState, TARGET};

const HEADER: &str = "%% mgl-session v1";

#[derive(Debug, Error)]
pub enum SessionIoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a session file or unsupported version: `{0}`")]
    Version(String),
    #[error("session checksum missing")]
    MissingChecksum,
    #[error("session checksum mismatch: expected {expected}, found {actual}")]
    Checksum { expected: String, actual: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("snapshot: {0}")]
    Snapshot(#[from] SnapshotError),
}

fn syntax(line: usize, message: impl Into<String>) -> SessionIoError {
    SessionIoError::Syntax {
        line,
        message: message.into(),
    }
}

fn digest(body: &str) -> String {
    hex::encode(Sha256::digest(body.as_bytes()))
}

impl SessionState {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        line(HEADER.to_string());
        if let Some(p) = &self.snapshot_path {
            line(format!("%% snapshot-path: {p}"));
        }
        let o = &self.options;
        line(format!(
            "%% options: max_related={} min_weight={:?} hops={} split={}",
            o.max_related_per_word, o.min_weight, o.hops, o.split_per_example
        ));
        let e = &self.engine;
        line(format!(
            "%% engine: max_clauses={} depth_limit={} pool={} constants={}",
            e.max_clauses,
            e.depth_limit,
            e.predicate_pool.join(","),
            e.constant_pool.join(",")
        ));
        for m in &e.metarules {
            line(format!("%% metarule: {m}"));
        }
        for ex in &self.examples {
            line(format!(
                "example({}, {}, {}, {}).",
                ex.id,
                Term::WordList(ex.words.clone()),
                ex.category,
                ex.timestamp
            ));
            line(format!(
                "%% text: {} {}",
                ex.id,
                serde_json::to_string(&ex.text).expect("strings serialize")
            ));
        }
        for (category, h) in &self.hypotheses {
            line(format!("%% category: {category}"));
            for c in &h.clauses {
                line(format!("{} % {}", render_clause(&c.clause), c.metarule));
            }
        }
        for r in &self.history {
            line(format!("%% history: {}", serde_json::to_string(r).expect("records serialize")));
        }
        if self.snapshot_path.is_none() {
            for l in self.snapshot.render().lines() {
                line(format!("%%| {l}"));
            }
        }
        let sum = digest(&out);
        out.push_str(&format!("%% sha256: {sum}\n"));
        out
    }

    /// Parses a session. A referenced snapshot is loaded from disk, relative
    /// paths resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, SessionIoError> {
        let first = text.lines().next().unwrap_or("");
        if first != HEADER {
            return Err(SessionIoError::Version(first.to_string()));
        }
        let trimmed = text.strip_suffix('\n').unwrap_or(text);
        let (body, last) = match trimmed.rfind('\n') {
            Some(i) => (&text[..=i], &trimmed[i + 1..]),
            None => return Err(SessionIoError::MissingChecksum),
        };
        let expected = last
            .strip_prefix("%% sha256: ")
            .ok_or(SessionIoError::MissingChecksum)?
            .trim();
        let actual = digest(body);
        if expected != actual {
            return Err(SessionIoError::Checksum {
                expected: expected.to_string(),
                actual,
            });
        }

        let mut options = BkOptions::default();
        let mut engine = EngineDefaults {
            metarules: Vec::new(),
            ..EngineDefaults::default()
        };
        let mut snapshot_path: Option<String> = None;
        let mut embedded = String::new();
        let mut examples: Vec<LabeledExample> = Vec::new();
        let mut hypotheses: BTreeMap<String, Hypothesis> = BTreeMap::new();
        let mut current: Option<String> = None;
        let mut history = Vec::new();

        for (i, l) in body.lines().enumerate().skip(1) {
            let n = i + 1;
            if let Some(rest) = l.strip_prefix("%%| ") {
                embedded.push_str(rest);
                embedded.push('\n');
            } else if let Some(rest) = l.strip_prefix("%% snapshot-path: ") {
                snapshot_path = Some(rest.to_string());
            } else if let Some(rest) = l.strip_prefix("%% options: ") {
                options = parse_options(rest).map_err(|m| syntax(n, m))?;
            } else if let Some(rest) = l.strip_prefix("%% engine: ") {
                parse_engine(rest, &mut engine).map_err(|m| syntax(n, m))?;
            } else if let Some(rest) = l.strip_prefix("%% metarule: ") {
                engine
                    .metarules
                    .push(Metarule::parse(rest).map_err(|e| syntax(n, e.to_string()))?);
            } else if let Some(rest) = l.strip_prefix("%% text: ") {
                let (id, json) = rest.split_once(' ').ok_or_else(|| syntax(n, "malformed text line"))?;
                let text: String = serde_json::from_str(json).map_err(|e| syntax(n, e.to_string()))?;
                let ex = examples
                    .iter_mut()
                    .find(|e| e.id == id)
                    .ok_or_else(|| syntax(n, format!("text for unknown example `{id}`")))?;
                ex.text = text;
            } else if let Some(rest) = l.strip_prefix("%% category: ") {
                hypotheses.entry(rest.to_string()).or_default();
                current = Some(rest.to_string());
            } else if let Some(rest) = l.strip_prefix("%% history: ") {
                let r: InteractionRecord = serde_json::from_str(rest).map_err(|e| syntax(n, e.to_string()))?;
                history.push(r);
            } else if l.starts_with("example(") {
                examples.push(parse_example(l).ok_or_else(|| syntax(n, "malformed example"))?);
            } else if l.trim().is_empty() {
            } else {
                let category = current.as_ref().ok_or_else(|| syntax(n, "rule outside a category block"))?;
                let (rule, metarule) = l.rsplit_once(" % ").ok_or_else(|| syntax(n, "rule without metarule name"))?;
                let mut clauses = parse_program(rule).map_err(|e| syntax(n, e.to_string()))?;
                if clauses.len() != 1 {
                    return Err(syntax(n, "expected one clause"));
                }
                let clause = clauses.remove(0);
                let h = hypotheses.get_mut(category).expect("block opened");
                let head = &clause.head.predicate;
                if head != TARGET && !h.invented.contains(head) {
                    h.invented.push(head.clone());
                }
                h.clauses.push(HypothesisClause {
                    clause,
                    metarule: metarule.to_string(),
                });
            }
        }

        let snapshot = match &snapshot_path {
            Some(p) => Snapshot::load(base_dir.join(p))?,
            None => Snapshot::parse(&embedded)?,
        };
        Ok(SessionState {
            examples,
            hypotheses,
            snapshot,
            snapshot_path,
            options,
            engine,
            history,
        })
    }

    /// Atomically replaces `path` with the rendered session.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SessionIoError> {
        let path = path.as_ref();
        crate::bk::write_atomic(path, self.render().as_bytes()).map_err(|source| SessionIoError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SessionIoError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| SessionIoError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }
}

fn fields(text: &str) -> impl Iterator<Item = (&str, &str)> {
    text.split(' ').filter_map(|kv| kv.split_once('='))
}

fn parse_options(text: &str) -> Result<BkOptions, String> {
    let mut o = BkOptions::default();
    for (k, v) in fields(text) {
        match k {
            "max_related" => o.max_related_per_word = v.parse().map_err(|_| format!("bad value for {k}: {v}"))?,
            "min_weight" => o.min_weight = v.parse().map_err(|_| format!("bad value for {k}: {v}"))?,
            "hops" => o.hops = v.parse().map_err(|_| format!("bad value for {k}: {v}"))?,
            "split" => o.split_per_example = v.parse().map_err(|_| format!("bad value for {k}: {v}"))?,
            _ => return Err(format!("unknown option {k}")),
        }
    }
    Ok(o)
}

fn list(v: &str) -> Vec<String> {
    v.split(',').filter(|s| !s.is_empty()).map(str::to_string).collect()
}

fn parse_engine(text: &str, e: &mut EngineDefaults) -> Result<(), String> {
    for (k, v) in fields(text) {
        match k {
            "max_clauses" => e.max_clauses = v.parse().map_err(|_| format!("bad max_clauses: {v}"))?,
            "depth_limit" => e.depth_limit = v.parse().map_err(|_| format!("bad depth_limit: {v}"))?,
            "pool" => e.predicate_pool = list(v),
            "constants" => e.constant_pool = list(v),
            _ => return Err(format!("unknown engine setting {k}")),
        }
    }
    Ok(())
}

fn parse_example(line: &str) -> Option<LabeledExample> {
    let inner = line.strip_prefix("example(")?.strip_suffix(").")?;
    let (id, rest) = inner.split_once(", ")?;
    let rest = rest.strip_prefix('[')?;
    let (words, rest) = rest.split_once(']')?;
    let rest = rest.strip_prefix(", ")?;
    let (category, ts) = rest.split_once(", ")?;
    Some(LabeledExample {
        id: id.to_string(),
        text: String::new(),
        words: words.split(',').filter(|w| !w.is_empty()).map(str::to_string).collect(),
        category: category.to_string(),
        timestamp: ts.parse().ok()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bk::KnowledgeEdge;
    use crate::classifier::FixedClock;

    fn session() -> SessionState {
        let mut snap = Snapshot::new("test");
        snap.insert(KnowledgeEdge::related("mother", "family", 1.5).unwrap()).unwrap();
        snap.insert(KnowledgeEdge::related("swim", "sport", 1.0).unwrap()).unwrap();
        let mut s = SessionState::new(snap, BkOptions::default(), EngineDefaults::default());
        s.label("go swim", "sport", &FixedClock(10)).unwrap();
        s.label("call mother, \"now\"", "family", &FixedClock(20)).unwrap();
        s
    }

    #[test]
    fn round_trip_with_embedded_snapshot() {
        let s = session();
        let text = s.render();
        let back = SessionState::parse(&text, Path::new(".")).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.render(), text);
    }

    #[test]
    fn round_trip_through_file_with_snapshot_path() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = session();
        s.snapshot.save(dir.path().join("bk.facts")).unwrap();
        s.snapshot_path = Some("bk.facts".to_string());
        let path = dir.path().join("session.mgl");
        s.save(&path).unwrap();
        assert_eq!(SessionState::load(&path).unwrap(), s);
    }

    #[test]
    fn corrupt_and_missing_files() {
        let text = session().render();
        let tampered = text.replacen("family", "famIly", 1);
        assert!(matches!(
            SessionState::parse(&tampered, Path::new(".")),
            Err(SessionIoError::Checksum { .. })
        ));
        assert!(matches!(
            SessionState::parse("%% mgl-session v9\n", Path::new(".")),
            Err(SessionIoError::Version(_))
        ));
        assert!(matches!(
            SessionState::load("/nonexistent/session.mgl"),
            Err(SessionIoError::Io { .. })
        ));
    }
}
