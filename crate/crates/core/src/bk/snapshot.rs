//! Offline copy of the graph edges used to build background knowledge.
//!
//! File layout:
//!
//! ```text
//! #mgl-snapshot v1 <source tag>
//! related_to(mother, family, 2.0).
//! #fetched: call mother
//! #sha256: <hex of every preceding byte>
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{BkError, BkOptions, KnowledgeEdge, RELATED_TO};

const MAGIC: &str = "#mgl-snapshot";
const VERSION: &str = "v1";
const WORDS_PER_LINE: usize = 16;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing header")]
    MissingHeader,
    #[error("unsupported snapshot version `{0}`")]
    Version(String),
    #[error("missing checksum line")]
    MissingChecksum,
    #[error("checksum mismatch: file says {expected}, content hashes to {actual}")]
    Checksum { expected: String, actual: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Edges keyed by unordered word pair, so each relation is stored once and is
/// queryable from both ends.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Snapshot {
    pub source_tag: String,
    edges: BTreeMap<(String, String), KnowledgeEdge>,
    fetched: BTreeSet<String>,
    adjacency: BTreeMap<String, Vec<(String, f64)>>,
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl Snapshot {
    pub fn new(source_tag: impl Into<String>) -> Self {
        Snapshot {
            source_tag: source_tag.into(),
            ..Self::default()
        }
    }

    /// Adds an edge. A repeated pair keeps its first direction and the
    /// larger weight.
    pub fn insert(&mut self, edge: KnowledgeEdge) -> Result<(), BkError> {
        if edge.relation != RELATED_TO {
            return Err(BkError::InvalidEdge(format!("relation {}", edge.relation)));
        }
        let edge = KnowledgeEdge::related(&edge.head, &edge.tail, edge.weight)?;
        let key = pair_key(&edge.head, &edge.tail);
        let weight = match self.edges.get_mut(&key) {
            Some(existing) if existing.weight >= edge.weight => return Ok(()),
            Some(existing) => {
                existing.weight = edge.weight;
                edge.weight
            }
            None => {
                let w = edge.weight;
                self.edges.insert(key.clone(), edge);
                w
            }
        };
        let (a, b) = key;
        self.set_neighbor(&a, &b, weight);
        self.set_neighbor(&b, &a, weight);
        Ok(())
    }

    fn set_neighbor(&mut self, word: &str, other: &str, weight: f64) {
        let list = self.adjacency.entry(word.to_string()).or_default();
        list.retain(|(w, _)| w != other);
        let pos = list
            .iter()
            .position(|(w, x)| *x < weight || (*x == weight && w.as_str() > other))
            .unwrap_or(list.len());
        list.insert(pos, (other.to_string(), weight));
    }

    pub fn mark_fetched(&mut self, word: &str) {
        self.fetched.insert(word.to_string());
    }

    pub fn fetched_words(&self) -> &BTreeSet<String> {
        &self.fetched
    }

    /// Whether `word` was fetched or appears in any edge.
    pub fn knows(&self, word: &str) -> bool {
        self.fetched.contains(word) || self.adjacency.contains_key(word)
    }

    pub fn edges(&self) -> impl Iterator<Item = &KnowledgeEdge> {
        self.edges.values()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        self.edges.contains_key(&pair_key(a, b))
    }

    /// All neighbours of `word`, by weight descending then name ascending.
    pub fn neighbors(&self, word: &str) -> &[(String, f64)] {
        self.adjacency.get(word).map_or(&[], Vec::as_slice)
    }

    /// Neighbours that pass `options`' weight threshold, truncated to its limit.
    pub fn related(&self, word: &str, options: &BkOptions) -> Vec<&str> {
        self.neighbors(word)
            .iter()
            .filter(|(_, w)| *w >= options.min_weight)
            .take(options.max_related_per_word)
            .map(|(n, _)| n.as_str())
            .collect()
    }

    /// Adds everything from `other`; the source tag is kept.
    pub fn merge(&mut self, other: &Snapshot) {
        for e in other.edges() {
            self.insert(e.clone()).expect("edges of a snapshot are valid");
        }
        self.fetched.extend(other.fetched.iter().cloned());
    }

    pub fn render(&self) -> String {
        let mut out = format!("{MAGIC} {VERSION} {}\n", self.source_tag);
        for e in self.edges.values() {
            out.push_str(&format!("{RELATED_TO}({}, {}, {:?}).\n", e.head, e.tail, e.weight));
        }
        let words: Vec<&str> = self.fetched.iter().map(String::as_str).collect();
        for chunk in words.chunks(WORDS_PER_LINE) {
            out.push_str(&format!("#fetched: {}\n", chunk.join(" ")));
        }
        let digest = hex::encode(Sha256::digest(out.as_bytes()));
        out.push_str(&format!("#sha256: {digest}\n"));
        out
    }

    pub fn parse(text: &str) -> Result<Self, SnapshotError> {
        let body_end = text
            .rfind("#sha256:")
            .filter(|&i| i == 0 || text.as_bytes()[i - 1] == b'\n');
        let mut lines = text.lines();
        let header = lines.next().ok_or(SnapshotError::MissingHeader)?;
        let rest = header.strip_prefix(MAGIC).ok_or(SnapshotError::MissingHeader)?;
        let rest = rest.trim_start();
        let (version, tag) = rest.split_once(' ').unwrap_or((rest, ""));
        if version != VERSION {
            return Err(SnapshotError::Version(version.to_string()));
        }
        let end = body_end.ok_or(SnapshotError::MissingChecksum)?;
        let expected = text[end + "#sha256:".len()..].trim().to_string();
        let actual = hex::encode(Sha256::digest(&text.as_bytes()[..end]));
        if expected != actual {
            return Err(SnapshotError::Checksum { expected, actual });
        }

        let mut snap = Snapshot::new(tag.trim());
        for (i, line) in text[..end].lines().enumerate().skip(1) {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('%') {
                continue;
            }
            if let Some(words) = line.strip_prefix("#fetched:") {
                for w in words.split_whitespace() {
                    snap.mark_fetched(w);
                }
                continue;
            }
            let syntax = |message: String| SnapshotError::Syntax {
                line: line_no,
                message,
            };
            let inner = line
                .strip_prefix("related_to(")
                .and_then(|s| s.strip_suffix(")."))
                .ok_or_else(|| syntax(format!("expected `related_to(head, tail, weight).`, found `{line}`")))?;
            let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
            let [head, tail, weight] = parts.as_slice() else {
                return Err(syntax(format!("expected three arguments, found {}", parts.len())));
            };
            let weight: f64 = weight
                .parse()
                .map_err(|_| syntax(format!("bad weight `{weight}`")))?;
            let edge = KnowledgeEdge::related(head, tail, weight).map_err(|e| syntax(e.to_string()))?;
            snap.insert(edge).map_err(|e| syntax(e.to_string()))?;
        }
        Ok(snap)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SnapshotError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| SnapshotError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Writes to a temporary file beside `path`, then renames it into place.
    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        write_atomic(path.as_ref(), self.render().as_bytes())
    }
}

/// Replaces `path` with `bytes` so readers see either the old or new content.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Snapshot {
        let mut s = Snapshot::new("test 2024-01-01");
        s.insert(KnowledgeEdge::related("mother", "family", 2.0).unwrap()).unwrap();
        s.insert(KnowledgeEdge::related("call", "phone", 1.5).unwrap()).unwrap();
        s.insert(KnowledgeEdge::related("family", "mother", 3.0).unwrap()).unwrap();
        s.insert(KnowledgeEdge::related("mother", "mom", 3.0).unwrap()).unwrap();
        s.mark_fetched("mother");
        s.mark_fetched("call");
        s
    }

    #[test]
    fn symmetric_lookup() {
        let s = sample();
        assert!(s.has_edge("family", "mother"));
        assert!(s.has_edge("mother", "family"));
        assert_eq!(s.len(), 3);
        let n: Vec<&str> = s.neighbors("mother").iter().map(|(w, _)| w.as_str()).collect();
        assert_eq!(n, vec!["family", "mom"]);
        assert_eq!(s.neighbors("family"), &[("mother".to_string(), 3.0)]);
    }

    #[test]
    fn related_applies_options() {
        let s = sample();
        let strict = BkOptions {
            min_weight: 2.5,
            max_related_per_word: 1,
            ..BkOptions::default()
        };
        assert_eq!(s.related("mother", &strict), vec!["family"]);
        assert!(s.related("call", &strict).is_empty());
    }

    #[test]
    fn round_trip() {
        let s = sample();
        let text = s.render();
        assert!(text.starts_with("#mgl-snapshot v1 test 2024-01-01\n"));
        assert!(text.contains("related_to(mother, family, 3.0).\n"));
        assert_eq!(Snapshot::parse(&text).unwrap(), s);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.facts");
        s.save(&path).unwrap();
        assert_eq!(Snapshot::load(&path).unwrap(), s);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(Snapshot::parse(""), Err(SnapshotError::MissingHeader)));
        assert_eq!(Snapshot::parse("").unwrap_err().to_string(), "missing header");
        let text = sample().render();
        let tampered = text.replace("3.0", "4.0");
        assert!(matches!(Snapshot::parse(&tampered), Err(SnapshotError::Checksum { .. })));
        let v2 = text.replacen("v1", "v2", 1);
        assert!(matches!(Snapshot::parse(&v2), Err(SnapshotError::Version(v)) if v == "v2"));
        let unsigned = text[..text.find("#sha256").unwrap()].to_string();
        assert!(matches!(Snapshot::parse(&unsigned), Err(SnapshotError::MissingChecksum)));
        assert!(matches!(
            Snapshot::load("/nonexistent/snapshot.facts"),
            Err(SnapshotError::Io { .. })
        ));
    }
}
