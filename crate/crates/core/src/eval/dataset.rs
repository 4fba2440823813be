//! Task CSV and news JSONL loaders.

use std::path::Path;

use serde::Deserialize;

use crate::term::is_constant_symbol;

use super::EvalError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub text: String,
    pub category: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub name: String,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, samples: Vec<Sample>) -> Self {
        Dataset {
            name: name.into(),
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn count(&self, category: &str) -> usize {
        self.samples.iter().filter(|s| s.category == category).count()
    }

    /// Distinct categories in order of first appearance.
    pub fn categories(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for s in &self.samples {
            if !out.contains(&s.category.as_str()) {
                out.push(&s.category);
            }
        }
        out
    }

    /// Indices of `target` samples and of all other samples.
    pub fn partition(&self, target: &str) -> (Vec<usize>, Vec<usize>) {
        (0..self.samples.len()).partition(|&i| self.samples[i].category == target)
    }
}

/// Lowercases and joins runs of other characters with `_`, so
/// `"STYLE & BEAUTY"` becomes `style_beauty`.
fn normalize_category(raw: &str) -> String {
    raw.to_lowercase()
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join("_")
}

fn read(path: &Path) -> Result<String, EvalError> {
    std::fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned())
}

pub fn load_task_csv(path: impl AsRef<Path>) -> Result<Dataset, EvalError> {
    let path = path.as_ref();
    let mut d = parse_task_csv(&read(path)?)?;
    d.name = dataset_name(path);
    Ok(d)
}

/// Parses `text,category` rows. Errors carry 1-based line numbers.
pub fn parse_task_csv(text: &str) -> Result<Dataset, EvalError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| EvalError::Header(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["text", "category"] {
        return Err(EvalError::Header(headers.iter().collect::<Vec<_>>().join(",")));
    }
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| EvalError::Malformed {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let category = normalize_category(&record[1]);
        if !is_constant_symbol(&category) {
            return Err(EvalError::Malformed {
                line,
                message: format!("invalid category `{}`", &record[1]),
            });
        }
        samples.push(Sample {
            text: record[0].to_string(),
            category,
        });
    }
    Ok(Dataset::new("", samples))
}

/// A news dataset with the number of unusable lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewsLoad {
    pub dataset: Dataset,
    pub skipped: usize,
    /// 1-based numbers of the skipped lines.
    pub skipped_lines: Vec<usize>,
}

#[derive(Deserialize)]
struct NewsRecord {
    headline: String,
    category: String,
}

/// Loads headlines. With `category_filter`, fails unless that category has
/// samples; all other samples stay in the dataset as the negative pool.
pub fn load_news_jsonl(path: impl AsRef<Path>, category_filter: Option<&str>) -> Result<NewsLoad, EvalError> {
    let path = path.as_ref();
    let mut load = parse_news_jsonl(&read(path)?, category_filter)?;
    load.dataset.name = dataset_name(path);
    Ok(load)
}

pub fn parse_news_jsonl(text: &str, category_filter: Option<&str>) -> Result<NewsLoad, EvalError> {
    let mut samples = Vec::new();
    let mut skipped_lines = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<NewsRecord>(line) {
            Ok(r) if is_constant_symbol(&normalize_category(&r.category)) => samples.push(Sample {
                text: r.headline,
                category: normalize_category(&r.category),
            }),
            _ => {
                log::warn!("skipping malformed news line {}", i + 1);
                skipped_lines.push(i + 1);
            }
        }
    }
    if samples.is_empty() {
        return Err(EvalError::NoUsableLines {
            skipped: skipped_lines.len(),
        });
    }
    let dataset = Dataset::new("", samples);
    if let Some(c) = category_filter {
        let c = normalize_category(c);
        if dataset.count(&c) == 0 {
            return Err(EvalError::UnknownCategory(c));
        }
    }
    Ok(NewsLoad {
        dataset,
        skipped: skipped_lines.len(),
        skipped_lines,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rows_and_errors() {
        let d = parse_task_csv("text,category\n\"call mother, later\",Family\nswim,sport\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.samples[0].text, "call mother, later");
        assert_eq!(d.samples[0].category, "family");
        assert!(parse_task_csv("text,category\n").unwrap().is_empty());
        match parse_task_csv("text,category\nok,work\nmissing\n") {
            Err(EvalError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_task_csv("text,category\nok,work\nempty,\n") {
            Err(EvalError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_task_csv("sentence,label\n"), Err(EvalError::Header(_))));
    }

    #[test]
    fn news_lines() {
        let text = "{\"headline\":\"Forest fires spread\",\"category\":\"ENVIRONMENT\"}\n\
                    {\"category\":\"SPORTS\"}\n\
                    not json\n\
                    {\"headline\":\"Style tips\",\"category\":\"STYLE & BEAUTY\"}\n";
        let load = parse_news_jsonl(text, Some("environment")).unwrap();
        assert_eq!(load.dataset.samples[0].category, "environment");
        assert_eq!(load.dataset.samples[1].category, "style_beauty");
        assert_eq!(load.skipped_lines, vec![2, 3]);
        assert!(matches!(parse_news_jsonl("", None), Err(EvalError::NoUsableLines { skipped: 0 })));
        assert!(matches!(
            parse_news_jsonl(text, Some("tech")),
            Err(EvalError::UnknownCategory(_))
        ));
    }
}
