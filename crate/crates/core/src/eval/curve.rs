//! Accuracy as the number of training examples grows.

use std::fmt::Write;

use crate::bk::{BkOptions, Snapshot};
use crate::classifier::EngineDefaults;

use super::{average_one_shot, average_one_shot_split, AccuracyReport, Dataset, EvalError, TrialPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Vary negatives, one positive.
    Neg,
    /// Vary positives with as many negatives.
    Pos,
}

impl std::str::FromStr for Axis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pos" => Ok(Axis::Pos),
            "neg" => Ok(Axis::Neg),
            other => Err(format!("axis must be pos or neg, not `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub count: usize,
    pub mean_accuracy: f64,
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub rows: Vec<CurveRow>,
    pub reports: Vec<AccuracyReport>,
}

impl Curve {
    /// `count,mean_accuracy,stddev`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("count,mean_accuracy,stddev\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{:?},{:?}", r.count, r.mean_accuracy, r.stddev);
        }
        out
    }

    /// One row per trial: `count,trial_index,accuracy,learn_failed`.
    pub fn sidecar_csv(&self) -> String {
        let mut out = String::from("count,trial_index,accuracy,learn_failed\n");
        for (row, report) in self.rows.iter().zip(&self.reports) {
            for t in &report.per_trial {
                let _ = writeln!(out, "{},{},{:?},{}", row.count, t.trial_index, t.accuracy, t.learn_failed);
            }
        }
        out
    }
}

/// Runs the plan for every count in `1..=max_count` on the chosen axis.
/// With `test`, training and test examples come from separate datasets.
#[allow(clippy::too_many_arguments)]
pub fn curve(
    train: &Dataset,
    test: Option<&Dataset>,
    base: &TrialPlan,
    axis: Axis,
    max_count: usize,
    snapshot: &Snapshot,
    options: &BkOptions,
    engine: &EngineDefaults,
) -> Result<Curve, EvalError> {
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for count in 1..=max_count {
        let plan = match axis {
            Axis::Neg => TrialPlan {
                n_pos: 1,
                n_neg: count,
                ..base.clone()
            },
            Axis::Pos => TrialPlan {
                n_pos: count,
                n_neg: count,
                ..base.clone()
            },
        };
        let report = match test {
            Some(t) => average_one_shot_split(train, t, &plan, snapshot, options, engine)?,
            None => average_one_shot(train, &plan, snapshot, options, engine)?,
        };
        rows.push(CurveRow {
            count,
            mean_accuracy: report.mean_accuracy,
            stddev: report.stddev(),
        });
        reports.push(report);
    }
    Ok(Curve { rows, reports })
}

/// Reads a curve CSV written by [`Curve::to_csv`].
pub fn parse_curve_csv(text: &str) -> Result<Vec<CurveRow>, EvalError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| EvalError::Header(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["count", "mean_accuracy", "stddev"] {
        return Err(EvalError::Header(headers.iter().collect::<Vec<_>>().join(",")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| EvalError::Malformed {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |m: String| EvalError::Malformed { line, message: m };
        rows.push(CurveRow {
            count: record[0].parse().map_err(|e| bad(format!("count: {e}")))?,
            mean_accuracy: record[1].parse().map_err(|e| bad(format!("mean_accuracy: {e}")))?,
            stddev: record[2].parse().map_err(|e| bad(format!("stddev: {e}")))?,
        });
    }
    Ok(rows)
}

/// Joins a `count,accuracy` baseline onto the curve rows. Counts missing from
/// the baseline get an empty cell.
pub fn merge_baseline(rows: &[CurveRow], baseline_csv: &str) -> Result<String, EvalError> {
    let mut reader = csv::Reader::from_reader(baseline_csv.as_bytes());
    let headers = reader.headers().map_err(|e| EvalError::Header(e.to_string()))?.clone();
    if headers.len() < 2 || &headers[0] != "count" {
        return Err(EvalError::Header(headers.iter().collect::<Vec<_>>().join(",")));
    }
    let mut baseline: Vec<(usize, String)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| EvalError::Malformed {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let count = record[0].parse().map_err(|e| EvalError::Malformed {
            line,
            message: format!("count: {e}"),
        })?;
        baseline.push((count, record[1].to_string()));
    }
    let mut out = format!("count,mean_accuracy,stddev,baseline_{}\n", &headers[1]);
    for r in rows {
        let b = baseline.iter().find(|(c, _)| *c == r.count).map_or("", |(_, v)| v.as_str());
        let _ = writeln!(out, "{},{:?},{:?},{}", r.count, r.mean_accuracy, r.stddev, b);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_and_baseline() {
        let c = Curve {
            rows: vec![
                CurveRow {
                    count: 1,
                    mean_accuracy: 0.75,
                    stddev: 0.1,
                },
                CurveRow {
                    count: 2,
                    mean_accuracy: 1.0,
                    stddev: 0.0,
                },
            ],
            reports: Vec::new(),
        };
        assert_eq!(parse_curve_csv(&c.to_csv()).unwrap(), c.rows);
        let merged = merge_baseline(&c.rows, "count,accuracy\n1,0.6\n").unwrap();
        assert_eq!(
            merged,
            "count,mean_accuracy,stddev,baseline_accuracy\n1,0.75,0.1,0.6\n2,1.0,0.0,\n"
        );
        assert_eq!("pos".parse::<Axis>(), Ok(Axis::Pos));
        assert!("both".parse::<Axis>().is_err());
    }
}
