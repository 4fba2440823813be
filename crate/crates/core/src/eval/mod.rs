//! Batch evaluation: dataset loaders, averaged one-shot trials and learning
//! curves.

mod curve;
mod dataset;
mod report;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bk::{example_store, tokenize, BkError, BkOptions, Snapshot};
use crate::classifier::{example_atom, EngineDefaults};
use crate::mil::{entails, learn, LearnError};
use crate::store::FactStore;
use crate::term::{Atom, Clause};

pub use curve::{curve, merge_baseline, parse_curve_csv, Axis, Curve, CurveRow};
pub use dataset::{load_news_jsonl, load_task_csv, parse_news_jsonl, parse_task_csv, Dataset, NewsLoad, Sample};
pub use report::{AccuracyReport, TrialResult};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("expected header `text,category`, found `{0}`")]
    Header(String),
    #[error("no usable lines ({skipped} skipped)")]
    NoUsableLines { skipped: usize },
    #[error("no samples of category `{0}`")]
    UnknownCategory(String),
    #[error("accuracy of an empty prediction list")]
    EmptyPredictions,
    #[error("plan needs {needed} {what} examples, {available} available")]
    Infeasible {
        what: &'static str,
        needed: usize,
        available: usize,
    },
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("training text `{0}` has no words")]
    EmptyTrainingText(String),
    #[error(transparent)]
    Bk(#[from] BkError),
    #[error(transparent)]
    Learn(#[from] LearnError),
}

/// Sampling plan for repeated one-shot trials.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialPlan {
    pub seed: u64,
    pub n_trials: usize,
    pub n_pos: usize,
    pub n_neg: usize,
    pub n_test_pos: usize,
    pub n_test_neg: usize,
    pub target_category: String,
}

impl TrialPlan {
    /// Ten one-shot trials tested on 15 positives and 14 negatives.
    pub fn task_default(target: &str, seed: u64) -> Self {
        TrialPlan {
            seed,
            n_trials: 10,
            n_pos: 1,
            n_neg: 1,
            n_test_pos: 15,
            n_test_neg: 14,
            target_category: target.to_string(),
        }
    }

    /// Ten one-shot trials tested on 50 positives and 50 negatives.
    pub fn news_default(target: &str, seed: u64) -> Self {
        TrialPlan {
            n_test_pos: 50,
            n_test_neg: 50,
            ..Self::task_default(target, seed)
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if self.n_trials == 0 || self.n_pos == 0 || self.n_test_pos == 0 || self.n_test_neg == 0 {
            return Err(EvalError::InvalidPlan(
                "n_trials, n_pos, n_test_pos and n_test_neg must be positive".to_string(),
            ));
        }
        Ok(())
    }
}

/// Fraction of pairs `(predicted_positive, is_positive)` that agree.
pub fn accuracy(predictions: &[(bool, bool)]) -> Result<f64, EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::EmptyPredictions);
    }
    let correct = predictions.iter().filter(|(p, a)| p == a).count();
    Ok(correct as f64 / predictions.len() as f64)
}

/// Classifies each sentence with a store built from that sentence alone, so
/// the result for one sentence never depends on the others.
pub fn classify_split(
    program: &[Clause],
    sentences: &[Vec<String>],
    target: &str,
    snapshot: &Snapshot,
    options: &BkOptions,
    depth_limit: usize,
) -> Result<Vec<bool>, EvalError> {
    let categories = [target.to_string()];
    sentences
        .iter()
        .map(|words| {
            if words.is_empty() || program.is_empty() {
                return Ok(false);
            }
            let store = example_store(words, &categories, snapshot, options)?;
            Ok(entails(program, &store, &example_atom(words, target), depth_limit))
        })
        .collect()
}

struct Pools<'a> {
    train: &'a Dataset,
    test: &'a Dataset,
    separate: bool,
}

/// Repeated one-shot evaluation where train and test examples come from the
/// same dataset.
pub fn average_one_shot(
    dataset: &Dataset,
    plan: &TrialPlan,
    snapshot: &Snapshot,
    options: &BkOptions,
    engine: &EngineDefaults,
) -> Result<AccuracyReport, EvalError> {
    let pools = Pools {
        train: dataset,
        test: dataset,
        separate: false,
    };
    run(&pools, plan, snapshot, options, engine)
}

/// Like [`average_one_shot`], drawing training examples from `train` and
/// test examples from `test`. Test samples whose text was drawn for training
/// are never used.
pub fn average_one_shot_split(
    train: &Dataset,
    test: &Dataset,
    plan: &TrialPlan,
    snapshot: &Snapshot,
    options: &BkOptions,
    engine: &EngineDefaults,
) -> Result<AccuracyReport, EvalError> {
    let pools = Pools {
        train,
        test,
        separate: true,
    };
    run(&pools, plan, snapshot, options, engine)
}

fn run(
    pools: &Pools<'_>,
    plan: &TrialPlan,
    snapshot: &Snapshot,
    options: &BkOptions,
    engine: &EngineDefaults,
) -> Result<AccuracyReport, EvalError> {
    plan.validate()?;
    let options = BkOptions {
        split_per_example: true,
        ..*options
    };
    options.validate()?;
    let target = plan.target_category.as_str();
    let (pos, neg) = pools.train.partition(target);
    if pos.is_empty() {
        return Err(EvalError::UnknownCategory(target.to_string()));
    }
    feasible("training positive", plan.n_pos, pos.len())?;
    feasible("training negative", plan.n_neg, neg.len())?;
    let (test_pos, test_neg) = pools.test.partition(target);
    let spare = |n: usize, m: usize| if pools.separate { n } else { n.saturating_sub(m) };
    feasible("test positive", plan.n_test_pos, spare(test_pos.len(), plan.n_pos))?;
    feasible("test negative", plan.n_test_neg, spare(test_neg.len(), plan.n_neg))?;

    let per_trial = (0..plan.n_trials)
        .into_par_iter()
        .map(|i| trial(pools, plan, i, &options, snapshot, engine))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AccuracyReport::new(per_trial, plan.clone()))
}

fn feasible(what: &'static str, needed: usize, available: usize) -> Result<(), EvalError> {
    if needed > available {
        return Err(EvalError::Infeasible {
            what,
            needed,
            available,
        });
    }
    Ok(())
}

fn draw(rng: &mut ChaCha8Rng, pool: &[usize], n: usize) -> Vec<usize> {
    index::sample(rng, pool.len(), n).into_iter().map(|i| pool[i]).collect()
}

fn trial(
    pools: &Pools<'_>,
    plan: &TrialPlan,
    trial_index: usize,
    options: &BkOptions,
    snapshot: &Snapshot,
    engine: &EngineDefaults,
) -> Result<TrialResult, EvalError> {
    let target = plan.target_category.as_str();
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    rng.set_stream(trial_index as u64);

    let (pos, neg) = pools.train.partition(target);
    let train_pos = draw(&mut rng, &pos, plan.n_pos);
    let train_neg = draw(&mut rng, &neg, plan.n_neg);
    let train_texts: Vec<&str> = train_pos
        .iter()
        .chain(&train_neg)
        .map(|&i| pools.train.samples[i].text.as_str())
        .collect();

    let (test_pos, test_neg) = pools.test.partition(target);
    let unused = |pool: Vec<usize>| -> Vec<usize> {
        pool.into_iter()
            .filter(|&i| !train_texts.contains(&pools.test.samples[i].text.as_str()))
            .collect()
    };
    let test_pos = unused(test_pos);
    let test_neg = unused(test_neg);
    feasible("test positive", plan.n_test_pos, test_pos.len())?;
    feasible("test negative", plan.n_test_neg, test_neg.len())?;
    let test_pos = draw(&mut rng, &test_pos, plan.n_test_pos);
    let test_neg = draw(&mut rng, &test_neg, plan.n_test_neg);

    let words_of = |d: &Dataset, i: usize| -> Vec<String> { tokenize(&d.samples[i].text) };
    let categories = [target.to_string()];
    let mut background = FactStore::new();
    let mut atoms = |idx: &[usize]| -> Result<Vec<Atom>, EvalError> {
        let mut out = Vec::new();
        for &i in idx {
            let words = words_of(pools.train, i);
            if words.is_empty() {
                return Err(EvalError::EmptyTrainingText(pools.train.samples[i].text.clone()));
            }
            let part = example_store(&words, &categories, snapshot, options)?;
            background.extend_from(&part).expect("stores share arities");
            out.push(example_atom(&words, target));
        }
        Ok(out)
    };
    let positives = atoms(&train_pos)?;
    let mut negatives = atoms(&train_neg)?;
    negatives.retain(|n| !positives.contains(n));

    let task = engine.task(background, positives, negatives);
    let hypothesis = learn(&task)?;
    let program = hypothesis.as_ref().map(|h| h.program()).unwrap_or_default();

    let test: Vec<(Vec<String>, bool)> = test_pos
        .iter()
        .map(|&i| (words_of(pools.test, i), true))
        .chain(test_neg.iter().map(|&i| (words_of(pools.test, i), false)))
        .collect();
    let sentences: Vec<Vec<String>> = test.iter().map(|(w, _)| w.clone()).collect();
    let predicted = classify_split(&program, &sentences, target, snapshot, options, engine.depth_limit)?;
    let pairs: Vec<(bool, bool)> = predicted.iter().zip(&test).map(|(&p, (_, a))| (p, *a)).collect();

    Ok(TrialResult {
        trial_index,
        accuracy: accuracy(&pairs)?,
        hypothesis_render: hypothesis.as_ref().map(|h| h.render()).unwrap_or_default(),
        learn_failed: hypothesis.is_none(),
        train_texts: train_texts.iter().map(|s| s.to_string()).collect(),
        test_texts: test_pos
            .iter()
            .chain(&test_neg)
            .map(|&i| pools.test.samples[i].text.clone())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_counts() {
        assert_eq!(accuracy(&[(true, true), (false, false)]).unwrap(), 1.0);
        let blind = [(true, true), (true, false), (true, true), (true, false)];
        assert_eq!(accuracy(&blind).unwrap(), 0.5);
        let seven: Vec<(bool, bool)> = (0..10).map(|i| (i < 7, true)).collect();
        assert_eq!(accuracy(&seven).unwrap(), 0.7);
        assert!(matches!(accuracy(&[]), Err(EvalError::EmptyPredictions)));
    }

    #[test]
    fn plan_validation() {
        let mut p = TrialPlan::task_default("family", 1);
        assert!(p.validate().is_ok());
        p.n_trials = 0;
        assert!(p.validate().is_err());
    }
}
