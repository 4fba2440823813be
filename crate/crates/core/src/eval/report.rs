//! Accuracy reports and their text form.

use std::fmt::Write;

use serde::Serialize;

use super::TrialPlan;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial_index: usize,
    pub accuracy: f64,
    /// Empty when learning failed.
    pub hypothesis_render: String,
    /// No hypothesis was found, so every test example was predicted negative.
    pub learn_failed: bool,
    pub train_texts: Vec<String>,
    pub test_texts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub per_trial: Vec<TrialResult>,
    pub mean_accuracy: f64,
    pub config_echo: TrialPlan,
}

impl AccuracyReport {
    /// Sums in trial order so the mean does not depend on scheduling.
    pub fn new(per_trial: Vec<TrialResult>, plan: TrialPlan) -> Self {
        let mean_accuracy = if per_trial.is_empty() {
            0.0
        } else {
            per_trial.iter().map(|t| t.accuracy).sum::<f64>() / per_trial.len() as f64
        };
        AccuracyReport {
            per_trial,
            mean_accuracy,
            config_echo: plan,
        }
    }

    /// Population standard deviation of the per-trial accuracies.
    pub fn stddev(&self) -> f64 {
        let n = self.per_trial.len() as f64;
        if n == 0.0 {
            return 0.0;
        }
        let var = self
            .per_trial
            .iter()
            .map(|t| (t.accuracy - self.mean_accuracy).powi(2))
            .sum::<f64>()
            / n;
        var.sqrt()
    }

    pub fn failures(&self) -> usize {
        self.per_trial.iter().filter(|t| t.learn_failed).count()
    }

    /// `key: value` lines, one block per trial.
    pub fn render(&self) -> String {
        let p = &self.config_echo;
        let mut out = String::new();
        let _ = writeln!(out, "target_category: {}", p.target_category);
        let _ = writeln!(out, "seed: {}", p.seed);
        let _ = writeln!(out, "n_trials: {}", p.n_trials);
        let _ = writeln!(out, "n_pos: {}", p.n_pos);
        let _ = writeln!(out, "n_neg: {}", p.n_neg);
        let _ = writeln!(out, "n_test_pos: {}", p.n_test_pos);
        let _ = writeln!(out, "n_test_neg: {}", p.n_test_neg);
        let _ = writeln!(out, "mean_accuracy: {:?}", self.mean_accuracy);
        let _ = writeln!(out, "stddev: {:?}", self.stddev());
        let _ = writeln!(out, "learn_failures: {}", self.failures());
        for t in &self.per_trial {
            out.push('\n');
            let _ = writeln!(out, "trial: {}", t.trial_index);
            let _ = writeln!(out, "accuracy: {:?}", t.accuracy);
            let _ = writeln!(out, "learn_failed: {}", t.learn_failed);
            for text in &t.train_texts {
                let _ = writeln!(out, "train: {text}");
            }
            for rule in t.hypothesis_render.lines() {
                let _ = writeln!(out, "rule: {rule}");
            }
        }
        out
    }
}
