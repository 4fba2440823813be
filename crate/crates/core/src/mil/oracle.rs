//! Exhaustive reference learner.
//!
//! Enumerates every set of metarule instances in order of size and returns
//! the first that entails all positives and no negative. Only used to check
//! the real learner.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::term::render_clause;

use super::learn::{Hypothesis, LearnError, LearnTask};
use super::metarule::{HypothesisClause, PredSlot};
use super::prove::Prover;

/// Upper bound on the number of candidate programs.
pub const MAX_PROGRAMS: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Task(#[from] LearnError),
    #[error("search space of {size} programs exceeds the limit of {limit}")]
    SpaceTooLarge { size: u128, limit: u128 },
}

struct Candidate {
    clause: HypothesisClause,
    /// Bit 0 is the target, bit i+1 the i-th invented name.
    head: u32,
    body: u32,
}

/// Every metarule instance with a target or invented head, deduplicated by
/// canonical text.
fn clause_space(task: &LearnTask, invented: &[String]) -> Vec<Candidate> {
    let target = task.target().expect("validated").0.to_string();
    let mut heads = vec![target.clone()];
    heads.extend(invented.iter().cloned());
    let mut symbols: Vec<String> = Vec::new();
    for p in task.predicate_pool.iter().chain([&target]).chain(invented) {
        if !symbols.contains(p) {
            symbols.push(p.clone());
        }
    }
    let bit = |p: &str| heads.iter().position(|h| h == p).map_or(0, |i| 1u32 << i);

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for m in &task.metarules {
        let vars = m.predicate_vars();
        let slots = m.constant_slots();
        let head_var = match &m.head.pred {
            PredSlot::Var(v) => Some(v.clone()),
            PredSlot::Fixed(_) => None,
        };
        for head in &heads {
            if let PredSlot::Fixed(s) = &m.head.pred {
                if s != head {
                    continue;
                }
            }
            let free: Vec<&str> = vars
                .iter()
                .copied()
                .filter(|v| Some(v.to_string()) != head_var)
                .collect();
            for preds in product(&symbols, free.len()) {
                for consts in product(&task.constant_pool, slots.len()) {
                    let mut p: BTreeMap<String, String> = free
                        .iter()
                        .zip(&preds)
                        .map(|(v, s)| (v.to_string(), s.clone()))
                        .collect();
                    if let Some(h) = &head_var {
                        p.insert(h.clone(), head.clone());
                    }
                    let c = slots
                        .iter()
                        .zip(&consts)
                        .map(|(s, v)| (s.to_string(), v.clone()))
                        .collect();
                    let Ok(inst) = m.instantiate(&p, &c) else {
                        continue;
                    };
                    if !seen.insert(render_clause(&inst.clause)) {
                        continue;
                    }
                    let body = inst
                        .clause
                        .body
                        .iter()
                        .fold(0, |acc, a| acc | bit(&a.predicate));
                    out.push(Candidate {
                        head: bit(&inst.clause.head.predicate),
                        body,
                        clause: inst,
                    });
                }
            }
        }
    }
    out
}

/// All length-`n` sequences over `items`, first position slowest.
fn product(items: &[String], n: usize) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<String>| {
                items.iter().map(move |x| {
                    let mut next = prefix.clone();
                    next.push(x.clone());
                    next
                })
            })
            .collect();
    }
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// Number of programs the oracle would enumerate for `task`.
pub fn search_space(task: &LearnTask) -> Result<u128, OracleError> {
    task.validate()?;
    let n = clause_space(task, &task.invented_names()).len() as u128;
    Ok((0..=task.max_clauses as u128).fold(0u128, |acc, k| acc.saturating_add(binomial(n, k))))
}

/// Structural filters that never reject a minimal solution: some clause
/// defines the target, invented names are used as a prefix and all defined,
/// and every clause is reachable from the target.
fn well_formed(space: &[Candidate], combo: &[usize]) -> bool {
    if combo.is_empty() {
        return true;
    }
    let heads = combo.iter().fold(0, |acc, &i| acc | space[i].head);
    if heads & 1 == 0 {
        return false;
    }
    let used = combo.iter().fold(heads, |acc, &i| acc | space[i].body) >> 1;
    if used & (used + 1) != 0 || (used << 1) & !heads != 0 {
        return false;
    }
    let mut reach = 1u32;
    loop {
        let next = combo
            .iter()
            .filter(|&&i| space[i].head & reach != 0)
            .fold(reach, |acc, &i| acc | space[i].body);
        if next == reach {
            break;
        }
        reach = next;
    }
    combo.iter().all(|&i| space[i].head & reach != 0)
}

/// Advances `idx` to the next `k`-combination of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn brute_force_learn(task: &LearnTask) -> Result<Option<Hypothesis>, OracleError> {
    task.validate()?;
    let invented = task.invented_names();
    let space = clause_space(task, &invented);
    let n = space.len();
    let size = (0..=task.max_clauses as u128).fold(0u128, |acc, k| acc.saturating_add(binomial(n as u128, k)));
    if size > MAX_PROGRAMS {
        return Err(OracleError::SpaceTooLarge {
            size,
            limit: MAX_PROGRAMS,
        });
    }

    let mut prover = Prover::new(&task.background);
    let depth = task.depth_limit;
    let holds = |prover: &mut Prover| {
        task.positives.iter().all(|e| prover.entails(e, depth))
            && !task.negatives.iter().any(|e| prover.entails(e, depth))
    };
    let programs: Vec<_> = space.iter().map(|c| c.clause.clause.clone()).collect();

    for k in 0..=task.max_clauses.min(n) {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            if well_formed(&space, &idx) {
                let program: Vec<_> = idx.iter().map(|&i| programs[i].clone()).collect();
                prover.set_program(&program);
                if holds(&mut prover) {
                    let used = idx
                        .iter()
                        .fold(0, |acc, &i| acc | space[i].head | space[i].body)
                        >> 1;
                    return Ok(Some(Hypothesis {
                        clauses: idx.iter().map(|&i| space[i].clause.clone()).collect(),
                        invented: invented
                            .iter()
                            .take(used.count_ones() as usize)
                            .cloned()
                            .collect(),
                    }));
                }
            }
            if k == 0 || !next_combination(&mut idx, n) {
                break;
            }
        }
    }
    Ok(None)
}
