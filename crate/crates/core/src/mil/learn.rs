//! Proof-directed hypothesis search.
//!
//! Positives are proved as one goal stack. A goal is resolved against
//! background facts, then against clauses already in the hypothesis, then by
//! abducing a new metarule instance whose head matches it. Every abduced clause
//! is checked against the negatives straight away: entailment only grows with
//! the program, so a clause set that proves a negative can never be repaired.
//! The clause budget is raised from 0 to `max_clauses`, so the first program
//! found has the fewest clauses.

use std::collections::BTreeSet;
use std::fmt;

use smallvec::SmallVec;
use thiserror::Error;

use crate::store::FactStore;
use crate::term::{is_constant_symbol, render, Atom, Clause};

use super::compiled::{candidate_rows, Bindings, CAtom, CClause, CTerm, CompiledBk, Goal, Interner, Sym, Val};
use super::metarule::{canonicalize, HypothesisClause, MetaArg, Metarule, PredSlot};

pub const DEFAULT_MAX_CLAUSES: usize = 4;
pub const DEFAULT_DEPTH_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnError {
    #[error("task has no positive examples")]
    NoPositives,
    #[error("example `{0}` is not ground")]
    NonGroundExample(String),
    #[error("example `{example}` does not match target `{target}/{arity}`")]
    TargetMismatch {
        example: String,
        target: String,
        arity: usize,
    },
    #[error("max_clauses must be at least 1")]
    ZeroMaxClauses,
    #[error("depth_limit must be at least 1")]
    ZeroDepthLimit,
    #[error("`{0}` is not a valid symbol")]
    BadSymbol(String),
}

/// Inputs of one learning problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnTask {
    pub metarules: Vec<Metarule>,
    pub background: FactStore,
    pub positives: Vec<Atom>,
    pub negatives: Vec<Atom>,
    /// Body predicates the learner may use, in search order.
    pub predicate_pool: Vec<String>,
    /// Constants allowed in constant slots, in search order.
    pub constant_pool: Vec<String>,
    pub max_clauses: usize,
    pub depth_limit: usize,
}

impl LearnTask {
    /// A task with default bounds, the background's predicates as the pool
    /// and no constants.
    pub fn new(
        metarules: Vec<Metarule>,
        background: FactStore,
        positives: Vec<Atom>,
        negatives: Vec<Atom>,
    ) -> Self {
        let predicate_pool = background.predicates();
        LearnTask {
            metarules,
            background,
            positives,
            negatives,
            predicate_pool,
            constant_pool: Vec::new(),
            max_clauses: DEFAULT_MAX_CLAUSES,
            depth_limit: DEFAULT_DEPTH_LIMIT,
        }
    }

    pub fn with_predicate_pool<I, S>(mut self, pool: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.predicate_pool = pool.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_constant_pool<I, S>(mut self, pool: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.constant_pool = pool.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_max_clauses(mut self, n: usize) -> Self {
        self.max_clauses = n;
        self
    }

    pub fn with_depth_limit(mut self, n: usize) -> Self {
        self.depth_limit = n;
        self
    }

    /// Target predicate and arity, taken from the first positive.
    pub fn target(&self) -> Option<(&str, usize)> {
        self.positives
            .first()
            .map(|a| (a.predicate.as_str(), a.arity()))
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        let (target, arity) = self.target().ok_or(LearnError::NoPositives)?;
        if self.max_clauses == 0 {
            return Err(LearnError::ZeroMaxClauses);
        }
        if self.depth_limit == 0 {
            return Err(LearnError::ZeroDepthLimit);
        }
        for e in self.positives.iter().chain(&self.negatives) {
            if !e.is_ground() {
                return Err(LearnError::NonGroundExample(e.to_string()));
            }
            if e.predicate != target || e.arity() != arity {
                return Err(LearnError::TargetMismatch {
                    example: e.to_string(),
                    target: target.to_string(),
                    arity,
                });
            }
        }
        if let Some(bad) = self
            .predicate_pool
            .iter()
            .chain(&self.constant_pool)
            .find(|s| !is_constant_symbol(s))
        {
            return Err(LearnError::BadSymbol(bad.clone()));
        }
        Ok(())
    }

    /// Names available for invented predicates, in the order they are used.
    pub fn invented_names(&self) -> Vec<String> {
        let Some((target, _)) = self.target() else {
            return Vec::new();
        };
        let mut taken: BTreeSet<String> = self.background.predicates().into_iter().collect();
        taken.extend(self.predicate_pool.iter().cloned());
        taken.insert(target.to_string());
        let mut out = Vec::new();
        for _ in 1..self.max_clauses {
            let name = invent_symbol(target, &taken);
            taken.insert(name.clone());
            out.push(name);
        }
        out
    }
}

/// A learned program. Clauses for the target come first, then each invented
/// predicate's clauses in order of invention.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Hypothesis {
    pub clauses: Vec<HypothesisClause>,
    pub invented: Vec<String>,
}

impl Hypothesis {
    pub fn program(&self) -> Vec<Clause> {
        self.clauses.iter().map(|c| c.clause.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Canonical text, one clause per line.
    pub fn render(&self) -> String {
        render(&self.program())
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// `<target>_<k>` for the smallest `k >= 1` not in `existing`.
pub fn invent_symbol(target: &str, existing: &BTreeSet<String>) -> String {
    (1..)
        .map(|k| format!("{target}_{k}"))
        .find(|s| !existing.contains(s))
        .expect("unbounded range")
}

/// Searches for a minimal program that entails every positive and no
/// negative. `Ok(None)` means no such program exists within the task bounds.
pub fn learn(task: &LearnTask) -> Result<Option<Hypothesis>, LearnError> {
    task.validate()?;
    let ctx = Context::new(task);
    let mut st = State::default();
    if ctx.any_negative(&mut st) {
        return Ok(None);
    }
    for budget in 0..=task.max_clauses {
        st = State::default();
        let mut items: Vec<Item> = ctx.positives.iter().rev().cloned().map(Item::Goal).collect();
        if ctx.solve(&mut st, &mut items, budget, true) == Flow::Proved {
            log::debug!("hypothesis found with {budget} clause budget");
            return Ok(Some(ctx.hypothesis(&st)));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy)]
enum TPred {
    Var(usize),
    Fixed(Sym),
}

#[derive(Debug, Clone, Copy)]
enum TArg {
    Var(u32),
    Slot(usize),
    Sym(Sym),
}

#[derive(Debug, Clone)]
struct TAtom {
    pred: TPred,
    args: Vec<TArg>,
}

/// A metarule over interned symbols.
#[derive(Debug, Clone)]
struct Template {
    head: TAtom,
    body: Vec<TAtom>,
    npred: usize,
    nslot: usize,
    nvars: u32,
    /// Other task metarules that generate a subset of this one's instances.
    /// Such instances are left to them so each clause has one origin.
    shadowed_by: Vec<usize>,
}

impl Template {
    fn compile(m: &Metarule, interner: &mut Interner) -> Self {
        let preds = m.predicate_vars();
        let slots = m.constant_slots();
        let mut vars: Vec<String> = Vec::new();
        let mut atom = |a: &super::metarule::MetaAtom, interner: &mut Interner| TAtom {
            pred: match &a.pred {
                PredSlot::Var(v) => TPred::Var(preds.iter().position(|p| *p == v.as_str()).unwrap()),
                PredSlot::Fixed(s) => TPred::Fixed(interner.intern(s)),
            },
            args: a
                .args
                .iter()
                .map(|arg| match arg {
                    MetaArg::Var(v) => {
                        let i = vars.iter().position(|x| x == v).unwrap_or_else(|| {
                            vars.push(v.clone());
                            vars.len() - 1
                        });
                        TArg::Var(i as u32)
                    }
                    MetaArg::Slot(s) => TArg::Slot(slots.iter().position(|x| *x == s.as_str()).unwrap()),
                    MetaArg::Const(c) => TArg::Sym(interner.intern(c)),
                })
                .collect(),
        };
        let head = atom(&m.head, interner);
        let body = m.body.iter().map(|a| atom(a, interner)).collect();
        Template {
            head,
            body,
            npred: preds.len(),
            nslot: slots.len(),
            nvars: vars.len() as u32,
            shadowed_by: Vec::new(),
        }
    }

    fn instance(&self, preds: &[Sym], consts: &[Sym]) -> CClause {
        let atom = |a: &TAtom| CAtom {
            pred: match a.pred {
                TPred::Var(i) => preds[i],
                TPred::Fixed(s) => s,
            },
            args: a
                .args
                .iter()
                .map(|t| match *t {
                    TArg::Var(i) => CTerm::Var(i),
                    TArg::Slot(j) => CTerm::Sym(consts[j]),
                    TArg::Sym(s) => CTerm::Sym(s),
                })
                .collect(),
        };
        // Template variables are numbered by first occurrence, so the
        // instance is already in the canonical compiled form.
        CClause {
            head: atom(&self.head),
            body: self.body.iter().map(atom).collect(),
            nvars: self.nvars,
        }
    }

    /// Whether `clause` is an instance of this template up to variable names.
    fn covers(&self, clause: &CClause) -> bool {
        if clause.body.len() != self.body.len() {
            return false;
        }
        let mut preds: Vec<Option<Sym>> = vec![None; self.npred];
        let mut consts: Vec<Option<Sym>> = vec![None; self.nslot];
        let mut fwd: Vec<Option<u32>> = vec![None; self.nvars as usize];
        let mut back: Vec<Option<u32>> = vec![None; clause.nvars as usize];
        let pairs = std::iter::once((&self.head, &clause.head)).chain(self.body.iter().zip(&clause.body));
        for (t, c) in pairs {
            if t.args.len() != c.args.len() {
                return false;
            }
            let pred_ok = match t.pred {
                TPred::Fixed(s) => s == c.pred,
                TPred::Var(i) => *preds[i].get_or_insert(c.pred) == c.pred,
            };
            if !pred_ok {
                return false;
            }
            for (ta, ca) in t.args.iter().zip(&c.args) {
                let ok = match (*ta, *ca) {
                    (TArg::Var(i), CTerm::Var(j)) => {
                        *fwd[i as usize].get_or_insert(j) == j && *back[j as usize].get_or_insert(i) == i
                    }
                    (TArg::Slot(s), CTerm::Sym(x)) => *consts[s].get_or_insert(x) == x,
                    (TArg::Sym(a), CTerm::Sym(b)) => a == b,
                    _ => false,
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }
}

struct Abduced {
    clause: CClause,
    meta: usize,
}

#[derive(Default)]
struct State {
    program: Vec<Abduced>,
    /// Invented names introduced so far (a prefix of `Context::invented`).
    used: usize,
    bindings: Bindings,
    next_barrier: u32,
}

#[derive(Debug, Clone)]
enum Item {
    Goal(Goal),
    /// Marks the end of a ground goal's proof. `plen` is the program length
    /// when that goal was started.
    Barrier { id: u32, plen: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Flow {
    Proved,
    Failed,
    /// Unwind to the goal that owns this barrier and fail it.
    Cut(u32),
}

struct Context {
    interner: Interner,
    bk: CompiledBk,
    templates: Vec<Template>,
    names: Vec<String>,
    pool: Vec<Sym>,
    consts: Vec<Sym>,
    target: Sym,
    invented: Vec<Sym>,
    positives: Vec<Goal>,
    negatives: Vec<Goal>,
}

impl Context {
    fn new(task: &LearnTask) -> Self {
        let mut interner = Interner::default();
        let bk = CompiledBk::compile(&task.background, &mut interner);
        let depth = task.depth_limit as u32;
        let positives = task
            .positives
            .iter()
            .map(|a| Goal::ground(a, &mut interner, depth))
            .collect();
        let negatives = task
            .negatives
            .iter()
            .map(|a| Goal::ground(a, &mut interner, depth))
            .collect();
        let target = interner.intern(task.target().expect("validated").0);
        let invented: Vec<Sym> = task
            .invented_names()
            .iter()
            .map(|n| interner.intern(n))
            .collect();
        let mut pool: Vec<Sym> = Vec::new();
        for p in &task.predicate_pool {
            let s = interner.intern(p);
            if !pool.contains(&s) && !invented.contains(&s) {
                pool.push(s);
            }
        }
        let mut consts: Vec<Sym> = Vec::new();
        for c in &task.constant_pool {
            let s = interner.intern(c);
            if !consts.contains(&s) {
                consts.push(s);
            }
        }
        let mut templates: Vec<Template> = task
            .metarules
            .iter()
            .map(|m| Template::compile(m, &mut interner))
            .collect();
        let shapes: Vec<(usize, usize)> = templates.iter().map(|t| (t.npred, t.body.len())).collect();
        for (i, t) in templates.iter_mut().enumerate() {
            t.shadowed_by = shapes
                .iter()
                .enumerate()
                .filter(|&(j, &(np, nb))| j != i && nb == shapes[i].1 && np < shapes[i].0)
                .map(|(j, _)| j)
                .collect();
        }
        Context {
            interner,
            bk,
            templates,
            names: task.metarules.iter().map(|m| m.name.clone()).collect(),
            pool,
            consts,
            target,
            invented,
            positives,
            negatives,
        }
    }

    fn invented_index(&self, pred: Sym) -> Option<usize> {
        self.invented.iter().position(|&s| s == pred)
    }

    fn is_defined(&self, st: &State, pred: Sym) -> bool {
        st.program.iter().any(|a| a.clause.head.pred == pred)
    }

    /// Whether the current program proves any negative.
    fn any_negative(&self, st: &mut State) -> bool {
        let mark = st.bindings.mark();
        let vars = st.bindings.len();
        let mut items = Vec::new();
        for neg in &self.negatives {
            items.clear();
            items.push(Item::Goal(neg.clone()));
            let hit = self.solve(st, &mut items, 0, false) == Flow::Proved;
            st.bindings.undo(mark, vars);
            if hit {
                return true;
            }
        }
        false
    }

    fn solve(&self, st: &mut State, items: &mut Vec<Item>, budget: usize, abduce: bool) -> Flow {
        let goal = match items.pop() {
            None => return Flow::Proved,
            Some(Item::Barrier { id, plen }) => {
                let flow = self.solve(st, items, budget, abduce);
                items.push(Item::Barrier { id, plen });
                return match flow {
                    Flow::Failed if st.program.len() == plen => Flow::Cut(id),
                    other => other,
                };
            }
            Some(Item::Goal(g)) => g,
        };
        if goal.depth == 0 {
            items.push(Item::Goal(goal));
            return Flow::Failed;
        }
        let mark = st.bindings.mark();
        let vars = st.bindings.len();
        let height = items.len();
        let abducible = goal.pred == self.target
            || self.invented_index(goal.pred).is_some_and(|i| i < st.used);

        // A ground goal leaves no bindings behind, so once it is proved
        // without growing the program its other proofs cannot help later
        // goals: any clause they would add can be abduced later instead.
        let barrier = (abduce
            && abducible
            && goal
                .args
                .iter()
                .all(|&a| matches!(st.bindings.deref(a), Val::Sym(_))))
        .then(|| {
            st.next_barrier += 1;
            (st.next_barrier, st.program.len())
        });
        let push_barrier = |items: &mut Vec<Item>| {
            if let Some((id, plen)) = barrier {
                items.push(Item::Barrier { id, plen });
            }
        };
        macro_rules! attempt {
            () => {{
                let flow = self.solve(st, items, budget, abduce);
                match flow {
                    Flow::Proved => return Flow::Proved,
                    Flow::Cut(id) if barrier.is_some_and(|(own, _)| own == id) => {
                        items.truncate(height);
                        st.bindings.undo(mark, vars);
                        items.push(Item::Goal(goal));
                        return Flow::Failed;
                    }
                    Flow::Cut(id) => {
                        items.truncate(height);
                        st.bindings.undo(mark, vars);
                        items.push(Item::Goal(goal));
                        return Flow::Cut(id);
                    }
                    Flow::Failed => {
                        items.truncate(height);
                        st.bindings.undo(mark, vars);
                    }
                }
            }};
        }

        if let Some(rel) = self.bk.relation(goal.pred) {
            if rel.arity == goal.args.len() {
                for r in candidate_rows(rel, &goal.args, &st.bindings) {
                    let row = rel.row(r);
                    if goal
                        .args
                        .iter()
                        .zip(row)
                        .all(|(&a, &s)| st.bindings.unify(a, Val::Sym(s)))
                    {
                        push_barrier(items);
                        attempt!();
                    } else {
                        st.bindings.undo(mark, vars);
                    }
                }
            }
        }

        for i in 0..st.program.len() {
            if !self.apply_clause(st, i, &goal, items, &push_barrier) {
                st.bindings.undo(mark, vars);
                continue;
            }
            attempt!();
        }

        if abduce && abducible && st.program.len() < budget {
            for m in 0..self.templates.len() {
                for (preds, used) in self.predicate_choices(st, m, goal.pred) {
                    for consts in self.constant_choices(m) {
                        let clause = self.templates[m].instance(&preds, &consts);
                        if !self.admissible(st, m, &clause, used, budget) {
                            continue;
                        }
                        let saved_used = st.used;
                        st.program.push(Abduced { clause, meta: m });
                        st.used = used;
                        let i = st.program.len() - 1;
                        if self.apply_clause(st, i, &goal, items, &push_barrier) {
                            // The negative check runs on top of the current
                            // bindings and leaves them as they were.
                            if !self.any_negative(st) {
                                let flow = self.solve(st, items, budget, abduce);
                                if flow == Flow::Proved {
                                    return Flow::Proved;
                                }
                                items.truncate(height);
                                st.bindings.undo(mark, vars);
                                st.program.pop();
                                st.used = saved_used;
                                match flow {
                                    Flow::Cut(id) if barrier.is_some_and(|(own, _)| own == id) => {
                                        items.push(Item::Goal(goal));
                                        return Flow::Failed;
                                    }
                                    Flow::Cut(id) => {
                                        items.push(Item::Goal(goal));
                                        return Flow::Cut(id);
                                    }
                                    _ => continue,
                                }
                            }
                        }
                        items.truncate(height);
                        st.bindings.undo(mark, vars);
                        st.program.pop();
                        st.used = saved_used;
                    }
                }
            }
        }

        items.push(Item::Goal(goal));
        Flow::Failed
    }

    /// Unifies the head of program clause `i` with `goal` and pushes its body.
    /// On failure the caller undoes the bindings.
    fn apply_clause(
        &self,
        st: &mut State,
        i: usize,
        goal: &Goal,
        items: &mut Vec<Item>,
        push_barrier: &dyn Fn(&mut Vec<Item>),
    ) -> bool {
        let clause = &st.program[i].clause;
        if clause.head.pred != goal.pred || clause.head.args.len() != goal.args.len() {
            return false;
        }
        let base = st.bindings.alloc(clause.nvars);
        let head_ok = clause
            .head
            .args
            .iter()
            .zip(goal.args.iter())
            .all(|(&t, &a)| st.bindings.unify(Bindings::instance(base, t), a));
        if !head_ok {
            return false;
        }
        push_barrier(items);
        for atom in clause.body.iter().rev() {
            items.push(Item::Goal(Goal::from_atom(atom, base, goal.depth - 1)));
        }
        true
    }

    /// Predicate assignments for template `m` whose head predicate is `head`,
    /// each with the invented-name count after it. Body variables range over
    /// the pool, then invented names in use, then the next fresh name, then
    /// the target.
    fn predicate_choices(&self, st: &State, m: usize, head: Sym) -> Vec<(SmallVec<[Sym; 4]>, usize)> {
        let t = &self.templates[m];
        let mut fixed: SmallVec<[Option<Sym>; 4]> = SmallVec::from_elem(None, t.npred);
        match t.head.pred {
            TPred::Var(i) => fixed[i] = Some(head),
            TPred::Fixed(s) if s == head => {}
            TPred::Fixed(_) => return Vec::new(),
        }
        let mut out = Vec::new();
        let mut current: SmallVec<[Sym; 4]> = SmallVec::new();
        self.assign(&fixed, 0, st.used, &mut current, &mut out);
        out
    }

    fn assign(
        &self,
        fixed: &[Option<Sym>],
        j: usize,
        used: usize,
        current: &mut SmallVec<[Sym; 4]>,
        out: &mut Vec<(SmallVec<[Sym; 4]>, usize)>,
    ) {
        if j == fixed.len() {
            out.push((current.clone(), used));
            return;
        }
        if let Some(s) = fixed[j] {
            current.push(s);
            self.assign(fixed, j + 1, used, current, out);
            current.pop();
            return;
        }
        let mut candidates: SmallVec<[(Sym, usize); 12]> = SmallVec::new();
        for &p in &self.pool {
            candidates.push((p, used));
        }
        for &p in &self.invented[..used] {
            candidates.push((p, used));
        }
        if used < self.invented.len() {
            candidates.push((self.invented[used], used + 1));
        }
        if !self.pool.contains(&self.target) {
            candidates.push((self.target, used));
        }
        for (p, u) in candidates {
            current.push(p);
            self.assign(fixed, j + 1, u, current, out);
            current.pop();
        }
    }

    fn constant_choices(&self, m: usize) -> Vec<SmallVec<[Sym; 2]>> {
        let n = self.templates[m].nslot;
        let mut out: Vec<SmallVec<[Sym; 2]>> = vec![SmallVec::new()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    self.consts.iter().map(move |&c| {
                        let mut next = prefix.clone();
                        next.push(c);
                        next
                    })
                })
                .collect();
        }
        out
    }

    /// Budget, duplicate and shadowing checks for a candidate clause.
    fn admissible(&self, st: &State, m: usize, clause: &CClause, used: usize, budget: usize) -> bool {
        if st.program.iter().any(|a| &a.clause == clause) {
            return false;
        }
        let t = &self.templates[m];
        if t.shadowed_by.iter().any(|&o| self.templates[o].covers(clause)) {
            return false;
        }
        // Every invented predicate still lacking a clause needs one more.
        let undefined = self.invented[..used]
            .iter()
            .filter(|&&p| p != clause.head.pred && !self.is_defined(st, p))
            .count();
        st.program.len() + 1 + undefined <= budget
    }

    fn hypothesis(&self, st: &State) -> Hypothesis {
        let rank = |pred: Sym| {
            if pred == self.target {
                0
            } else {
                1 + self.invented_index(pred).unwrap_or(self.invented.len())
            }
        };
        let mut program: Vec<&Abduced> = st.program.iter().collect();
        program.sort_by_key(|a| rank(a.clause.head.pred));
        Hypothesis {
            clauses: program
                .into_iter()
                .map(|a| HypothesisClause {
                    clause: canonicalize(&a.clause.decode(&self.interner)),
                    metarule: self.names[a.meta].clone(),
                })
                .collect(),
            invented: self.invented[..st.used]
                .iter()
                .map(|&s| self.interner.name(s).to_string())
                .collect(),
        }
    }
}
