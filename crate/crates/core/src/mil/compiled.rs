//! Interned, index-backed forms of atoms, clauses and background knowledge.

use std::collections::HashMap;

use smallvec::SmallVec;

use crate::store::FactStore;
use crate::term::{Atom, Clause, Term};

pub(crate) type Sym = u32;

#[derive(Debug, Clone, Default)]
pub(crate) struct Interner {
    ids: HashMap<String, Sym>,
    names: Vec<String>,
}

impl Interner {
    pub fn intern(&mut self, name: &str) -> Sym {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as Sym;
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    pub fn name(&self, id: Sym) -> &str {
        &self.names[id as usize]
    }

    /// Ground terms are interned by their printed form, so a word list is a
    /// single symbol `[a,b]` distinct from any constant.
    pub fn intern_term(&mut self, term: &Term) -> Option<Sym> {
        match term {
            Term::Var(_) => None,
            other => Some(self.intern(&other.to_string())),
        }
    }

    pub fn term(&self, id: Sym) -> Term {
        let name = self.name(id);
        match name.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            Some("") => Term::WordList(Vec::new()),
            Some(inner) => Term::WordList(inner.split(',').map(str::to_string).collect()),
            None => Term::Const(name.to_string()),
        }
    }
}

/// Argument of a compiled clause: a clause-local variable or a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum CTerm {
    Var(u32),
    Sym(Sym),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct CAtom {
    pub pred: Sym,
    pub args: SmallVec<[CTerm; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct CClause {
    pub head: CAtom,
    pub body: Vec<CAtom>,
    pub nvars: u32,
}

impl CClause {
    pub fn compile(clause: &Clause, interner: &mut Interner) -> Self {
        let mut vars: Vec<String> = Vec::new();
        let mut atom = |a: &Atom, interner: &mut Interner| CAtom {
            pred: interner.intern(&a.predicate),
            args: a
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => {
                        let idx = vars.iter().position(|x| x == v).unwrap_or_else(|| {
                            vars.push(v.clone());
                            vars.len() - 1
                        });
                        CTerm::Var(idx as u32)
                    }
                    other => CTerm::Sym(interner.intern_term(other).expect("ground")),
                })
                .collect(),
        };
        let head = atom(&clause.head, interner);
        let body = clause.body.iter().map(|a| atom(a, interner)).collect();
        let nvars = vars.len() as u32;
        CClause { head, body, nvars }
    }

    pub fn decode(&self, interner: &Interner) -> Clause {
        let atom = |a: &CAtom| Atom {
            predicate: interner.name(a.pred).to_string(),
            args: a
                .args
                .iter()
                .map(|t| match *t {
                    CTerm::Var(i) => Term::Var(format!("V{i}")),
                    CTerm::Sym(s) => interner.term(s),
                })
                .collect(),
        };
        Clause {
            head: atom(&self.head),
            body: self.body.iter().map(atom).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Relation {
    pub arity: usize,
    rows: Vec<Sym>,
    /// Per argument position: symbol -> row indices.
    index: Vec<HashMap<Sym, Vec<u32>>>,
}

impl Relation {
    fn new(arity: usize) -> Self {
        Relation {
            arity,
            rows: Vec::new(),
            index: vec![HashMap::new(); arity],
        }
    }

    fn push(&mut self, row: &[Sym]) {
        let id = (self.rows.len() / self.arity.max(1)) as u32;
        for (pos, &s) in row.iter().enumerate() {
            self.index[pos].entry(s).or_default().push(id);
        }
        self.rows.extend_from_slice(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len().checked_div(self.arity).unwrap_or(0)
    }

    pub fn row(&self, i: u32) -> &[Sym] {
        let start = i as usize * self.arity;
        &self.rows[start..start + self.arity]
    }

    /// Rows whose argument `pos` equals `sym`, in insertion order.
    pub fn lookup(&self, pos: usize, sym: Sym) -> &[u32] {
        self.index[pos].get(&sym).map_or(&[], Vec::as_slice)
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct CompiledBk {
    relations: HashMap<Sym, Relation>,
}

impl CompiledBk {
    pub fn compile(store: &FactStore, interner: &mut Interner) -> Self {
        let mut relations: HashMap<Sym, Relation> = HashMap::new();
        let mut row = Vec::new();
        for fact in store.facts() {
            let pred = interner.intern(&fact.predicate);
            row.clear();
            row.extend(
                fact.args
                    .iter()
                    .map(|t| interner.intern_term(t).expect("facts are ground")),
            );
            relations
                .entry(pred)
                .or_insert_with(|| Relation::new(fact.arity()))
                .push(&row);
        }
        CompiledBk { relations }
    }

    pub fn relation(&self, pred: Sym) -> Option<&Relation> {
        self.relations.get(&pred)
    }
}

/// Runtime value of a goal argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Val {
    Var(u32),
    Sym(Sym),
}

/// Union-find style binding store with a trail for backtracking.
#[derive(Debug, Default)]
pub(crate) struct Bindings {
    cells: Vec<Option<Val>>,
    trail: Vec<u32>,
}

impl Bindings {
    pub fn clear(&mut self) {
        self.cells.clear();
        self.trail.clear();
    }

    /// Allocates `n` fresh variables and returns the index of the first.
    pub fn alloc(&mut self, n: u32) -> u32 {
        let base = self.cells.len() as u32;
        self.cells.resize(self.cells.len() + n as usize, None);
        base
    }

    pub fn len(&self) -> u32 {
        self.cells.len() as u32
    }

    pub fn mark(&self) -> usize {
        self.trail.len()
    }

    /// Undoes bindings made since `mark` and frees variables allocated at or
    /// after `vars`.
    pub fn undo(&mut self, mark: usize, vars: u32) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            if (v as usize) < self.cells.len() {
                self.cells[v as usize] = None;
            }
        }
        self.cells.truncate(vars as usize);
    }

    pub fn deref(&self, mut v: Val) -> Val {
        while let Val::Var(i) = v {
            match self.cells[i as usize] {
                Some(next) => v = next,
                None => return v,
            }
        }
        v
    }

    fn bind(&mut self, var: u32, val: Val) {
        self.cells[var as usize] = Some(val);
        self.trail.push(var);
    }

    pub fn unify(&mut self, a: Val, b: Val) -> bool {
        let a = self.deref(a);
        let b = self.deref(b);
        match (a, b) {
            (Val::Sym(x), Val::Sym(y)) => x == y,
            (Val::Var(x), Val::Var(y)) if x == y => true,
            (Val::Var(x), other) | (other, Val::Var(x)) => {
                self.bind(x, other);
                true
            }
        }
    }

    /// Value of a clause term under a renaming that starts at `base`.
    pub fn instance(base: u32, t: CTerm) -> Val {
        match t {
            CTerm::Var(i) => Val::Var(base + i),
            CTerm::Sym(s) => Val::Sym(s),
        }
    }
}

pub(crate) type Args = SmallVec<[Val; 3]>;

/// A pending subgoal with its remaining resolution budget.
#[derive(Debug, Clone)]
pub(crate) struct Goal {
    pub pred: Sym,
    pub args: Args,
    pub depth: u32,
}

impl Goal {
    pub fn from_atom(atom: &CAtom, base: u32, depth: u32) -> Self {
        Goal {
            pred: atom.pred,
            args: atom
                .args
                .iter()
                .map(|&t| Bindings::instance(base, t))
                .collect(),
            depth,
        }
    }

    /// Compiles a ground atom; unknown symbols are interned.
    pub fn ground(atom: &Atom, interner: &mut Interner, depth: u32) -> Self {
        Goal {
            pred: interner.intern(&atom.predicate),
            args: atom
                .args
                .iter()
                .map(|t| Val::Sym(interner.intern_term(t).expect("goal must be ground")))
                .collect(),
            depth,
        }
    }
}

/// Candidate fact rows for `args`, using the first bound argument's index.
pub(crate) fn candidate_rows<'r>(rel: &'r Relation, args: &Args, b: &Bindings) -> Candidates<'r> {
    for (pos, &a) in args.iter().enumerate() {
        if let Val::Sym(s) = b.deref(a) {
            return Candidates::Indexed(rel.lookup(pos, s).iter());
        }
    }
    Candidates::All(0..rel.len() as u32)
}

pub(crate) enum Candidates<'r> {
    Indexed(std::slice::Iter<'r, u32>),
    All(std::ops::Range<u32>),
}

impl Iterator for Candidates<'_> {
    type Item = u32;
    fn next(&mut self) -> Option<u32> {
        match self {
            Candidates::Indexed(it) => it.next().copied(),
            Candidates::All(r) => r.next(),
        }
    }
}
