//! Depth-bounded top-down entailment.
//!
//! A derivation branch may use at most `depth_limit` resolution steps, where
//! matching a background fact and applying a program clause each count as one
//! step on the branch that performs them.

use crate::store::FactStore;
use crate::term::{Atom, Clause};

use super::compiled::{candidate_rows, Bindings, CClause, CompiledBk, Goal, Interner, Val};

/// Outcome of an entailment query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Entailment {
    pub entailed: bool,
    /// Some branch was cut by the depth limit. A refutation with this flag set
    /// may turn into a proof under a larger limit.
    pub truncated: bool,
}

/// True iff `goal` has a derivation from `program` and `background` within
/// `depth_limit` steps per branch. `goal` must be ground.
pub fn entails(program: &[Clause], background: &FactStore, goal: &Atom, depth_limit: usize) -> bool {
    entailment(program, background, goal, depth_limit).entailed
}

/// Like [`entails`] but also reports depth truncation.
pub fn entailment(
    program: &[Clause],
    background: &FactStore,
    goal: &Atom,
    depth_limit: usize,
) -> Entailment {
    let mut prover = Prover::new(background);
    prover.set_program(program);
    prover.entailment(goal, depth_limit)
}

/// Reusable prover over one background store. Swapping the program is cheap,
/// which the exhaustive oracle relies on.
pub struct Prover {
    interner: Interner,
    bk: CompiledBk,
    program: Vec<CClause>,
    bindings: Bindings,
}

impl Prover {
    pub fn new(background: &FactStore) -> Self {
        let mut interner = Interner::default();
        let bk = CompiledBk::compile(background, &mut interner);
        Prover {
            interner,
            bk,
            program: Vec::new(),
            bindings: Bindings::default(),
        }
    }

    pub fn set_program(&mut self, program: &[Clause]) {
        self.program = program
            .iter()
            .map(|c| CClause::compile(c, &mut self.interner))
            .collect();
    }

    pub fn entails(&mut self, goal: &Atom, depth_limit: usize) -> bool {
        self.entailment(goal, depth_limit).entailed
    }

    pub fn entailment(&mut self, goal: &Atom, depth_limit: usize) -> Entailment {
        debug_assert!(goal.is_ground(), "entailment goals must be ground");
        let mut goals = vec![Goal::ground(goal, &mut self.interner, depth_limit as u32)];
        let mut search = Search {
            bk: &self.bk,
            program: &self.program,
            bindings: &mut self.bindings,
            truncated: false,
        };
        search.bindings.clear();
        let entailed = search.solve(&mut goals);
        Entailment {
            entailed,
            truncated: search.truncated,
        }
    }
}

struct Search<'a> {
    bk: &'a CompiledBk,
    program: &'a [CClause],
    bindings: &'a mut Bindings,
    truncated: bool,
}

impl Search<'_> {
    fn solve(&mut self, goals: &mut Vec<Goal>) -> bool {
        let Some(goal) = goals.pop() else {
            return true;
        };
        if goal.depth == 0 {
            self.truncated = true;
            goals.push(goal);
            return false;
        }
        let mark = self.bindings.mark();
        let vars = self.bindings.len();
        let height = goals.len();

        if let Some(rel) = self.bk.relation(goal.pred) {
            if rel.arity == goal.args.len() {
                for r in candidate_rows(rel, &goal.args, self.bindings) {
                    let row = rel.row(r);
                    if goal
                        .args
                        .iter()
                        .zip(row)
                        .all(|(&a, &s)| self.bindings.unify(a, Val::Sym(s)))
                        && self.solve(goals)
                    {
                        return true;
                    }
                    self.bindings.undo(mark, vars);
                }
            }
        }

        let program = self.program;
        for clause in program {
            if clause.head.pred != goal.pred || clause.head.args.len() != goal.args.len() {
                continue;
            }
            let base = self.bindings.alloc(clause.nvars);
            let head_ok = clause
                .head
                .args
                .iter()
                .zip(goal.args.iter())
                .all(|(&t, &a)| self.bindings.unify(Bindings::instance(base, t), a));
            if head_ok {
                for atom in clause.body.iter().rev() {
                    goals.push(Goal::from_atom(atom, base, goal.depth - 1));
                }
                if self.solve(goals) {
                    return true;
                }
                goals.truncate(height);
            }
            self.bindings.undo(mark, vars);
        }

        goals.push(goal);
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{parse_atom, parse_program};

    fn facts(text: &str) -> FactStore {
        FactStore::parse(text).unwrap()
    }

    #[test]
    fn chain_rule_entails_one_shot_example() {
        let program = parse_program("category(A,B) :- contains(A,C), related_to(C,B).").unwrap();
        let bk = facts(
            "contains([call,mother],call). contains([call,mother],mother). related_to(mother,family).",
        );
        let goal = parse_atom("category([call,mother],family)").unwrap();
        assert!(entails(&program, &bk, &goal, 10));
        let other = parse_atom("category([call,mother],sport)").unwrap();
        assert!(!entails(&program, &bk, &other, 10));
    }

    #[test]
    fn background_fact_needs_no_program() {
        let bk = facts("related_to(mother,family).");
        let goal = parse_atom("related_to(mother,family)").unwrap();
        assert!(entails(&[], &bk, &goal, 1));
    }

    #[test]
    fn recursive_program_three_rule_steps() {
        let program = parse_program(
            "category_1(A,B) :- related_to(A,C), category_1(C,B).\n\
             category_1(A,home) :- related_to(A,home).",
        )
        .unwrap();
        let bk = facts("related_to(trip,travel). related_to(travel,family). related_to(family,home).");
        let goal = parse_atom("category_1(trip,home)").unwrap();
        // tailrec, tailrec, base case, then the final fact lookup: 4 steps on
        // the deepest branch.
        let shallow = entailment(&program, &bk, &goal, 3);
        assert!(!shallow.entailed);
        assert!(shallow.truncated);
        let exact = entailment(&program, &bk, &goal, 4);
        assert!(exact.entailed);
        assert!(entails(&program, &bk, &goal, 10));
    }

    #[test]
    fn refutation_without_truncation() {
        let program = parse_program("p(A,B) :- q(A,B).").unwrap();
        let bk = facts("q(a,b).");
        let e = entailment(&program, &bk, &parse_atom("p(b,a)").unwrap(), 5);
        assert_eq!(
            e,
            Entailment {
                entailed: false,
                truncated: false
            }
        );
    }

    #[test]
    fn left_recursion_terminates() {
        let program = parse_program("p(A,B) :- p(A,C), q(C,B).").unwrap();
        let bk = facts("q(a,b).");
        let e = entailment(&program, &bk, &parse_atom("p(a,b)").unwrap(), 10);
        assert!(!e.entailed);
        assert!(e.truncated);
    }

    #[test]
    fn unknown_constants_in_goal() {
        let bk = facts("q(a,b).");
        assert!(!entails(&[], &bk, &parse_atom("q(zzz,b)").unwrap(), 3));
    }

    #[test]
    fn program_facts_resolve() {
        let program = parse_program("p(a). r(X) :- p(X).").unwrap();
        assert!(entails(&program, &FactStore::new(), &parse_atom("r(a)").unwrap(), 2));
        assert!(!entails(&program, &FactStore::new(), &parse_atom("r(a)").unwrap(), 1));
    }
}
