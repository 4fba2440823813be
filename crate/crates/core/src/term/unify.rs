use super::{Atom, Substitution, Term};

/// Most general unifier of two atoms, or `None` on a predicate, arity or
/// constant clash. Variables with the same name in `a` and `b` are the same
/// variable.
pub fn unify(a: &Atom, b: &Atom) -> Option<Substitution> {
    if a.predicate != b.predicate || a.args.len() != b.args.len() {
        return None;
    }
    let mut subst = Substitution::new();
    for (x, y) in a.args.iter().zip(&b.args) {
        if !unify_terms(x, y, &mut subst) {
            return None;
        }
    }
    Some(subst)
}

/// Extends `subst` so that `x` and `y` become equal. On failure `subst` may
/// hold partial bindings; callers discard it.
pub fn unify_terms(x: &Term, y: &Term, subst: &mut Substitution) -> bool {
    let x = subst.apply_term(x);
    let y = subst.apply_term(y);
    match (&x, &y) {
        (Term::Var(a), Term::Var(b)) if a == b => true,
        (Term::Var(v), other) | (other, Term::Var(v)) => subst.bind(v, other.clone()),
        _ => x == y,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_atom;

    fn atom(s: &str) -> Atom {
        parse_atom(s).unwrap()
    }

    #[test]
    fn single_binding() {
        let s = unify(
            &atom("related_to(X, family)"),
            &atom("related_to(mother, family)"),
        )
        .unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get("X"), Some(&Term::constant("mother")));
    }

    #[test]
    fn two_independent_bindings() {
        let s = unify(
            &atom("contains(A, B)"),
            &atom("contains([call,mother], call)"),
        )
        .unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.get("A"), Some(&Term::words(["call", "mother"])));
        assert_eq!(s.get("B"), Some(&Term::constant("call")));
    }

    #[test]
    fn constant_clash() {
        assert!(unify(
            &atom("related_to(mother, X)"),
            &atom("related_to(family, Y)")
        )
        .is_none());
    }

    #[test]
    fn predicate_and_arity_mismatch() {
        assert!(unify(&atom("p(a)"), &atom("q(a)")).is_none());
        assert!(unify(&atom("p(a)"), &atom("p(a,b)")).is_none());
    }

    #[test]
    fn word_list_is_not_a_constant() {
        assert!(unify(&atom("p([a])"), &atom("p(a)")).is_none());
        assert!(unify(&atom("p([a,b])"), &atom("p([a,b])")).is_some());
    }

    #[test]
    fn shared_variables_chain() {
        let a = atom("p(X, X)");
        let b = atom("p(Y, a)");
        let s = unify(&a, &b).unwrap();
        assert_eq!(s.apply_atom(&a), s.apply_atom(&b));
        assert_eq!(s.apply_atom(&a).to_string(), "p(a,a)");
    }
}
