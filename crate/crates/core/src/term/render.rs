use std::collections::HashMap;

use super::{Atom, Clause, Term};

/// Canonical variable name for the `i`-th distinct variable: A..Z, then A1..Z1, ...
fn canonical_var(i: usize) -> String {
    let letter = (b'A' + (i % 26) as u8) as char;
    match i / 26 {
        0 => letter.to_string(),
        n => format!("{letter}{n}"),
    }
}

fn render_atom(atom: &Atom, names: &HashMap<&str, String>, sep: &str, out: &mut String) {
    out.push_str(&atom.predicate);
    out.push('(');
    for (i, arg) in atom.args.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        match arg {
            Term::Var(v) => out.push_str(&names[v.as_str()]),
            other => out.push_str(&other.to_string()),
        }
    }
    out.push(')');
}

/// Canonical text of one clause.
///
/// Variables are renamed A, B, C, ... in first-occurrence order (head, then
/// body left to right). Facts separate arguments with `", "`; rules keep
/// arguments tight and separate body atoms with `", "`.
pub fn render_clause(clause: &Clause) -> String {
    let names: HashMap<&str, String> = clause
        .variables()
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, canonical_var(i)))
        .collect();
    let mut out = String::new();
    if clause.is_fact() {
        render_atom(&clause.head, &names, ", ", &mut out);
    } else {
        render_atom(&clause.head, &names, ",", &mut out);
        out.push_str(" :- ");
        for (i, atom) in clause.body.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            render_atom(atom, &names, ",", &mut out);
        }
    }
    out.push('.');
    out
}

/// Canonical text of a program, one clause per line, no trailing newline.
pub fn render(program: &[Clause]) -> String {
    program
        .iter()
        .map(render_clause)
        .collect::<Vec<_>>()
        .join("\n")
}

/// Alpha-equivalence key for a clause.
pub fn canonical_string(clause: &Clause) -> String {
    render_clause(clause)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_program;

    #[test]
    fn chain_rule_is_canonical() {
        let text = "category(A,B) :- contains(A,C), related_to(C,B).";
        assert_eq!(render(&parse_program(text).unwrap()), text);
    }

    #[test]
    fn fact_spacing() {
        let p = parse_program("related_to(mother,family).").unwrap();
        assert_eq!(render(&p), "related_to(mother, family).");
    }

    #[test]
    fn renames_variables() {
        let p = parse_program("category(X,Q) :- contains(X,Z), related_to(Z,Q).").unwrap();
        assert_eq!(
            render(&p),
            "category(A,B) :- contains(A,C), related_to(C,B)."
        );
    }

    #[test]
    fn constants_in_rules() {
        let p = parse_program("category_1(Word,home) :- related_to(Word,home).").unwrap();
        assert_eq!(render(&p), "category_1(A,home) :- related_to(A,home).");
    }

    #[test]
    fn many_variables() {
        assert_eq!(canonical_var(0), "A");
        assert_eq!(canonical_var(25), "Z");
        assert_eq!(canonical_var(26), "A1");
        assert_eq!(canonical_var(53), "B2");
    }

    #[test]
    fn multiple_clauses() {
        let p = parse_program("p(a).\nq(X) :- p(X).").unwrap();
        assert_eq!(render(&p), "p(a).\nq(A) :- p(A).");
    }
}
