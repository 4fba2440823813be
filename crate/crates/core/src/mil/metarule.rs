//! Second-order clause templates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::term::{
    is_constant_symbol, parse_rule_file, Atom, Clause, ParseError, RawArg, RawAtom, RawMetarule,
    RawName, Term,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetaruleError {
    #[error("metarule `{rule}`: `{name}` is used both as a predicate variable and a first-order variable")]
    NotDisjoint { rule: String, name: String },
    #[error("metarule `{rule}`: head variable `{var}` does not occur in the body")]
    UnsafeHead { rule: String, var: String },
    #[error("metarule `{rule}`: word lists are not allowed in templates")]
    WordList { rule: String },
    #[error("metarule `{rule}`: predicate variable `{var}` is unbound")]
    UnboundPredicate { rule: String, var: String },
    #[error("metarule `{rule}`: constant slot `${slot}` is unbound")]
    UnboundSlot { rule: String, slot: String },
    #[error("metarule `{rule}`: `{symbol}` is not a valid symbol")]
    BadSymbol { rule: String, symbol: String },
    #[error("unknown metarule `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Predicate position of a template atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PredSlot {
    /// Existentially quantified predicate variable (P, Q, R, ...).
    Var(String),
    Fixed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MetaArg {
    Var(String),
    /// Filled from the task's constant pool at instantiation.
    Slot(String),
    Const(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MetaAtom {
    pub pred: PredSlot,
    pub args: Vec<MetaArg>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Metarule {
    pub name: String,
    pub head: MetaAtom,
    pub body: Vec<MetaAtom>,
}

/// A first-order clause together with the metarule it instantiates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HypothesisClause {
    pub clause: Clause,
    pub metarule: String,
}

impl Metarule {
    /// Parses a `meta name: head :- body.` declaration.
    pub fn parse(text: &str) -> Result<Self, MetaruleError> {
        let file = parse_rule_file(text)?;
        let raw = file
            .metarules
            .into_iter()
            .next()
            .ok_or_else(|| MetaruleError::Unknown(text.trim().to_string()))?;
        Self::from_raw(raw)
    }

    /// Parses every `meta` declaration in a rule file.
    pub fn parse_all(text: &str) -> Result<Vec<Self>, MetaruleError> {
        parse_rule_file(text)?
            .metarules
            .into_iter()
            .map(Self::from_raw)
            .collect()
    }

    pub fn from_raw(raw: RawMetarule) -> Result<Self, MetaruleError> {
        let name = raw.name.clone();
        let atom = |a: RawAtom| -> Result<MetaAtom, MetaruleError> {
            let pred = match a.name {
                RawName::Var(v) => PredSlot::Var(v),
                RawName::Symbol(s) => PredSlot::Fixed(s),
            };
            let args = a
                .args
                .into_iter()
                .map(|arg| match arg {
                    RawArg::Var(v) => Ok(MetaArg::Var(v)),
                    RawArg::Slot(s) => Ok(MetaArg::Slot(s)),
                    RawArg::Const(c) => Ok(MetaArg::Const(c)),
                    RawArg::WordList(_) => Err(MetaruleError::WordList { rule: name.clone() }),
                })
                .collect::<Result<_, _>>()?;
            Ok(MetaAtom { pred, args })
        };
        let rule = Metarule {
            name: raw.name.clone(),
            head: atom(raw.head)?,
            body: raw.body.into_iter().map(atom).collect::<Result<_, _>>()?,
        };
        rule.validate()?;
        Ok(rule)
    }

    fn atoms(&self) -> impl Iterator<Item = &MetaAtom> {
        std::iter::once(&self.head).chain(self.body.iter())
    }

    /// Predicate variables in first-occurrence order; the head's comes first.
    pub fn predicate_vars(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for a in self.atoms() {
            if let PredSlot::Var(v) = &a.pred {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// Constant slots in first-occurrence order.
    pub fn constant_slots(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for a in self.atoms() {
            for arg in &a.args {
                if let MetaArg::Slot(s) = arg {
                    if !out.contains(&s.as_str()) {
                        out.push(s);
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), MetaruleError> {
        let preds: BTreeSet<&str> = self.predicate_vars().into_iter().collect();
        let mut body_vars = BTreeSet::new();
        for a in self.atoms() {
            for arg in &a.args {
                match arg {
                    MetaArg::Var(v) if preds.contains(v.as_str()) => {
                        return Err(MetaruleError::NotDisjoint {
                            rule: self.name.clone(),
                            name: v.clone(),
                        })
                    }
                    MetaArg::Const(c) if !is_constant_symbol(c) => {
                        return Err(MetaruleError::BadSymbol {
                            rule: self.name.clone(),
                            symbol: c.clone(),
                        })
                    }
                    _ => {}
                }
            }
        }
        for a in &self.body {
            for arg in &a.args {
                if let MetaArg::Var(v) = arg {
                    body_vars.insert(v.as_str());
                }
            }
        }
        for arg in &self.head.args {
            if let MetaArg::Var(v) = arg {
                if !body_vars.contains(v.as_str()) {
                    return Err(MetaruleError::UnsafeHead {
                        rule: self.name.clone(),
                        var: v.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// `P(A,B) :- Q(A,B).`
    pub fn ident() -> Self {
        Self::builtin("meta ident: P(A,B) :- Q(A,B).")
    }

    /// `P(A,c) :- Q(A,c).`
    pub fn ident_const() -> Self {
        Self::builtin("meta ident_const: P(A,$c) :- Q(A,$c).")
    }

    /// `P(A,B) :- Q(A,C), R(C,B).`
    pub fn chain() -> Self {
        Self::builtin("meta chain: P(A,B) :- Q(A,C), R(C,B).")
    }

    /// `P(A,B) :- Q(A,C), P(C,B).`
    pub fn tailrec() -> Self {
        Self::builtin("meta tailrec: P(A,B) :- Q(A,C), P(C,B).")
    }

    /// `P(A,c) :- Q(A,C), R(C,c).`
    pub fn chain_const() -> Self {
        Self::builtin("meta chain_const: P(A,$c) :- Q(A,C), R(C,$c).")
    }

    fn builtin(text: &str) -> Self {
        Self::parse(text).expect("built-in metarule is valid")
    }

    /// The built-in library in its canonical order.
    pub fn library() -> Vec<Self> {
        vec![
            Self::ident(),
            Self::ident_const(),
            Self::chain(),
            Self::tailrec(),
            Self::chain_const(),
        ]
    }

    pub fn by_name(name: &str) -> Result<Self, MetaruleError> {
        Self::library()
            .into_iter()
            .find(|m| m.name == name)
            .ok_or_else(|| MetaruleError::Unknown(name.to_string()))
    }

    /// Substitutes predicate symbols and constants into the template. The
    /// result's variables are renamed canonically (A, B, C, ... by first
    /// occurrence).
    pub fn instantiate(
        &self,
        predicates: &BTreeMap<String, String>,
        constants: &BTreeMap<String, String>,
    ) -> Result<HypothesisClause, MetaruleError> {
        let atom = |a: &MetaAtom| -> Result<Atom, MetaruleError> {
            let predicate = match &a.pred {
                PredSlot::Fixed(s) => s.clone(),
                PredSlot::Var(v) => predicates.get(v).cloned().ok_or_else(|| {
                    MetaruleError::UnboundPredicate {
                        rule: self.name.clone(),
                        var: v.clone(),
                    }
                })?,
            };
            if !is_constant_symbol(&predicate) {
                return Err(MetaruleError::BadSymbol {
                    rule: self.name.clone(),
                    symbol: predicate,
                });
            }
            let args = a
                .args
                .iter()
                .map(|arg| match arg {
                    MetaArg::Var(v) => Ok(Term::Var(v.clone())),
                    MetaArg::Const(c) => Ok(Term::Const(c.clone())),
                    MetaArg::Slot(s) => constants
                        .get(s)
                        .map(|c| Term::Const(c.clone()))
                        .ok_or_else(|| MetaruleError::UnboundSlot {
                            rule: self.name.clone(),
                            slot: s.clone(),
                        }),
                })
                .collect::<Result<_, _>>()?;
            Ok(Atom { predicate, args })
        };
        let clause = Clause {
            head: atom(&self.head)?,
            body: self.body.iter().map(atom).collect::<Result<_, _>>()?,
        };
        Ok(HypothesisClause {
            clause: canonicalize(&clause),
            metarule: self.name.clone(),
        })
    }

    /// Positional form of [`Metarule::instantiate`]: `predicates` follows
    /// [`Metarule::predicate_vars`] and `constants` follows
    /// [`Metarule::constant_slots`].
    pub fn instantiate_with(
        &self,
        predicates: &[&str],
        constants: &[&str],
    ) -> Result<HypothesisClause, MetaruleError> {
        let preds = self
            .predicate_vars()
            .into_iter()
            .zip(predicates)
            .map(|(v, p)| (v.to_string(), p.to_string()))
            .collect();
        let consts = self
            .constant_slots()
            .into_iter()
            .zip(constants)
            .map(|(s, c)| (s.to_string(), c.to_string()))
            .collect();
        self.instantiate(&preds, &consts)
    }

    /// Whether `clause` is an instance of this template (up to variable names).
    pub fn matches(&self, clause: &Clause) -> bool {
        if clause.body.len() != self.body.len() {
            return false;
        }
        let mut preds = BTreeMap::new();
        let mut consts = BTreeMap::new();
        let pairs = std::iter::once((&self.head, &clause.head)).chain(self.body.iter().zip(&clause.body));
        for (t, a) in pairs {
            if t.args.len() != a.args.len() {
                return false;
            }
            match &t.pred {
                PredSlot::Fixed(s) if s != &a.predicate => return false,
                PredSlot::Fixed(_) => {}
                PredSlot::Var(v) => {
                    if preds.entry(v.clone()).or_insert_with(|| a.predicate.clone()) != &a.predicate {
                        return false;
                    }
                }
            }
            for (ta, aa) in t.args.iter().zip(&a.args) {
                if let (MetaArg::Slot(s), Term::Const(c)) = (ta, aa) {
                    if consts.entry(s.clone()).or_insert_with(|| c.clone()) != c {
                        return false;
                    }
                }
            }
        }
        match self.instantiate(&preds, &consts) {
            Ok(inst) => canonicalize(clause) == inst.clause,
            Err(_) => false,
        }
    }
}

impl fmt::Display for Metarule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atom = |a: &MetaAtom| {
            let pred = match &a.pred {
                PredSlot::Var(v) | PredSlot::Fixed(v) => v.clone(),
            };
            let args: Vec<String> = a
                .args
                .iter()
                .map(|x| match x {
                    MetaArg::Var(v) | MetaArg::Const(v) => v.clone(),
                    MetaArg::Slot(s) => format!("${s}"),
                })
                .collect();
            format!("{pred}({})", args.join(","))
        };
        let body: Vec<String> = self.body.iter().map(atom).collect();
        write!(f, "meta {}: {} :- {}.", self.name, atom(&self.head), body.join(", "))
    }
}

/// Renames variables to A, B, C, ... in first-occurrence order.
pub fn canonicalize(clause: &Clause) -> Clause {
    let names: BTreeMap<String, String> = clause
        .variables()
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let letter = (b'A' + (i % 26) as u8) as char;
            let name = if i < 26 {
                letter.to_string()
            } else {
                format!("{letter}{}", i / 26)
            };
            (v.to_string(), name)
        })
        .collect();
    let rename = |a: &Atom| Atom {
        predicate: a.predicate.clone(),
        args: a
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Var(names[v].clone()),
                other => other.clone(),
            })
            .collect(),
    };
    Clause {
        head: rename(&clause.head),
        body: clause.body.iter().map(rename).collect(),
    }
}
