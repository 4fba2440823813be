//! Hand-written parser for the `.facts` / `.rules` text format.
//!
//! ```text
//! % comment
//! related_to(mother, family).
//! category(A,B) :- contains(A,C), related_to(C,B).
//! meta chain: P(A,B) :- Q(A,C), R(C,B).
//! ```

use std::collections::HashMap;

use thiserror::Error;

use super::{is_constant_symbol, is_variable_name, Atom, Clause, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("arity conflict for `{predicate}`: used with {first} and {second} arguments (line {line})")]
    ArityConflict {
        predicate: String,
        first: usize,
        second: usize,
        line: usize,
    },
}

impl ParseError {
    fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}

/// Name in predicate position: a symbol, or a second-order variable in metarules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawName {
    Symbol(String),
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawArg {
    Var(String),
    Const(String),
    WordList(Vec<String>),
    /// `$c`: a constant slot, only meaningful in metarules.
    Slot(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawAtom {
    pub name: RawName,
    pub args: Vec<RawArg>,
}

/// A parsed metarule statement, before validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawMetarule {
    pub name: String,
    pub head: RawAtom,
    pub body: Vec<RawAtom>,
    pub line: usize,
}

/// Contents of a rule file: ordinary clauses plus `meta` declarations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleFile {
    pub clauses: Vec<Clause>,
    pub metarules: Vec<RawMetarule>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Lower(String),
    Upper(String),
    Slot(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Neck,
    Colon,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (line_idx, line) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            let push = |out: &mut Vec<Spanned>, tok| {
                out.push(Spanned {
                    tok,
                    line: line_no,
                    column,
                })
            };
            match c {
                '%' => break,
                c if c.is_whitespace() => i += 1,
                '(' => {
                    push(&mut out, Tok::LParen);
                    i += 1
                }
                ')' => {
                    push(&mut out, Tok::RParen);
                    i += 1
                }
                '[' => {
                    push(&mut out, Tok::LBracket);
                    i += 1
                }
                ']' => {
                    push(&mut out, Tok::RBracket);
                    i += 1
                }
                ',' => {
                    push(&mut out, Tok::Comma);
                    i += 1
                }
                '.' => {
                    push(&mut out, Tok::Dot);
                    i += 1
                }
                ':' if chars.get(i + 1) == Some(&'-') => {
                    push(&mut out, Tok::Neck);
                    i += 2
                }
                ':' => {
                    push(&mut out, Tok::Colon);
                    i += 1
                }
                '$' => {
                    let start = i + 1;
                    let mut j = start;
                    while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                        j += 1;
                    }
                    if j == start {
                        return Err(ParseError::syntax(line_no, column, "expected slot name after `$`"));
                    }
                    push(&mut out, Tok::Slot(chars[start..j].iter().collect()));
                    i = j;
                }
                c if c.is_ascii_alphanumeric() || c == '_' => {
                    let mut j = i;
                    while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                        j += 1;
                    }
                    let word: String = chars[i..j].iter().collect();
                    let tok = if is_constant_symbol(&word) {
                        Tok::Lower(word)
                    } else if is_variable_name(&word) {
                        Tok::Upper(word)
                    } else {
                        return Err(ParseError::syntax(
                            line_no,
                            column,
                            format!("invalid identifier `{word}`"),
                        ));
                    };
                    push(&mut out, tok);
                    i = j;
                }
                other => {
                    return Err(ParseError::syntax(
                        line_no,
                        column,
                        format!("unexpected character `{other}`"),
                    ))
                }
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        let toks = lex(text)?;
        let lines = text.lines().count().max(1);
        let last_len = text.lines().last().map_or(0, |l| l.chars().count());
        Ok(Parser {
            toks,
            pos: 0,
            end: (lines, last_len + 1),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn location(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map_or(self.end, |s| (s.line, s.column))
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.location();
        ParseError::syntax(line, column, message)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn atom(&mut self) -> Result<RawAtom, ParseError> {
        let name = match self.next() {
            Some(Tok::Lower(s)) => RawName::Symbol(s),
            Some(Tok::Upper(s)) => RawName::Var(s),
            _ => {
                self.pos -= 1;
                return Err(self.error("expected predicate name"));
            }
        };
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            return Err(self.error("expected at least one argument"));
        }
        loop {
            args.push(self.arg()?);
            match self.peek() {
                Some(Tok::Comma) => self.pos += 1,
                Some(Tok::RParen) => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.error("expected `,` or `)`")),
            }
        }
        Ok(RawAtom { name, args })
    }

    fn arg(&mut self) -> Result<RawArg, ParseError> {
        match self.next() {
            Some(Tok::Lower(s)) => Ok(RawArg::Const(s)),
            Some(Tok::Upper(s)) => Ok(RawArg::Var(s)),
            Some(Tok::Slot(s)) => Ok(RawArg::Slot(s)),
            Some(Tok::LBracket) => {
                let mut words = Vec::new();
                if self.peek() == Some(&Tok::RBracket) {
                    self.pos += 1;
                    return Ok(RawArg::WordList(words));
                }
                loop {
                    match self.next() {
                        Some(Tok::Lower(w)) => words.push(w),
                        _ => {
                            self.pos -= 1;
                            return Err(self.error("word lists may only contain constants"));
                        }
                    }
                    match self.next() {
                        Some(Tok::Comma) => {}
                        Some(Tok::RBracket) => return Ok(RawArg::WordList(words)),
                        _ => {
                            self.pos -= 1;
                            return Err(self.error("expected `,` or `]`"));
                        }
                    }
                }
            }
            _ => {
                self.pos -= 1;
                Err(self.error("expected a term"))
            }
        }
    }

    fn body(&mut self) -> Result<Vec<RawAtom>, ParseError> {
        let mut body = vec![self.atom()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            body.push(self.atom()?);
        }
        Ok(body)
    }
}

enum Statement {
    Clause(RawAtom, Vec<RawAtom>, usize, usize),
    Meta(RawMetarule),
}

fn statements(text: &str) -> Result<Vec<Statement>, ParseError> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    while !p.at_end() {
        let (line, column) = p.location();
        let is_meta = matches!(p.peek(), Some(Tok::Lower(s)) if s == "meta")
            && matches!(p.toks.get(p.pos + 1).map(|s| &s.tok), Some(Tok::Lower(_)))
            && matches!(p.toks.get(p.pos + 2).map(|s| &s.tok), Some(Tok::Colon));
        if is_meta {
            p.pos += 1;
            let name = match p.next() {
                Some(Tok::Lower(n)) => n,
                _ => unreachable!(),
            };
            p.pos += 1;
            let head = p.atom()?;
            p.expect(Tok::Neck, "`:-`")?;
            let body = p.body()?;
            p.expect(Tok::Dot, "`.`")?;
            out.push(Statement::Meta(RawMetarule {
                name,
                head,
                body,
                line,
            }));
            continue;
        }
        let head = p.atom()?;
        let body = if p.peek() == Some(&Tok::Neck) {
            p.pos += 1;
            p.body()?
        } else {
            Vec::new()
        };
        p.expect(Tok::Dot, "`.` at end of statement")?;
        out.push(Statement::Clause(head, body, line, column));
    }
    Ok(out)
}

fn lower_atom(raw: RawAtom, line: usize, column: usize) -> Result<Atom, ParseError> {
    let predicate = match raw.name {
        RawName::Symbol(s) => s,
        RawName::Var(v) => {
            return Err(ParseError::syntax(
                line,
                column,
                format!("predicate variable `{v}` outside a metarule"),
            ))
        }
    };
    let args = raw
        .args
        .into_iter()
        .map(|a| match a {
            RawArg::Var(v) => Ok(Term::Var(v)),
            RawArg::Const(c) => Ok(Term::Const(c)),
            RawArg::WordList(ws) => Ok(Term::WordList(ws)),
            RawArg::Slot(s) => Err(ParseError::syntax(
                line,
                column,
                format!("constant slot `${s}` outside a metarule"),
            )),
        })
        .collect::<Result<_, _>>()?;
    Ok(Atom { predicate, args })
}

#[derive(Default)]
struct ArityTable(HashMap<String, usize>);

impl ArityTable {
    fn check(&mut self, atom: &Atom, line: usize) -> Result<(), ParseError> {
        match self.0.get(&atom.predicate) {
            Some(&n) if n != atom.arity() => Err(ParseError::ArityConflict {
                predicate: atom.predicate.clone(),
                first: n,
                second: atom.arity(),
                line,
            }),
            Some(_) => Ok(()),
            None => {
                self.0.insert(atom.predicate.clone(), atom.arity());
                Ok(())
            }
        }
    }
}

/// Parses a rule file, keeping `meta` declarations separate from clauses.
pub fn parse_rule_file(text: &str) -> Result<RuleFile, ParseError> {
    let mut file = RuleFile::default();
    let mut arities = ArityTable::default();
    for st in statements(text)? {
        match st {
            Statement::Meta(m) => file.metarules.push(m),
            Statement::Clause(head, body, line, column) => {
                let head = lower_atom(head, line, column)?;
                let body = body
                    .into_iter()
                    .map(|a| lower_atom(a, line, column))
                    .collect::<Result<Vec<_>, _>>()?;
                for a in std::iter::once(&head).chain(&body) {
                    arities.check(a, line)?;
                }
                file.clauses.push(Clause { head, body });
            }
        }
    }
    Ok(file)
}

/// Parses a program of facts and rules. `meta` declarations are rejected.
pub fn parse_program(text: &str) -> Result<Vec<Clause>, ParseError> {
    let file = parse_rule_file(text)?;
    if let Some(m) = file.metarules.first() {
        return Err(ParseError::syntax(
            m.line,
            1,
            "metarule declaration not allowed here",
        ));
    }
    Ok(file.clauses)
}

/// Parses a single atom, with or without a trailing `.`.
pub fn parse_atom(text: &str) -> Result<Atom, ParseError> {
    let mut p = Parser::new(text)?;
    let (line, column) = p.location();
    let raw = p.atom()?;
    if p.peek() == Some(&Tok::Dot) {
        p.pos += 1;
    }
    if !p.at_end() {
        return Err(p.error("trailing input after atom"));
    }
    lower_atom(raw, line, column)
}
