//! The `p x3sat N M` instance format.
//!
//! ```text
//! c comment
//! p x3sat 7 4
//! 1 2 3 0
//! 1 4 5 0
//! 1 6 7 0
//! 2 4 -6 0
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Clause, Formula, Literal};

/// A formula plus the comment lines that came with it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub comments: Vec<String>,
    pub formula: Formula,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: malformed header (expected `p x3sat N M`)")]
    Header { line: usize },
    #[error("line {line}: clause before the header")]
    MissingHeader { line: usize },
    #[error("line {line}: duplicate header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: `{token}` is not an integer")]
    Token { line: usize, token: String },
    #[error("line {line}: literal {lit} outside [-{n}, {n}]")]
    LiteralRange { line: usize, lit: i64, n: u32 },
    #[error("line {line}: clause has {arity} literals (expected 1 to 3)")]
    Arity { line: usize, arity: usize },
    #[error("line {line}: clause not terminated by 0")]
    Unterminated { line: usize },
    #[error("line {line}: header declares {declared} clauses, found {found}")]
    Count {
        line: usize,
        declared: usize,
        found: usize,
    },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match *self {
            ParseError::Header { line }
            | ParseError::MissingHeader { line }
            | ParseError::DuplicateHeader { line }
            | ParseError::Token { line, .. }
            | ParseError::LiteralRange { line, .. }
            | ParseError::Arity { line, .. }
            | ParseError::Unterminated { line }
            | ParseError::Count { line, .. } => line,
        }
    }
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    parse_instance(text).map(|i| i.formula)
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut comments = Vec::new();
    let mut header: Option<(u32, usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed == "c" || trimmed.starts_with("c ") || trimmed.starts_with("c\t") {
            comments.push(trimmed[1..].trim_start().to_string());
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::DuplicateHeader { line });
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                ["p", "x3sat", n, m] => n.parse::<u32>().ok().zip(m.parse::<usize>().ok()),
                _ => None,
            };
            let (n, m) = parsed.ok_or(ParseError::Header { line })?;
            header = Some((n, m, line));
            continue;
        }
        let Some((n, _, _)) = header else {
            return Err(ParseError::MissingHeader { line });
        };
        let mut ints = Vec::new();
        for token in trimmed.split_whitespace() {
            let v: i64 = token.parse().map_err(|_| ParseError::Token {
                line,
                token: token.to_string(),
            })?;
            ints.push(v);
        }
        let Some((&0, lits)) = ints.split_last() else {
            return Err(ParseError::Unterminated { line });
        };
        if lits.contains(&0) {
            return Err(ParseError::Unterminated { line });
        }
        if !(1..=3).contains(&lits.len()) {
            return Err(ParseError::Arity {
                line,
                arity: lits.len(),
            });
        }
        let lits = lits
            .iter()
            .map(|&lit| {
                Literal::from_signed(lit)
                    .filter(|l| l.var().is_some_and(|v| v <= n))
                    .ok_or(ParseError::LiteralRange { line, lit, n })
            })
            .collect::<Result<Vec<_>, _>>()?;
        clauses.push(Clause::new(lits));
    }
    let (n, m, _) = header.ok_or(ParseError::Header {
        line: last_line.max(1),
    })?;
    if clauses.len() != m {
        return Err(ParseError::Count {
            line: last_line.max(1),
            declared: m,
            found: clauses.len(),
        });
    }
    Ok(Instance {
        comments,
        formula: Formula::new(n, clauses),
    })
}

fn signed(l: &Literal) -> i64 {
    match *l {
        Literal::Var { var, neg } => {
            let v = i64::from(var);
            if neg {
                -v
            } else {
                v
            }
        }
        Literal::Const(_) => panic!("constants have no file representation"),
    }
}

pub fn render(inst: &Instance) -> String {
    let mut out = String::new();
    for c in &inst.comments {
        if c.is_empty() {
            out.push_str("c\n");
        } else {
            let _ = writeln!(out, "c {c}");
        }
    }
    let f = &inst.formula;
    let _ = writeln!(out, "p x3sat {} {}", f.n_vars, f.clauses.len());
    for c in &f.clauses {
        for l in c.lits() {
            let _ = write!(out, "{} ", signed(l));
        }
        out.push_str("0\n");
    }
    out
}
