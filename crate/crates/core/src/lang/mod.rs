//! The logic fragment: syntax tree, lexer, parser, printer and symbol
//! normalization.

mod ast;
mod lexer;
mod normalize;
mod parser;

pub use ast::{
    render_program, Atom, Literal, Program, Rule, RuleKind, SourceLoc, Term, ANONYMOUS,
};
pub use lexer::{tokenize, Token, TokenKind};
pub use normalize::normalize_symbol;
pub use parser::{parse_atom, parse_program, parse_program_from, unsafe_variable};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}, column {col}: unexpected character `{ch}`")]
    Lex { line: usize, col: usize, ch: char },
    #[error("line {line}, column {col}: expected {}; found {found}", expected.join(" or "))]
    Parse {
        line: usize,
        col: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("line {line}: rule {rule} is unsafe: variable `{var}` is not bound by a positive body literal")]
    Safety {
        rule: usize,
        line: usize,
        var: String,
    },
    #[error("line {line}: duplicate label `@{label}` (first used on line {first})")]
    DuplicateLabel {
        label: String,
        line: usize,
        first: usize,
    },
    #[error("line {line}: a program may contain at most one #minimize statement")]
    MultipleMinimize { line: usize },
    #[error("cannot normalize {raw:?}: {reason}")]
    Normalize { raw: String, reason: &'static str },
}

impl Error {
    /// Source line the error points at, when it has one.
    pub fn line(&self) -> Option<usize> {
        match self {
            Error::Lex { line, .. }
            | Error::Parse { line, .. }
            | Error::Safety { line, .. }
            | Error::DuplicateLabel { line, .. }
            | Error::MultipleMinimize { line } => Some(*line),
            Error::Normalize { .. } => None,
        }
    }
}

/// A default-negated literal outside a constraint body.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{loc}: rule {rule} uses `not` outside an integrity constraint, which the solver does not support")]
pub struct FragmentError {
    pub rule: usize,
    pub loc: SourceLoc,
}

/// Checks that negation occurs only in constraint bodies.
pub fn check_fragment(p: &Program) -> Result<(), FragmentError> {
    for (i, rule) in p.rules.iter().enumerate() {
        if let RuleKind::Normal { body, .. } = &rule.kind {
            if body.iter().any(|l| l.negated) {
                return Err(FragmentError {
                    rule: i,
                    loc: p.loc(i),
                });
            }
        }
    }
    Ok(())
}
