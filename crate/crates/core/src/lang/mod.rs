//! The DipWhile+ language: parsing, typing, static checks, printing and
//! deterministic reference programs.

pub mod ast;
pub mod check;
pub mod det;
mod elab;
pub mod eval;
mod pretty;
pub mod syntax;

pub use ast::*;
pub use check::{check, Diagnostic, Rule};
pub use det::{det_cells, evaluate, CellValue, DetCell, DetError, DetOptions, DetSpec, DetTable, OutValue};
pub use pretty::pretty_print;

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LangError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl LangError {
    pub fn at(line: usize, col: usize, message: impl Into<String>) -> Self {
        LangError {
            line,
            col,
            message: message.into(),
        }
    }
}

impl fmt::Display for LangError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for LangError {}

/// Parse and type a program; `for` loops are unrolled.
pub fn parse(src: &str) -> Result<Program, LangError> {
    let raw = syntax::Parser::new(src)?.program()?;
    elab::elaborate(raw)
}

/// [`parse`] followed by [`check`]; the first diagnostic becomes the error.
pub fn parse_checked(src: &str) -> Result<Program, LangError> {
    let p = parse(src)?;
    match check(&p).into_iter().next() {
        None => Ok(p),
        Some(d) => {
            let line = d
                .label
                .as_ref()
                .and_then(|l| p.statements().into_iter().find(|s| &s.label == l).map(|s| s.line))
                .unwrap_or(0);
            Err(LangError::at(line, 0, d.to_string()))
        }
    }
}
