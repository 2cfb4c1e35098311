//! The `.dtr` surface language: lexer, parser and canonical printer.
//!
//! A file is a list of items. Blocks use braces, items end in `;` (optional
//! after a closing brace) and `//` starts a comment. See the README for the
//! full grammar.

pub mod ast;
mod lexer;
mod parser;
mod printer;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use parser::{parse, parse_sequent, parse_term, parse_type};
pub use printer::{print_file, print_sequent, print_term};

/// A 1-based source position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

impl ParseError {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        ParseError {
            span,
            message: message.into(),
        }
    }
}
