//! Parsing and validation of the monitor DSL.
//!
//! ```text
//! monitor RWLock {
//!     int readers = 0;
//!     bool writerIn = false;
//!     atomic void enterReader() { waituntil(!writerIn); readers++; }
//! }
//! ```
//!
//! Each method body becomes an ordered list of CCRs. Statements before the
//! first `waituntil` form a leading CCR guarded by `true`; statements after a
//! `waituntil` join that CCR's body.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;

use std::collections::BTreeSet;

use ast::{Ccr, Monitor, Pos, Pred, Var};

pub use parser::{parse_expr, parse_monitor};
pub use pretty::pretty_print;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("waituntil may only appear as a top-level statement of a method body")]
    NestedWaituntil,
    #[error("duplicate name `{0}`")]
    Duplicate(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("non-linear multiplication `{0}`")]
    NonLinear(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}:{}: {kind}", pos.line, pos.col)]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn new(pos: Pos, kind: ParseErrorKind) -> Self {
        ParseError { pos, kind }
    }

    pub fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError::new(pos, ParseErrorKind::Syntax(msg.into()))
    }
}

/// CCRs in method declaration order, then ordinal.
pub fn ccrs(m: &Monitor) -> Vec<&Ccr> {
    m.ccrs.iter().collect()
}

/// Syntactically distinct guards other than `true`, in order of first
/// occurrence.
pub fn guards(m: &Monitor) -> Vec<Pred> {
    let mut out: Vec<Pred> = Vec::new();
    for c in &m.ccrs {
        if !c.guard.is_true() && !out.contains(&c.guard) {
            out.push(c.guard.clone());
        }
    }
    out
}

/// Local variables occurring free in `p`.
pub fn locals_of(p: &Pred, _m: &Monitor) -> BTreeSet<Var> {
    p.locals()
}
