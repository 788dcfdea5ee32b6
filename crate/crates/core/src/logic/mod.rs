//! Formulas, weakest preconditions, and Hoare-triple discharge.
//!
//! Validity questions go to an external SMT solver through [`Session`];
//! everything else here is pure.

pub mod abduce;
pub mod commute;
pub mod rename;
pub mod sexpr;
pub mod smt;
pub mod wp;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::frontend::ast::{Expr, Formula, Stmt, Value, Var};

pub use abduce::{abduce, ABDUCE_LIMIT};
pub use commute::{bodies_commute, commutes};
pub use rename::{rename_apart, rename_locals};
pub use smt::{locate_solver, Session, SolverError, DEFAULT_TIMEOUT};
pub use wp::{wp, Wp};

/// A (partial) assignment returned with an `Invalid` verdict.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Model(pub BTreeMap<Var, Value>);

impl Model {
    pub fn get(&self, name: &str) -> Option<Value> {
        self.0.iter().find(|(v, _)| v.name == name || v.qualified() == name).map(|(_, x)| *x)
    }

    /// Evaluates `f` under the model; unassigned variables are an error.
    pub fn satisfies(&self, f: &Formula) -> Option<bool> {
        f.eval(&|v| self.0.get(v).copied()).ok()?.as_bool()
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.0.iter().filter(|(v, _)| !v.name.starts_with('#')).map(|(v, x)| format!("{} = {x}", v.qualified())).collect();
        write!(f, "{}", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Valid,
    Invalid(Model),
    Unknown(String),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn is_invalid(&self) -> bool {
        matches!(self, Verdict::Invalid(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Valid => "valid",
            Verdict::Invalid(_) => "invalid",
            Verdict::Unknown(_) => "unknown",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => write!(f, "Valid"),
            Verdict::Invalid(m) => write!(f, "Invalid [{m}]"),
            Verdict::Unknown(r) => write!(f, "Unknown ({r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoareTriple {
    pub pre: Formula,
    pub body: Stmt,
    pub post: Formula,
}

impl HoareTriple {
    pub fn new(pre: Formula, body: Stmt, post: Formula) -> HoareTriple {
        HoareTriple { pre, body, post }
    }

    /// `pre ⇒ wp(body, post)` followed by any loop side conditions.
    pub fn obligations(&self) -> Vec<Formula> {
        let w = wp(&self.body, &self.post);
        let mut out = vec![Expr::implies(self.pre.clone(), w.pre)];
        out.extend(w.side);
        out
    }
}

impl fmt::Display for HoareTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}} {} {{{}}}", self.pre, self.body, self.post)
    }
}

pub fn check_valid(session: &mut Session, f: &Formula) -> Verdict {
    session.check_valid(f)
}

/// Conjunction of the verdicts of all obligations: the first `Invalid`
/// wins, otherwise any `Unknown` makes the result `Unknown`.
pub fn check_triple(session: &mut Session, t: &HoareTriple) -> Verdict {
    let mut unknown = None;
    for f in t.obligations() {
        match session.check_valid(&f) {
            Verdict::Valid => {}
            Verdict::Invalid(m) => return Verdict::Invalid(m),
            Verdict::Unknown(r) => unknown = unknown.or(Some(r)),
        }
    }
    unknown.map_or(Verdict::Valid, Verdict::Unknown)
}
