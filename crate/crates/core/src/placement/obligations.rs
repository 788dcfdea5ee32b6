//! The Hoare triples behind each placement decision.
//!
//! For a running CCR `w` and a guard `p`, the waiter's copy of `p` is
//! renamed away from everything the runner mentions (`p̂`), so a guard over
//! thread-locals speaks about the waiter's locals, not the runner's.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::frontend::ast::{Ccr, CcrId, Expr, Formula, Monitor, Pred, Stmt};
use crate::logic::rename::{names_of, rename_apart, rename_locals};
use crate::logic::HoareTriple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CheckKind {
    /// `{I ∧ Guard(w) ∧ ¬p̂} Body(w) {¬p̂}`: no notification needed.
    Skip,
    /// `{I ∧ Guard(w) ∧ ¬p̂} Body(w) {p̂}`: notify without checking `p`.
    Unconditional,
    /// `{I ∧ p ∧ p̂} Body(w') {¬p̂}` for a CCR `w'` guarded by `p`: one
    /// woken thread falsifies `p` for the others.
    NoBroadcast,
    /// `Body(w')` commutes with every CCR body.
    Commutes,
    /// `{I ∧ Guard(w) ∧ ¬p̂} Body(w); Body(w') {¬p̂}`.
    ComposedNoBroadcast,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Skip => "skip",
            CheckKind::Unconditional => "unconditional",
            CheckKind::NoBroadcast => "no-broadcast",
            CheckKind::Commutes => "commutes",
            CheckKind::ComposedNoBroadcast => "composed-no-broadcast",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Builds the triples for a fixed invariant. With `rename` off the waiter's
/// predicate is used verbatim, which is unsound for guards over locals and
/// exists only to demonstrate that.
#[derive(Debug, Clone)]
pub struct TripleBuilder<'a> {
    pub m: &'a Monitor,
    pub invariant: Formula,
    pub rename: bool,
}

impl<'a> TripleBuilder<'a> {
    pub fn new(m: &'a Monitor, invariant: Formula, rename: bool) -> Self {
        TripleBuilder { m, invariant, rename }
    }

    /// `p` as seen by a waiter other than the thread(s) running `ctx`.
    fn waiter_copy(&self, p: &Pred, ctx_formulas: &[&Formula], ctx_stmts: &[&Stmt]) -> Pred {
        if !self.rename {
            return p.clone();
        }
        let mut avoid: BTreeSet<String> = names_of(ctx_formulas.iter().copied(), ctx_stmts.iter().copied());
        avoid.extend(names_of([p], []));
        rename_locals(p, p, &avoid).0
    }

    fn runner_pre(&self, w: &Ccr) -> Formula {
        Expr::and([self.invariant.clone(), w.guard.clone()])
    }

    pub fn skip(&self, w: CcrId, p: &Pred) -> HoareTriple {
        let w = self.m.ccr(w);
        let hat = self.waiter_copy(p, &[&w.guard, &self.invariant], &[&w.body]);
        HoareTriple::new(
            Expr::and([self.runner_pre(w), Expr::not(hat.clone())]),
            w.body.clone(),
            Expr::not(hat),
        )
    }

    pub fn unconditional(&self, w: CcrId, p: &Pred) -> HoareTriple {
        let w = self.m.ccr(w);
        let hat = self.waiter_copy(p, &[&w.guard, &self.invariant], &[&w.body]);
        HoareTriple::new(Expr::and([self.runner_pre(w), Expr::not(hat.clone())]), w.body.clone(), hat)
    }

    /// `w2` must be guarded by `p`; its runner is the woken thread.
    pub fn no_broadcast(&self, w2: CcrId) -> HoareTriple {
        let w2 = self.m.ccr(w2);
        let p = &w2.guard;
        let hat = self.waiter_copy(p, &[p, &self.invariant], &[&w2.body]);
        HoareTriple::new(Expr::and([self.invariant.clone(), p.clone(), hat.clone()]), w2.body.clone(), Expr::not(hat))
    }

    /// `Body(w); Body(w2)` with the woken thread's locals renamed apart from
    /// the runner's, and the remaining waiter renamed apart from both.
    pub fn composed_no_broadcast(&self, w: CcrId, w2: CcrId) -> HoareTriple {
        let w = self.m.ccr(w);
        let w2 = self.m.ccr(w2);
        let p = &w2.guard;
        let (woken, _) = if self.rename {
            rename_apart(&w2.body, &names_of([&w.guard, &self.invariant], [&w.body]))
        } else {
            (w2.body.clone(), Default::default())
        };
        let hat = self.waiter_copy(p, &[&w.guard, &self.invariant], &[&w.body, &woken]);
        HoareTriple::new(
            Expr::and([self.runner_pre(w), Expr::not(hat.clone())]),
            Stmt::seq([w.body.clone(), woken]),
            Expr::not(hat),
        )
    }
}

/// CCRs whose guard is syntactically `p`.
pub fn guarded_by<'m>(m: &'m Monitor, p: &'m Pred) -> impl Iterator<Item = &'m Ccr> + 'm {
    m.ccrs.iter().filter(move |c| &c.guard == p)
}
