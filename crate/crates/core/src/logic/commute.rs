//! Commutativity of CCR bodies.

use std::collections::BTreeSet;

use crate::frontend::ast::{CcrId, Expr, Monitor, Stmt};

use super::rename::{names_of, rename_apart};
use super::wp::{fresh_aux, wp};
use super::{Session, Verdict};

/// Valid iff `s1; s2` and `s2; s1` reach the same final state from every
/// initial state. Both bodies must be loop-free and already use disjoint
/// locals. Encoding: for fresh constants `c`, `wp(s1;s2, v = c) ⇔
/// wp(s2;s1, v = c)` over all modified `v`; bodies are deterministic and
/// total, so this pins the final states to be equal.
pub fn bodies_commute(session: &mut Session, s1: &Stmt, s2: &Stmt) -> Verdict {
    if s1.has_loop() || s2.has_loop() {
        return Verdict::Unknown("loop in body".into());
    }
    let mut modified = s1.modified();
    modified.extend(s2.modified());
    if modified.is_empty() {
        return Verdict::Valid;
    }
    let target = Expr::and(modified.iter().map(|v| Expr::eq(v.expr(), fresh_aux(v).expr())));
    let a = wp(&Stmt::seq([s1.clone(), s2.clone()]), &target).pre;
    let b = wp(&Stmt::seq([s2.clone(), s1.clone()]), &target).pre;
    session.check_valid(&Expr::and([Expr::implies(a.clone(), b.clone()), Expr::implies(b, a)]))
}

/// True iff `Body(w)` commutes with the body of every CCR of `m`, each run by
/// a different thread. The pair of `w` with itself is included: two threads
/// can execute the same CCR back to back. Thread-local results are compared
/// too, which only makes the check stricter. `Unknown` counts as false.
pub fn commutes(session: &mut Session, w: CcrId, m: &Monitor) -> bool {
    let body = &m.ccr(w).body;
    m.ccrs.iter().all(|other| {
        let avoid: BTreeSet<String> = names_of([], [body]);
        let (renamed, _) = rename_apart(&other.body, &avoid);
        bodies_commute(session, body, &renamed).is_valid()
    })
}
