//! Weakest preconditions.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::frontend::ast::{Expr, Formula, Stmt, Var};

/// `pre` is the weakest precondition proper; `side` holds loop obligations
/// (invariant preservation and exit) that must be valid on their own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wp {
    pub pre: Formula,
    pub side: Vec<Formula>,
}

static FRESH: AtomicUsize = AtomicUsize::new(0);

/// A variable never produced before in this process. The `#` prefix cannot
/// occur in source identifiers.
pub fn fresh_aux(hint: &Var) -> Var {
    let n = FRESH.fetch_add(1, Ordering::Relaxed);
    Var::aux(&format!("#{n}_{}", hint.name), hint.sort)
}

/// Unannotated loops havoc the variables they modify and assume the exit
/// condition. The havoc values are fresh free variables: every occurrence is
/// under an even number of negations in `P ⇒ wp`, so treating them as
/// implicitly universal is sound for validity checks.
pub fn wp(s: &Stmt, q: &Formula) -> Wp {
    let mut side = Vec::new();
    let pre = wp_into(s, q.clone(), &mut side);
    Wp { pre, side }
}

fn wp_into(s: &Stmt, q: Formula, side: &mut Vec<Formula>) -> Formula {
    match s {
        Stmt::Skip => q,
        Stmt::Assign { target, value, .. } => {
            q.subst_with(&|v| if v == target { Some(value.clone()) } else { None })
        }
        Stmt::Seq(v) => v.iter().rev().fold(q, |acc, s| wp_into(s, acc, side)),
        Stmt::If { cond, then_s, else_s } => {
            let a = wp_into(then_s, q.clone(), side);
            let b = wp_into(else_s, q, side);
            Expr::and([Expr::implies(cond.clone(), a), Expr::implies(Expr::not(cond.clone()), b)])
        }
        Stmt::While { cond, invariant: Some(inv), body } => {
            let keep = wp_into(body, inv.clone(), side);
            side.push(Expr::implies(Expr::and([inv.clone(), cond.clone()]), keep));
            side.push(Expr::implies(Expr::and([inv.clone(), Expr::not(cond.clone())]), q));
            inv.clone()
        }
        Stmt::While { cond, invariant: None, body } => {
            // Nested annotated loops still owe their own obligations.
            wp_into(body, Expr::TRUE, side);
            let havoc: BTreeMap<Var, Expr> = s.modified().into_iter().map(|v| {
                let h = fresh_aux(&v).expr();
                (v, h)
            }).collect();
            Expr::implies(Expr::not(cond.subst(&havoc)), q.subst(&havoc))
        }
    }
}
