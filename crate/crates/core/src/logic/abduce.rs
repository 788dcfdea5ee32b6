//! Abduction: given `P` and a goal, find shared-only `ψ` with `P ∧ ψ ⊨ goal`
//! and `P ∧ ψ` satisfiable.
//!
//! Candidates come from two sources. Universal projections `∀X. P ⇒ goal`
//! eliminate every variable outside a small set of shared variables; each is
//! the weakest abduct over that set. Linear atoms found in the projections,
//! in `P` and in the goal are then varied by shifting and flipping their
//! bound, which recovers simple inductive facts such as `readers >= 0` from a
//! projection like `readers != -1`. Every candidate is re-verified before it
//! is returned, so the generation heuristics only affect completeness.

use std::collections::{BTreeMap, BTreeSet};

use log::debug;

use crate::frontend::ast::{ArithOp, CmpOp, Expr, Formula, Sort, Var};

use super::{Session, Verdict};

/// Upper bound on returned solutions per query.
pub const ABDUCE_LIMIT: usize = 8;
/// Largest shared-variable subset projected onto.
const MAX_SUBSET: usize = 3;

pub fn abduce(session: &mut Session, p: &Formula, goal: &Formula) -> Vec<Formula> {
    if !session.is_online() {
        debug!("abduce skipped: no solver");
        return Vec::new();
    }
    let entail = Expr::implies(p.clone(), goal.clone());
    match session.check_valid(&entail) {
        Verdict::Valid => {
            return if consistent(session, p) { vec![Expr::TRUE] } else { Vec::new() };
        }
        Verdict::Unknown(r) => {
            debug!("abduce: entailment unknown ({r})");
            return Vec::new();
        }
        Verdict::Invalid(_) => {}
    }
    if !consistent(session, p) {
        return Vec::new();
    }

    let vars = entail.vars();
    let shared: Vec<Var> = vars.iter().filter(|v| v.is_shared()).cloned().collect();
    let mut pool: BTreeSet<Expr> = BTreeSet::new();
    let mut atoms: BTreeSet<Expr> = BTreeSet::new();
    for subset in subsets(&shared, MAX_SUBSET) {
        let keep: BTreeSet<&Var> = subset.iter().collect();
        let bound: BTreeSet<Var> = vars.iter().filter(|v| !keep.contains(v)).cloned().collect();
        if let Some(conj) = session.forall_eliminate(&entail, &bound) {
            for c in &conj {
                collect_atoms(c, &mut atoms);
            }
            let psi = Expr::and(conj).simplify();
            if !psi.is_true() && !psi.is_false() {
                pool.insert(psi);
            }
        }
    }
    for f in [p, goal] {
        collect_atoms(f, &mut atoms);
    }
    for a in &atoms {
        if !a.is_shared_only() {
            continue;
        }
        match a {
            Expr::Var(v) if v.sort == Sort::Bool => {
                pool.insert(a.clone());
                pool.insert(Expr::not(a.clone()));
            }
            Expr::Cmp(_, l, r) if l.sort() == Sort::Int => pool.extend(variants(l, r)),
            _ => {}
        }
    }

    let mut ranked: Vec<Expr> = pool.into_iter().collect();
    ranked.sort_by_cached_key(|e| (e.vars().len(), e.atom_count(), e.to_string()));
    let mut out = Vec::new();
    for psi in ranked {
        if out.len() == ABDUCE_LIMIT {
            break;
        }
        let strengthened = Expr::and([p.clone(), psi.clone()]);
        if session.check_valid(&Expr::implies(strengthened.clone(), goal.clone())).is_valid()
            && consistent(session, &strengthened)
        {
            out.push(psi);
        }
    }
    out
}

/// `f` is satisfiable, i.e. `¬f` has a countermodel.
fn consistent(session: &mut Session, f: &Formula) -> bool {
    session.check_valid(&Expr::not(f.clone())).is_invalid()
}

/// Non-empty subsets of size at most `max`, smallest first.
fn subsets(vars: &[Var], max: usize) -> Vec<Vec<Var>> {
    let mut out: Vec<Vec<Var>> = Vec::new();
    for mask in 1u32..(1 << vars.len().min(16)) {
        if mask.count_ones() as usize <= max {
            out.push(vars.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, v)| v.clone()).collect());
        }
    }
    out.sort_by_key(Vec::len);
    out
}

fn collect_atoms(e: &Expr, out: &mut BTreeSet<Expr>) {
    match e {
        Expr::Not(a) => collect_atoms(a, out),
        Expr::And(v) | Expr::Or(v) => v.iter().for_each(|x| collect_atoms(x, out)),
        Expr::Implies(a, b) => {
            collect_atoms(a, out);
            collect_atoms(b, out);
        }
        Expr::Cmp(..) => {
            out.insert(e.clone());
        }
        Expr::Var(v) if v.sort == Sort::Bool => {
            out.insert(e.clone());
        }
        _ => {}
    }
}

/// Linear form `Σ kᵢ·xᵢ + c`.
fn linear(e: &Expr) -> Option<(BTreeMap<Var, i64>, i64)> {
    let mut terms = BTreeMap::new();
    let mut c = 0i64;
    linear_into(e, 1, &mut terms, &mut c)?;
    terms.retain(|_, k| *k != 0);
    Some((terms, c))
}

fn linear_into(e: &Expr, scale: i64, terms: &mut BTreeMap<Var, i64>, c: &mut i64) -> Option<()> {
    match e {
        Expr::Int(n) => *c = c.checked_add(n.checked_mul(scale)?)?,
        Expr::Var(v) if v.sort == Sort::Int => {
            let k = terms.entry(v.clone()).or_insert(0);
            *k = k.checked_add(scale)?;
        }
        Expr::Neg(a) => linear_into(a, scale.checked_neg()?, terms, c)?,
        Expr::Arith(ArithOp::Add, a, b) => {
            linear_into(a, scale, terms, c)?;
            linear_into(b, scale, terms, c)?;
        }
        Expr::Arith(ArithOp::Sub, a, b) => {
            linear_into(a, scale, terms, c)?;
            linear_into(b, scale.checked_neg()?, terms, c)?;
        }
        Expr::Arith(ArithOp::Mul, a, b) => match (&**a, &**b) {
            (Expr::Int(k), x) | (x, Expr::Int(k)) => linear_into(x, scale.checked_mul(*k)?, terms, c)?,
            _ => return None,
        },
        _ => return None,
    }
    Some(())
}

fn scaled(v: &Var, k: i64) -> Expr {
    if k == 1 {
        v.expr()
    } else {
        Expr::arith(ArithOp::Mul, Expr::Int(k), v.expr())
    }
}

/// `Σ kᵢxᵢ op c` rendered with positive coefficients on the left.
fn render(terms: &BTreeMap<Var, i64>, op: CmpOp, c: i64) -> Expr {
    let pos: Vec<Expr> = terms.iter().filter(|(_, k)| **k > 0).map(|(v, k)| scaled(v, *k)).collect();
    let neg: Vec<Expr> = terms.iter().filter(|(_, k)| **k < 0).map(|(v, k)| scaled(v, -k)).collect();
    let sum = |v: Vec<Expr>| v.into_iter().reduce(Expr::add);
    match (sum(pos), sum(neg)) {
        (Some(l), None) => Expr::cmp(op, l, Expr::Int(c)),
        (None, Some(r)) => Expr::cmp(op, Expr::Int(-c), r).flip(),
        (Some(l), Some(r)) => {
            let rhs = match c {
                0 => r,
                c if c > 0 => Expr::add(r, Expr::Int(c)),
                c => Expr::sub(r, Expr::Int(-c)),
            };
            Expr::cmp(op, l, rhs)
        }
        (None, None) => Expr::cmp(op, Expr::Int(0), Expr::Int(c)),
    }
}

/// Bound variations of the atom `l ? r`.
fn variants(l: &Expr, r: &Expr) -> Vec<Expr> {
    let Some((mut terms, c)) = linear(&Expr::sub(l.clone(), r.clone())) else { return Vec::new() };
    terms.retain(|_, k| *k != 0);
    if terms.is_empty() {
        return Vec::new();
    }
    // t + c ? 0  ⇔  t ? -c
    let Some(b) = c.checked_neg() else { return Vec::new() };
    let (Some(lo), Some(hi)) = (b.checked_sub(1), b.checked_add(1)) else { return Vec::new() };
    [(CmpOp::Le, b), (CmpOp::Ge, b), (CmpOp::Le, lo), (CmpOp::Ge, hi), (CmpOp::Eq, b), (CmpOp::Ne, b)]
        .into_iter()
        .map(|(op, k)| render(&terms, op, k))
        .collect()
}

trait Flip {
    fn flip(self) -> Expr;
}

impl Flip for Expr {
    /// `a op b` to `b op' a`.
    fn flip(self) -> Expr {
        match self {
            Expr::Cmp(op, a, b) => {
                let op = match op {
                    CmpOp::Lt => CmpOp::Gt,
                    CmpOp::Le => CmpOp::Ge,
                    CmpOp::Gt => CmpOp::Lt,
                    CmpOp::Ge => CmpOp::Le,
                    o => o,
                };
                Expr::Cmp(op, b, a)
            }
            e => e,
        }
    }
}
