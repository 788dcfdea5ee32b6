//! Thread-local renaming.
//!
//! Triples of the placement algorithm speak about two threads at once: the
//! running one and a waiter. Locals in the waiter's predicates are renamed so
//! they cannot be confused with the runner's copies of the same variables.

use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::ast::{Formula, Stmt, Var};

/// Renames every local of `p_other` and `q_other` to a primed variable whose
/// qualified name is not in `avoid`. Shared variables are untouched.
pub fn rename_locals(
    p_other: &Formula,
    q_other: &Formula,
    avoid: &BTreeSet<String>,
) -> (Formula, Formula, BTreeMap<Var, Var>) {
    let mut locals = p_other.locals();
    locals.extend(q_other.locals());
    let map = fresh_names(locals, avoid);
    let sub = |f: &Formula| f.subst_with(&|v| map.get(v).map(Var::expr));
    (sub(p_other), sub(q_other), map)
}

/// Renames the locals of `s` away from `avoid`, as for a second thread
/// running the same code.
pub fn rename_apart(s: &Stmt, avoid: &BTreeSet<String>) -> (Stmt, BTreeMap<Var, Var>) {
    let locals = s.vars().into_iter().filter(Var::is_local).collect();
    let map = fresh_names(locals, avoid);
    (s.rename(&map), map)
}

fn fresh_names(locals: BTreeSet<Var>, avoid: &BTreeSet<String>) -> BTreeMap<Var, Var> {
    let mut taken = avoid.clone();
    let mut map = BTreeMap::new();
    for v in locals {
        let mut name = format!("{}'", v.name);
        let mut fresh = Var { name: name.clone(), ..v.clone() };
        while taken.contains(&fresh.qualified()) || taken.contains(&fresh.name) {
            name.push('\'');
            fresh.name = name.clone();
        }
        taken.insert(fresh.qualified());
        map.insert(v, fresh);
    }
    map
}

/// Qualified names of all variables in the given formulas and statements.
pub fn names_of<'a>(formulas: impl IntoIterator<Item = &'a Formula>, stmts: impl IntoIterator<Item = &'a Stmt>) -> BTreeSet<String> {
    let mut out: BTreeSet<String> = formulas.into_iter().flat_map(|f| f.vars()).map(|v| v.qualified()).collect();
    out.extend(stmts.into_iter().flat_map(|s| s.vars()).map(|v| v.qualified()));
    out
}
