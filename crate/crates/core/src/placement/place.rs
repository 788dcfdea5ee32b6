//! The placement algorithm proper.

use std::path::PathBuf;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::frontend::ast::{CcrId, Expr, Formula, Monitor, Pred};
use crate::frontend::guards;
use crate::invariants::verify_invariant;
use crate::logic::{check_triple, commutes, HoareTriple, Session, Verdict};

use super::obligations::{guarded_by, CheckKind, TripleBuilder};
use super::{instrument, Cond, ExplicitMonitor, NotificationTriple, SignalMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementOptions {
    pub use_commutativity: bool,
    /// Turning this off reproduces the unsound treatment of local guards.
    pub rename_locals: bool,
}

impl Default for PlacementOptions {
    fn default() -> Self {
        PlacementOptions { use_commutativity: true, rename_locals: true }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PlacementError {
    #[error("invariant mentions thread-local variables: {0}")]
    LocalInvariant(Formula),
    #[error("invariant {invariant} is not a monitor invariant: {verdict}")]
    InvalidInvariant { invariant: Formula, verdict: Verdict },
}

/// One discharged (or skipped) check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub kind: CheckKind,
    /// The CCR whose body the check is about, when it differs from the pair's.
    pub other: Option<String>,
    pub triple: Option<HoareTriple>,
    pub verdict: Verdict,
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReport {
    pub ccr: String,
    pub predicate: Pred,
    pub checks: Vec<CheckRecord>,
    pub decision: Option<NotificationTriple>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementReport {
    pub invariant: Formula,
    /// Set when the supplied invariant could not be confirmed and `true`
    /// was used instead.
    pub invariant_fallback: Option<String>,
    pub pairs: Vec<PairReport>,
}

impl PlacementReport {
    pub fn checks(&self) -> impl Iterator<Item = (&PairReport, &CheckRecord)> {
        self.pairs.iter().flat_map(|p| p.checks.iter().map(move |c| (p, c)))
    }
}

pub fn place_signals(
    session: &mut Session,
    m: &Monitor,
    i: &Formula,
    opts: PlacementOptions,
) -> Result<ExplicitMonitor, PlacementError> {
    explain(session, m, i, opts).map(|(em, _)| em)
}

/// Runs placement and records every triple with its verdict.
pub fn explain(
    session: &mut Session,
    m: &Monitor,
    i: &Formula,
    opts: PlacementOptions,
) -> Result<(ExplicitMonitor, PlacementReport), PlacementError> {
    if !i.is_shared_only() {
        return Err(PlacementError::LocalInvariant(i.clone()));
    }
    let mut invariant_fallback = None;
    let invariant = match verify_invariant(session, m, i) {
        Verdict::Valid => i.clone(),
        Verdict::Invalid(model) => {
            return Err(PlacementError::InvalidInvariant { invariant: i.clone(), verdict: Verdict::Invalid(model) })
        }
        Verdict::Unknown(r) => {
            // Never assume what could not be checked.
            warn!("invariant {i} unconfirmed ({r}); placing signals under true");
            invariant_fallback = Some(r);
            Expr::TRUE
        }
    };
    let mut run = Run { session, m, b: TripleBuilder::new(m, invariant.clone(), opts.rename_locals), opts, comm: Vec::new() };
    let mut sigma = SignalMap::empty(m);
    let mut pairs = Vec::new();
    for w in &m.ccrs {
        for p in guards(m) {
            let report = run.pair(w.id, &p);
            if let Some(n) = &report.decision {
                sigma.entries[w.id.0].push(n.clone());
            }
            pairs.push(report);
        }
    }
    let mut em = instrument(m, sigma);
    em.invariant = invariant.clone();
    Ok((em, PlacementReport { invariant, invariant_fallback, pairs }))
}

struct Run<'a, 's> {
    session: &'s mut Session,
    m: &'a Monitor,
    b: TripleBuilder<'a>,
    opts: PlacementOptions,
    /// Memoized commutativity per CCR.
    comm: Vec<(CcrId, bool)>,
}

impl Run<'_, '_> {
    fn check(&mut self, site: &str, p: &Pred, kind: CheckKind, other: Option<&str>, t: HoareTriple) -> CheckRecord {
        self.session.set_label(site, &p.to_string(), &other.map_or(kind.to_string(), |o| format!("{kind}:{o}")));
        let verdict = check_triple(self.session, &t);
        let dump = self.session.last_dump().map(|d| d.to_path_buf());
        CheckRecord { kind, other: other.map(str::to_string), triple: Some(t), verdict, dump }
    }

    fn commutes(&mut self, w: CcrId) -> bool {
        if let Some((_, c)) = self.comm.iter().find(|(id, _)| *id == w) {
            return *c;
        }
        self.session.set_label(&self.m.ccr(w).label, "-", "commutes");
        let c = commutes(self.session, w, self.m);
        self.comm.push((w, c));
        c
    }

    fn pair(&mut self, w: CcrId, p: &Pred) -> PairReport {
        let label = self.m.ccr(w).label.clone();
        let mut checks = Vec::new();
        let skip = self.check(&label, p, CheckKind::Skip, None, self.b.skip(w, p));
        let skip_verdict = skip.verdict.clone();
        checks.push(skip);
        if skip_verdict.is_valid() {
            return PairReport { ccr: label, predicate: p.clone(), checks, decision: None };
        }
        // An undecided skip check never justifies an unchecked notification.
        let cond = if skip_verdict.is_unknown() {
            Cond::Conditional
        } else {
            let u = self.check(&label, p, CheckKind::Unconditional, None, self.b.unconditional(w, p));
            let ok = u.verdict.is_valid();
            checks.push(u);
            if ok { Cond::Unconditional } else { Cond::Conditional }
        };
        let mut bcast = false;
        let waiters: Vec<(CcrId, String)> = guarded_by(self.m, p).map(|c| (c.id, c.label.clone())).collect();
        for (w2, l2) in waiters {
            let nb = self.check(&label, p, CheckKind::NoBroadcast, Some(&l2), self.b.no_broadcast(w2));
            let ok = nb.verdict.is_valid();
            checks.push(nb);
            if ok {
                continue;
            }
            if self.opts.use_commutativity {
                let c = self.commutes(w2);
                checks.push(CheckRecord {
                    kind: CheckKind::Commutes,
                    other: Some(l2.clone()),
                    triple: None,
                    verdict: if c { Verdict::Valid } else { Verdict::Unknown("not shown to commute".into()) },
                    dump: None,
                });
                if c {
                    let t = self.b.composed_no_broadcast(w, w2);
                    let cb = self.check(&label, p, CheckKind::ComposedNoBroadcast, Some(&l2), t);
                    let ok = cb.verdict.is_valid();
                    checks.push(cb);
                    if ok {
                        continue;
                    }
                }
            }
            bcast = true;
            break;
        }
        let decision = NotificationTriple { predicate: p.clone(), cond, bcast };
        PairReport { ccr: label, predicate: p.clone(), checks, decision: Some(decision) }
    }
}
