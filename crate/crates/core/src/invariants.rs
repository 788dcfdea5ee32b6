//! Monitor-invariant inference: abduce candidate predicates from the
//! placement triples (with `I = true`), then keep the largest subset that is
//! established by the constructor and preserved by every CCR.

use std::collections::BTreeMap;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::frontend::ast::{Expr, Formula, Monitor};
use crate::frontend::guards;
use crate::logic::{abduce, check_triple, wp, HoareTriple, Session, Verdict};
use crate::placement::obligations::{guarded_by, TripleBuilder};

/// Θ: for every CCR and guard the skip and unconditional triples, and for
/// every guard the no-broadcast triple of each CCR it guards; all with
/// `I = true` and renaming applied.
pub fn seed_triples(m: &Monitor) -> Vec<HoareTriple> {
    let b = TripleBuilder::new(m, Expr::TRUE, true);
    let gs = guards(m);
    let mut out = Vec::new();
    for w in &m.ccrs {
        for p in &gs {
            out.push(b.skip(w.id, p));
            out.push(b.unconditional(w.id, p));
        }
    }
    for p in &gs {
        out.extend(guarded_by(m, p).map(|w| b.no_broadcast(w.id)));
    }
    out
}

/// Φ with the triple each predicate was first abduced from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub predicates: Vec<Formula>,
    pub provenance: BTreeMap<String, HoareTriple>,
}

impl CandidateSet {
    fn insert(&mut self, psi: Formula, from: &HoareTriple) {
        if !self.predicates.contains(&psi) {
            self.provenance.insert(psi.to_string(), from.clone());
            self.predicates.push(psi);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitorInvariant {
    pub conjuncts: Vec<Formula>,
    pub rendered: Formula,
}

impl MonitorInvariant {
    pub fn trivial() -> Self {
        MonitorInvariant { conjuncts: Vec::new(), rendered: Expr::TRUE }
    }

    fn of(conjuncts: Vec<Formula>) -> Self {
        let rendered = Expr::and(conjuncts.iter().cloned());
        MonitorInvariant { conjuncts, rendered }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceReport {
    pub candidates: CandidateSet,
    /// Fixpoint passes until Φ stopped shrinking.
    pub passes: usize,
    /// Dropped predicates with the failed check.
    pub dropped: Vec<(String, String)>,
}

/// Phase 1: abduce over every triple that does not already hold.
pub fn candidates(session: &mut Session, theta: &[HoareTriple]) -> CandidateSet {
    let mut phi = CandidateSet::default();
    for t in theta {
        session.set_label("seed", &t.post.to_string(), "seed-triple");
        if check_triple(session, t).is_valid() {
            continue;
        }
        let goal = wp(&t.body, &t.post).pre;
        session.set_label("seed", &t.post.to_string(), "abduce");
        for psi in abduce(session, &t.pre, &goal) {
            if !psi.is_true() && psi.is_shared_only() {
                phi.insert(psi, t);
            }
        }
    }
    phi
}

pub fn infer_monitor_invariant(session: &mut Session, m: &Monitor, theta: &[HoareTriple]) -> MonitorInvariant {
    infer_with_report(session, m, theta).0
}

/// Both phases. The consecution precondition uses `I = ∧Φ` as it stood at
/// the start of the pass.
pub fn infer_with_report(session: &mut Session, m: &Monitor, theta: &[HoareTriple]) -> (MonitorInvariant, InferenceReport) {
    let cands = candidates(session, theta);
    let mut phi = cands.predicates.clone();
    let mut report = InferenceReport { candidates: cands, ..Default::default() };
    let ctor = m.ctor();
    loop {
        report.passes += 1;
        let before = phi.len();
        let inv = Expr::and(phi.iter().cloned());
        let mut kept = Vec::new();
        for psi in &phi {
            session.set_label("ctor", &psi.to_string(), "initiation");
            let init = check_triple(session, &HoareTriple::new(Expr::TRUE, ctor.clone(), psi.clone()));
            if !init.is_valid() {
                report.dropped.push((psi.to_string(), format!("initiation: {init}")));
                continue;
            }
            let broken = m.ccrs.iter().find_map(|w| {
                session.set_label(&w.label, &psi.to_string(), "consecution");
                let t = HoareTriple::new(Expr::and([inv.clone(), w.guard.clone()]), w.body.clone(), psi.clone());
                let v = check_triple(session, &t);
                (!v.is_valid()).then(|| format!("consecution over {}: {v}", w.label))
            });
            match broken {
                Some(why) => report.dropped.push((psi.to_string(), why)),
                None => kept.push(psi.clone()),
            }
        }
        phi = kept;
        debug!("invariant pass {}: {} -> {} predicates", report.passes, before, phi.len());
        if phi.len() == before {
            break;
        }
    }
    let phi = drop_redundant(session, phi, &mut report);
    let inv = MonitorInvariant::of(phi);
    // Re-checked rather than trusted.
    if !verify_invariant(session, m, &inv.rendered).is_valid() {
        info!("inferred invariant failed re-verification; using true");
        return (MonitorInvariant::trivial(), report);
    }
    (inv, report)
}

/// Removes conjuncts implied by the rest, largest first.
fn drop_redundant(session: &mut Session, mut phi: Vec<Formula>, report: &mut InferenceReport) -> Vec<Formula> {
    let mut order: Vec<Formula> = phi.clone();
    order.sort_by_key(|f| std::cmp::Reverse(f.atom_count()));
    for psi in order {
        let rest: Vec<Formula> = phi.iter().filter(|f| **f != psi).cloned().collect();
        if rest.len() == phi.len() {
            continue;
        }
        session.set_label("invariant", &psi.to_string(), "redundancy");
        if session.check_valid(&Expr::implies(Expr::and(rest.iter().cloned()), psi.clone())).is_valid() {
            report.dropped.push((psi.to_string(), "implied by the remaining conjuncts".into()));
            phi = rest;
        }
    }
    phi
}

/// Valid iff the constructor establishes `i` and every CCR preserves it.
pub fn verify_invariant(session: &mut Session, m: &Monitor, i: &Formula) -> Verdict {
    if i.is_true() {
        return Verdict::Valid;
    }
    session.set_label("ctor", &i.to_string(), "verify-initiation");
    let mut unknown = None;
    match check_triple(session, &HoareTriple::new(Expr::TRUE, m.ctor(), i.clone())) {
        Verdict::Valid => {}
        Verdict::Invalid(model) => return Verdict::Invalid(model),
        Verdict::Unknown(r) => unknown = Some(r),
    }
    for w in &m.ccrs {
        session.set_label(&w.label, &i.to_string(), "verify-consecution");
        let t = HoareTriple::new(Expr::and([i.clone(), w.guard.clone()]), w.body.clone(), i.clone());
        match check_triple(session, &t) {
            Verdict::Valid => {}
            Verdict::Invalid(model) => return Verdict::Invalid(model),
            Verdict::Unknown(r) => unknown = unknown.or(Some(r)),
        }
    }
    unknown.map_or(Verdict::Valid, Verdict::Unknown)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_monitor;

    #[test]
    fn seeds_cover_every_pair() {
        let m = parse_monitor(include_str!("../corpus/rwlock.mon")).unwrap();
        let theta = seed_triples(&m);
        assert_eq!(theta.len(), 4 * 2 * 2 + 2);
        let flat = parse_monitor("monitor F { int x = 0; a() { x = 1; } }").unwrap();
        assert!(seed_triples(&flat).is_empty());
    }
}
