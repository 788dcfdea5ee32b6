//! Syntactic well-formedness of traces.
//!
//! A trace is well-formed when, per thread, the events walk through whole
//! method bodies in order (a) without interleaving a second method before
//! the current one finishes (b), and a thread that fires a non-final CCR
//! continues with the next CCR of the same method immediately (c): it may
//! only leave the monitor by blocking or by finishing its method.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::frontend::ast::{CcrId, Monitor};

use super::state::{Event, ThreadId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IllFormedReason {
    /// CCRs of a method executed out of order.
    A,
    /// A method started before the previous one finished.
    B,
    /// The thread left the monitor mid-method without blocking.
    C,
}

impl fmt::Display for IllFormedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IllFormedReason::A => write!(f, "(a) CCRs of a method executed out of order"),
            IllFormedReason::B => write!(f, "(b) method started before the previous one finished"),
            IllFormedReason::C => write!(f, "(c) thread left the monitor without blocking or finishing"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IllFormed {
    pub index: usize,
    pub reason: IllFormedReason,
}

/// Incremental well-formedness tracker.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Positions {
    /// CCR each non-idle thread must issue its next event on.
    pub pending: BTreeMap<ThreadId, CcrId>,
    /// Thread that fired a non-final CCR on the previous event.
    pub must_continue: Option<(ThreadId, CcrId)>,
}

impl Positions {
    /// Checks that `e` may come next, without updating.
    pub fn admits(&self, e: &Event, m: &Monitor) -> Result<(), IllFormedReason> {
        if e.ccr.0 >= m.ccrs.len() {
            return Err(IllFormedReason::A);
        }
        match self.pending.get(&e.thread) {
            None if !m.is_first(e.ccr) => return Err(IllFormedReason::A),
            Some(w) if *w != e.ccr => {
                return Err(if m.ccr(*w).method == m.ccr(e.ccr).method { IllFormedReason::A } else { IllFormedReason::B })
            }
            _ => {}
        }
        match self.must_continue {
            Some((t, w)) if (t, w) != (e.thread, e.ccr) => Err(IllFormedReason::C),
            _ => Ok(()),
        }
    }

    /// True iff `e` starts a fresh method invocation.
    pub fn is_entry(&self, e: &Event) -> bool {
        !self.pending.contains_key(&e.thread)
    }

    pub fn advance(&mut self, e: &Event, m: &Monitor) {
        self.must_continue = None;
        if !e.fired {
            self.pending.insert(e.thread, e.ccr);
        } else if let Some(next) = m.succ(e.ccr) {
            self.pending.insert(e.thread, next);
            self.must_continue = Some((e.thread, next));
        } else {
            self.pending.remove(&e.thread);
        }
    }
}

pub fn check_well_formed(tau: &[Event], m: &Monitor) -> Result<(), IllFormed> {
    let mut pos = Positions::default();
    for (index, e) in tau.iter().enumerate() {
        pos.admits(e, m).map_err(|reason| IllFormed { index, reason })?;
        pos.advance(e, m);
    }
    Ok(())
}

pub fn is_well_formed(tau: &[Event], m: &Monitor) -> bool {
    check_well_formed(tau, m).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_monitor;

    #[test]
    fn fired_last_ccr_frees_the_thread() {
        let m = parse_monitor(include_str!("../../corpus/rwlock.mon")).unwrap();
        let e = |t, w: usize, b| Event::new(t, CcrId(w), b);
        assert!(is_well_formed(&[e(1, 0, true), e(1, 1, true), e(1, 2, false), e(2, 3, true)], &m));
        let err = check_well_formed(&[e(1, 2, false), e(1, 0, true)], &m).unwrap_err();
        assert_eq!(err, IllFormed { index: 1, reason: IllFormedReason::B });
    }
}
