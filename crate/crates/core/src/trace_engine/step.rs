//! Transition relations.
//!
//! Both engines share rules (1a) and (1b):
//!
//! - (1a) `(t,w,false)`, `ē ∉ B`, guard false: `B ∪ {ē}`.
//! - (1b) `(t,w,false)`, `ē ∈ N`, guard false: `N \ {ē}`.
//! - (2a) `(t,w,true)`, `ē ∉ B`, guard true: run the body, add notifications.
//! - (2b) `(t,w,true)`, `ē = min(N)`, guard true: run the body,
//!   `B \ {ē}`, `(N ∪ notifications) \ {ē}`.
//!
//! The implicit engine notifies every blocked pair whose guard holds after
//! the body. The explicit engine notifies per the signal map: signals pick
//! the ≺-least candidate, broadcasts take all candidates, and conditional
//! entries only consider waiters whose guard holds.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::frontend::ast::{Monitor, Sort, Value, Var};
use crate::placement::{Cond, ExplicitMonitor, SignalMap};

use super::exec::{exec_body, ExecError, DEFAULT_FUEL};
use super::state::{Event, EventKey, MonitorState, StepState, ThreadId};
use super::wellformed::{check_well_formed, IllFormed};

#[derive(Debug, Clone, Copy)]
pub enum Engine<'a> {
    Implicit,
    Explicit(&'a SignalMap),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    R1a,
    R1b,
    R2a,
    R2b,
}

impl Rule {
    pub const ALL: [Rule; 4] = [Rule::R1a, Rule::R1b, Rule::R2a, Rule::R2b];
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::R1a => "1a",
            Rule::R1b => "1b",
            Rule::R2a => "2a",
            Rule::R2b => "2b",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Infeasible {
    #[error("fired with a false guard")]
    GuardFalse,
    #[error("blocked with a true guard")]
    GuardTrue,
    #[error("blocked again without a pending notification")]
    NotNotified,
    #[error("woken thread is not the least notified event")]
    NotMinimal,
    #[error("body failed: {0}")]
    Exec(#[from] ExecError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub state: StepState,
    pub rule: Rule,
}

/// Binds parameters when `e` enters its method: the first CCR of a method
/// reached by a thread that is not already blocked on it. Missing arguments
/// keep the thread's previous value (or the sort default). Declared locals
/// are reset to their defaults.
fn bind_entry(sigma: &mut MonitorState, e: &Event, m: &Monitor, blocked: &BTreeSet<EventKey>) {
    if !m.is_first(e.ccr) || blocked.contains(&e.key()) {
        return;
    }
    let md = m.method_of(e.ccr);
    let default = |v: &Var| match v.sort {
        Sort::Int => Value::Int(0),
        Sort::Bool => Value::Bool(false),
    };
    for (i, p) in md.params.iter().enumerate() {
        let v = e.args.get(i).copied().or_else(|| sigma.get(e.thread, &p.var)).unwrap_or_else(|| default(&p.var));
        sigma.set(e.thread, &p.var, v);
    }
    for l in &md.locals {
        sigma.set(e.thread, l, default(l));
    }
}

fn guard_holds(sigma: &MonitorState, t: ThreadId, w: crate::frontend::ast::CcrId, m: &Monitor) -> Result<bool, ExecError> {
    Ok(sigma.holds(t, &m.ccr(w).guard)?)
}

/// Implicit notifications: every pair in `blocked` whose guard now holds.
fn implicit_notifications(
    sigma: &MonitorState,
    blocked: &BTreeSet<EventKey>,
    m: &Monitor,
) -> Result<BTreeSet<EventKey>, ExecError> {
    let mut out = BTreeSet::new();
    for &(t, w) in blocked {
        if guard_holds(sigma, t, w, m)? {
            out.insert((t, w));
        }
    }
    Ok(out)
}

/// The least notification whose guard still holds. Stale entries stay in
/// `N` but never hold back a thread that can actually proceed.
fn live_min(sigma: &MonitorState, notified: &BTreeSet<EventKey>, m: &Monitor) -> Result<Option<EventKey>, ExecError> {
    for &(t, w) in notified {
        if guard_holds(sigma, t, w, m)? {
            return Ok(Some((t, w)));
        }
    }
    Ok(None)
}

/// `GetSignals ∪ GetBroadcasts` for the CCR `w` that just ran.
pub fn explicit_notifications(
    w: crate::frontend::ast::CcrId,
    sigma: &MonitorState,
    blocked: &BTreeSet<EventKey>,
    m: &Monitor,
    sigma_map: &SignalMap,
) -> Result<BTreeSet<EventKey>, ExecError> {
    let mut out = BTreeSet::new();
    for n in sigma_map.get(w) {
        let mut candidates = Vec::new();
        for &(t, w2) in blocked {
            if m.ccr(w2).guard != n.predicate {
                continue;
            }
            if n.cond == Cond::Conditional && !sigma.holds(t, &n.predicate)? {
                continue;
            }
            candidates.push((t, w2));
        }
        if n.bcast {
            out.extend(candidates);
        } else if let Some(first) = candidates.first() {
            out.insert(*first);
        }
    }
    Ok(out)
}

pub fn step(st: &StepState, e: &Event, m: &Monitor, engine: Engine) -> Result<Step, Infeasible> {
    let key = e.key();
    let mut sigma = st.sigma.clone();
    bind_entry(&mut sigma, e, m, &st.blocked);
    let g = guard_holds(&sigma, e.thread, e.ccr, m)?;
    if !e.fired {
        if g {
            return Err(Infeasible::GuardTrue);
        }
        let mut next = StepState { sigma, blocked: st.blocked.clone(), notified: st.notified.clone() };
        if !st.blocked.contains(&key) {
            next.blocked.insert(key);
            return Ok(Step { state: next, rule: Rule::R1a });
        }
        if st.notified.contains(&key) {
            next.notified.remove(&key);
            return Ok(Step { state: next, rule: Rule::R1b });
        }
        return Err(Infeasible::NotNotified);
    }
    if !g {
        return Err(Infeasible::GuardFalse);
    }
    let rule = if !st.blocked.contains(&key) {
        Rule::R2a
    } else if live_min(&sigma, &st.notified, m)? == Some(key) {
        Rule::R2b
    } else {
        return Err(Infeasible::NotMinimal);
    };
    let sigma2 = exec_body(&m.ccr(e.ccr).body, e.thread, &sigma, DEFAULT_FUEL)?;
    let mut blocked = st.blocked.clone();
    blocked.remove(&key);
    let fresh = match engine {
        Engine::Implicit => implicit_notifications(&sigma2, &blocked, m)?,
        Engine::Explicit(sm) => {
            // A signal goes to a thread still waiting, not one already woken.
            let waiting: BTreeSet<EventKey> = blocked.difference(&st.notified).copied().collect();
            explicit_notifications(e.ccr, &sigma2, &waiting, m, sm)?
        }
    };
    let mut notified = st.notified.clone();
    notified.extend(fresh);
    notified.remove(&key);
    Ok(Step { state: StepState { sigma: sigma2, blocked, notified }, rule })
}

pub fn step_implicit(st: &StepState, e: &Event, m: &Monitor) -> Result<Step, Infeasible> {
    step(st, e, m, Engine::Implicit)
}

pub fn step_explicit(st: &StepState, e: &Event, em: &ExplicitMonitor) -> Result<Step, Infeasible> {
    step(st, e, &em.base, Engine::Explicit(&em.sigma_map))
}

/// One line of `--trace-log` output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub index: usize,
    pub rule: Rule,
    pub event: Event,
    pub blocked: BTreeSet<EventKey>,
    pub notified: BTreeSet<EventKey>,
    pub changed: Vec<(Var, Value)>,
}

impl StepRecord {
    pub fn display(&self, m: &Monitor) -> String {
        let changed: Vec<String> = self.changed.iter().map(|(v, x)| format!("{v}={x}")).collect();
        format!(
            "{}\t{}\t{}\tB={}\tN={}\t{}",
            self.index,
            self.rule,
            self.event.display(m),
            super::state::display_keys(&self.blocked, m),
            super::state::display_keys(&self.notified, m),
            changed.join(",")
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    Feasible(StepState),
    Infeasible { index: usize, reason: Infeasible },
}

impl RunOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, RunOutcome::Feasible(_))
    }
}

/// Folds the engine over `tau` from `(sigma0, ∅, ∅)`, recording each step.
pub fn run_logged(
    sigma0: &MonitorState,
    tau: &[Event],
    m: &Monitor,
    engine: Engine,
) -> Result<(RunOutcome, Vec<StepRecord>), IllFormed> {
    check_well_formed(tau, m)?;
    let mut st = StepState::new(sigma0.clone());
    let mut log = Vec::new();
    for (index, e) in tau.iter().enumerate() {
        match step(&st, e, m, engine) {
            Ok(s) => {
                log.push(StepRecord {
                    index,
                    rule: s.rule,
                    event: e.clone(),
                    blocked: s.state.blocked.clone(),
                    notified: s.state.notified.clone(),
                    changed: st.sigma.changed_shared(&s.state.sigma),
                });
                st = s.state;
            }
            Err(reason) => return Ok((RunOutcome::Infeasible { index, reason }, log)),
        }
    }
    Ok((RunOutcome::Feasible(st), log))
}

pub fn run(sigma0: &MonitorState, tau: &[Event], m: &Monitor, engine: Engine) -> Result<RunOutcome, IllFormed> {
    run_logged(sigma0, tau, m, engine).map(|(o, _)| o)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NormalizedError {
    #[error("trace is ill-formed at index {}", .0.index)]
    IllFormed(IllFormed),
    #[error("trace is infeasible at index {0}")]
    Infeasible(usize),
}

/// True iff the implicit run never applies rule (1b).
pub fn is_normalized(sigma0: &MonitorState, tau: &[Event], m: &Monitor) -> Result<bool, NormalizedError> {
    let (outcome, log) = run_logged(sigma0, tau, m, Engine::Implicit).map_err(NormalizedError::IllFormed)?;
    match outcome {
        RunOutcome::Feasible(_) => Ok(log.iter().all(|r| r.rule != Rule::R1b)),
        RunOutcome::Infeasible { index, .. } => Err(NormalizedError::Infeasible(index)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::ast::CcrId;
    use crate::frontend::parse_monitor;
    use crate::placement::NotificationTriple;

    fn rwlock() -> Monitor {
        parse_monitor(include_str!("../../corpus/rwlock.mon")).unwrap()
    }

    fn state(m: &Monitor, readers: i64, writer_in: bool) -> MonitorState {
        MonitorState::initial(m)
            .with(0, &m.fields[0].var, Value::Int(readers))
            .with(0, &m.fields[1].var, Value::Bool(writer_in))
    }

    const ENTER_READER: CcrId = CcrId(0);
    const EXIT_READER: CcrId = CcrId(1);
    const ENTER_WRITER: CcrId = CcrId(2);

    #[test]
    fn blocking_adds_to_b() {
        let m = rwlock();
        let st = StepState::new(state(&m, 1, false));
        let s = step_implicit(&st, &Event::new(1, ENTER_WRITER, false), &m).unwrap();
        assert_eq!(s.rule, Rule::R1a);
        assert_eq!(s.state.blocked, BTreeSet::from([(1, ENTER_WRITER)]));
    }

    #[test]
    fn skip_body_notifies_nobody() {
        let m = parse_monitor("monitor S { m() { } }").unwrap();
        let st = StepState::new(MonitorState::initial(&m));
        let s = step_implicit(&st, &Event::new(1, CcrId(0), true), &m).unwrap();
        assert_eq!(s.state.sigma, st.sigma);
        assert!(s.state.notified.is_empty());
    }

    #[test]
    fn exit_reader_wakes_writer() {
        let m = rwlock();
        let mut st = StepState::new(state(&m, 1, false));
        st.blocked.insert((2, ENTER_WRITER));
        let s = step_implicit(&st, &Event::new(1, EXIT_READER, true), &m).unwrap();
        assert_eq!(s.rule, Rule::R2a);
        assert_eq!(s.state.sigma.shared(&m.fields[0].var), Some(Value::Int(0)));
        assert_eq!(s.state.notified, BTreeSet::from([(2, ENTER_WRITER)]));
    }

    fn exit_reader_signal(m: &Monitor) -> SignalMap {
        let mut sm = SignalMap::empty(m);
        sm.entries[EXIT_READER.0].push(NotificationTriple {
            predicate: m.ccr(ENTER_WRITER).guard.clone(),
            cond: Cond::Conditional,
            bcast: false,
        });
        sm
    }

    #[test]
    fn explicit_conditional_signal() {
        let m = rwlock();
        let sm = exit_reader_signal(&m);
        let mut st = StepState::new(state(&m, 1, false));
        st.blocked.insert((2, ENTER_WRITER));
        let s = step(&st, &Event::new(1, EXIT_READER, true), &m, Engine::Explicit(&sm)).unwrap();
        assert_eq!(s.state.notified, BTreeSet::from([(2, ENTER_WRITER)]));
        // The check fails when readers stays positive.
        let st2 = StepState { sigma: state(&m, 2, false), ..st };
        let s2 = step(&st2, &Event::new(1, EXIT_READER, true), &m, Engine::Explicit(&sm)).unwrap();
        assert!(s2.state.notified.is_empty());
    }

    #[test]
    fn signal_picks_the_least_waiter() {
        let m = rwlock();
        let sm = exit_reader_signal(&m);
        let mut st = StepState::new(state(&m, 1, false));
        st.blocked.insert((2, ENTER_WRITER));
        st.blocked.insert((3, ENTER_WRITER));
        let s = step(&st, &Event::new(1, EXIT_READER, true), &m, Engine::Explicit(&sm)).unwrap();
        assert_eq!(s.state.notified, BTreeSet::from([(2, ENTER_WRITER)]));
        let empty = SignalMap::empty(&m);
        let s3 = step(&st, &Event::new(1, EXIT_READER, true), &m, Engine::Explicit(&empty)).unwrap();
        assert_eq!(s3.state.notified, st.notified);
    }

    #[test]
    fn run_examples() {
        let m = rwlock();
        let s0 = MonitorState::initial(&m);
        assert_eq!(run(&s0, &[], &m, Engine::Implicit).unwrap(), RunOutcome::Feasible(StepState::new(s0.clone())));
        let bad = run(&state(&m, 0, true), &[Event::new(1, ENTER_READER, true)], &m, Engine::Implicit).unwrap();
        assert_eq!(bad, RunOutcome::Infeasible { index: 0, reason: Infeasible::GuardFalse });
    }

    #[test]
    fn rebocking_after_notification_is_not_normalized() {
        // Writer 3 blocks, reader 1 leaves, reader 2 enters before the writer
        // wakes, so the writer re-blocks via (1b).
        let m = rwlock();
        let s0 = state(&m, 1, false);
        let tau = vec![
            Event::new(3, ENTER_WRITER, false),
            Event::new(1, EXIT_READER, true),
            Event::new(2, ENTER_READER, true),
            Event::new(3, ENTER_WRITER, false),
        ];
        let (outcome, log) = run_logged(&s0, &tau, &m, Engine::Implicit).unwrap();
        assert!(outcome.is_feasible());
        let rules: Vec<Rule> = log.iter().map(|r| r.rule).collect();
        assert_eq!(rules, [Rule::R1a, Rule::R2a, Rule::R2a, Rule::R1b]);
        assert_eq!(is_normalized(&s0, &tau, &m), Ok(false));
        assert_eq!(is_normalized(&s0, &tau[..3], &m), Ok(true));
    }
}
