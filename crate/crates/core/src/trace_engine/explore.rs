//! Bounded enumeration of well-formed traces.
//!
//! The equivalence check explores the implicit and explicit engines in
//! lockstep, breadth-first over trace length, deduplicating configurations
//! globally: a configuration first reached at depth `k` has the most
//! remaining budget it will ever have, so later visits are subsumed.
//! Breadth-first order also makes the first counterexample a shortest one.
//!
//! Only explicit-feasible prefixes are extended. An event the explicit
//! engine rejects can still witness a violation of condition (2) when the
//! implicit engine accepts it on a normalized prefix; otherwise both
//! engines are done with that branch.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::frontend::ast::{CcrId, Expr, Formula, Monitor, Sort, Value, Var};
use crate::placement::{ExplicitMonitor, SignalMap};

use super::exec::exec_body;
use super::state::{display_trace, Event, EventKey, Layout, MonitorState, StepState, ThreadId, Trace};
use super::step::{step, Engine, Rule, Step};
use super::wellformed::Positions;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundsConfig {
    pub threads: usize,
    pub length: usize,
    pub min_value: i64,
    pub max_value: i64,
    pub max_traces: u64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig { threads: 3, length: 8, min_value: 0, max_value: 3, max_traces: 1_000_000 }
    }
}

impl BoundsConfig {
    pub fn values(&self, sort: Sort) -> Vec<Value> {
        match sort {
            Sort::Int => (self.min_value..=self.max_value).map(Value::Int).collect(),
            Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
        }
    }
}

fn product<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for c in choices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                c.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Every assignment of the shared variables over the value domain that
/// satisfies `invariant`.
pub fn initial_states(m: &Monitor, invariant: &Formula, cfg: &BoundsConfig) -> Vec<MonitorState> {
    let layout = Layout::of_monitor(m);
    let vars = m.shared_vars();
    let choices: Vec<Vec<Value>> = vars.iter().map(|v| cfg.values(v.sort)).collect();
    product(&choices)
        .into_iter()
        .map(|vals| {
            let mut s = MonitorState::new(layout.clone());
            for (v, x) in vars.iter().zip(vals) {
                s.set(0, v, x);
            }
            s
        })
        .filter(|s| s.holds(0, invariant).unwrap_or(false))
        .collect()
}

/// Events that may extend a trace whose well-formedness state is `pos`.
/// Events on a method's first CCR carry the thread's arguments, so that
/// deleting an earlier blocked event never loses a parameter binding.
fn candidate_events(pos: &Positions, sigma: &MonitorState, m: &Monitor, cfg: &BoundsConfig) -> Vec<Event> {
    let mut out = Vec::new();
    let mut push_pair = |t: ThreadId, w: CcrId, args: Vec<Value>| {
        out.push(Event::new(t, w, true).with_args(args.clone()));
        out.push(Event::new(t, w, false).with_args(args));
    };
    let current_args = |t: ThreadId, w: CcrId| -> Vec<Value> {
        if !m.is_first(w) {
            return Vec::new();
        }
        m.method_of(w).params.iter().filter_map(|p| sigma.get(t, &p.var)).collect()
    };
    if let Some((t, w)) = pos.must_continue {
        push_pair(t, w, current_args(t, w));
        return out;
    }
    for t in 1..=cfg.threads {
        match pos.pending.get(&t) {
            Some(&w) => push_pair(t, w, current_args(t, w)),
            None => {
                for md in &m.methods {
                    let choices: Vec<Vec<Value>> = md.params.iter().map(|p| cfg.values(p.var.sort)).collect();
                    for args in product(&choices) {
                        push_pair(t, md.ccrs[0], args);
                    }
                }
            }
        }
    }
    out
}

/// Locals of threads outside any method are dead; dropping them merges
/// configurations that differ only there.
fn forget_idle_locals(sigma: &mut MonitorState, pos: &Positions) {
    let idle: Vec<ThreadId> = sigma.threads().filter(|t| !pos.pending.contains_key(t)).collect();
    for t in idle {
        sigma.clear_locals(t);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductConfig {
    pub sigma: MonitorState,
    pub blocked: BTreeSet<EventKey>,
    pub n_implicit: BTreeSet<EventKey>,
    pub n_explicit: BTreeSet<EventKey>,
    /// The implicit run so far never used rule (1b).
    pub normalized: bool,
    pub pos: Positions,
}

impl ProductConfig {
    pub fn implicit(&self) -> StepState {
        StepState { sigma: self.sigma.clone(), blocked: self.blocked.clone(), notified: self.n_implicit.clone() }
    }

    pub fn explicit(&self) -> StepState {
        StepState { sigma: self.sigma.clone(), blocked: self.blocked.clone(), notified: self.n_explicit.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// 1 or 2 for the two equivalence conditions; 0 for an observer property.
    pub condition: u8,
    pub sigma0: String,
    #[serde(skip)]
    pub initial: Option<MonitorState>,
    pub trace: Trace,
    pub rendered: String,
    pub detail: String,
}

impl Counterexample {
    pub fn threads(&self) -> usize {
        self.trace.iter().map(|e| e.thread).collect::<BTreeSet<_>>().len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum EquivOutcome {
    Pass,
    Counterexample(Box<Counterexample>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivReport {
    pub outcome: EquivOutcome,
    /// False when the enumeration cap stopped the search early.
    pub complete: bool,
    pub initial_states: usize,
    pub configurations: u64,
    pub traces: u64,
    pub depth: usize,
    pub implicit_rules: BTreeMap<Rule, u64>,
    pub explicit_rules: BTreeMap<Rule, u64>,
}

impl EquivReport {
    pub fn passed(&self) -> bool {
        self.outcome == EquivOutcome::Pass
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match &self.outcome {
            EquivOutcome::Counterexample(c) => Some(c),
            EquivOutcome::Pass => None,
        }
    }
}

struct Crumb {
    parent: u32,
    init: u32,
    event: Option<Event>,
}

fn rebuild(arena: &[Crumb], mut at: u32) -> (u32, Trace) {
    let mut events = Vec::new();
    loop {
        let c = &arena[at as usize];
        match &c.event {
            Some(e) => {
                events.push(e.clone());
                at = c.parent;
            }
            None => {
                events.reverse();
                return (c.init, events);
            }
        }
    }
}

/// Checks both equivalence conditions within the bounds, starting from
/// every domain state that satisfies the explicit monitor's invariant.
pub fn check_equivalence_bounded(m: &Monitor, em: &ExplicitMonitor, cfg: &BoundsConfig) -> EquivReport {
    check_equivalence_with(m, &em.sigma_map, &em.invariant, cfg, &mut |_: &Monitor, _: &ProductConfig| None)
}

/// As [`check_equivalence_bounded`], additionally calling `observer` on
/// every reachable product configuration; a returned message is reported
/// as a violation.
pub fn check_equivalence_with(
    m: &Monitor,
    sigma_map: &SignalMap,
    invariant: &Formula,
    cfg: &BoundsConfig,
    observer: &mut dyn FnMut(&Monitor, &ProductConfig) -> Option<String>,
) -> EquivReport {
    let inits = initial_states(m, invariant, cfg);
    let mut report = EquivReport {
        outcome: EquivOutcome::Pass,
        complete: true,
        initial_states: inits.len(),
        configurations: 0,
        traces: 0,
        depth: 0,
        implicit_rules: BTreeMap::new(),
        explicit_rules: BTreeMap::new(),
    };
    let mut arena: Vec<Crumb> = Vec::new();
    let mut visited: HashSet<ProductConfig> = HashSet::new();
    let mut frontier: Vec<(ProductConfig, u32)> = Vec::new();
    for (i, s0) in inits.iter().enumerate() {
        let c = ProductConfig {
            sigma: s0.clone(),
            blocked: BTreeSet::new(),
            n_implicit: BTreeSet::new(),
            n_explicit: BTreeSet::new(),
            normalized: true,
            pos: Positions::default(),
        };
        if visited.insert(c.clone()) {
            arena.push(Crumb { parent: u32::MAX, init: i as u32, event: None });
            frontier.push((c, (arena.len() - 1) as u32));
        }
    }
    let found = |arena: &[Crumb], at: u32, extra: Option<Event>, condition: u8, detail: String| {
        let (init, mut trace) = rebuild(arena, at);
        trace.extend(extra);
        let s0 = &inits[init as usize];
        Box::new(Counterexample {
            condition,
            sigma0: s0.to_string(),
            initial: Some(s0.clone()),
            rendered: display_trace(&trace, m),
            trace,
            detail,
        })
    };
    let explicit = Engine::Explicit(sigma_map);
    for depth in 0..=cfg.length {
        report.depth = depth;
        let mut next: Vec<(ProductConfig, u32)> = Vec::new();
        for (c, at) in &frontier {
            report.configurations += 1;
            if let Some(msg) = observer(m, c) {
                report.outcome = EquivOutcome::Counterexample(found(&arena, *at, None, 0, msg));
                return report;
            }
            if depth == cfg.length {
                continue;
            }
            let imp_st = c.implicit();
            let exp_st = c.explicit();
            for e in candidate_events(&c.pos, &c.sigma, m, cfg) {
                if report.traces >= cfg.max_traces {
                    report.complete = false;
                    return report;
                }
                report.traces += 1;
                let imp = step(&imp_st, &e, m, Engine::Implicit);
                let exp = step(&exp_st, &e, m, explicit);
                if let Ok(s) = &imp {
                    *report.implicit_rules.entry(s.rule).or_default() += 1;
                }
                if let Ok(s) = &exp {
                    *report.explicit_rules.entry(s.rule).or_default() += 1;
                }
                match (imp, exp) {
                    (Err(why), Ok(_)) => {
                        let msg = format!("explicit-feasible trace is implicit-infeasible: {why}");
                        report.outcome = EquivOutcome::Counterexample(found(&arena, *at, Some(e), 1, msg));
                        return report;
                    }
                    (Ok(i), Err(why)) if c.normalized && i.rule != Rule::R1b => {
                        let msg = format!("normalized implicit-feasible trace is explicit-infeasible: {why}");
                        report.outcome = EquivOutcome::Counterexample(found(&arena, *at, Some(e), 2, msg));
                        return report;
                    }
                    (Ok(i), Ok(x)) => {
                        if i.state.sigma != x.state.sigma || i.state.blocked != x.state.blocked {
                            let msg = format!(
                                "final states differ: implicit {} vs explicit {}",
                                i.state.sigma, x.state.sigma
                            );
                            report.outcome = EquivOutcome::Counterexample(found(&arena, *at, Some(e), 1, msg));
                            return report;
                        }
                        let mut pos = c.pos.clone();
                        pos.advance(&e, m);
                        let mut sigma = i.state.sigma;
                        forget_idle_locals(&mut sigma, &pos);
                        let child = ProductConfig {
                            sigma,
                            blocked: i.state.blocked,
                            n_implicit: i.state.notified,
                            n_explicit: x.state.notified,
                            normalized: c.normalized && i.rule != Rule::R1b,
                            pos,
                        };
                        if !visited.contains(&child) {
                            visited.insert(child.clone());
                            arena.push(Crumb { parent: *at, init: 0, event: Some(e) });
                            next.push((child, (arena.len() - 1) as u32));
                        }
                    }
                    _ => {}
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub configurations: u64,
    pub traces: u64,
    pub complete: bool,
    pub violation: Option<String>,
}

impl PropertyReport {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct ImplicitConfig {
    st: StepState,
    pos: Positions,
}

/// Enumerates every implicit-feasible trace within the bounds (normalized
/// or not) and calls `check(before, event, step)` on every transition.
pub fn explore_implicit(
    m: &Monitor,
    cfg: &BoundsConfig,
    name: &str,
    check: &mut dyn FnMut(&StepState, &Event, &Step) -> Option<String>,
) -> PropertyReport {
    let mut report =
        PropertyReport { name: name.to_string(), configurations: 0, traces: 0, complete: true, violation: None };
    let mut visited: HashSet<ImplicitConfig> = HashSet::new();
    let mut frontier: Vec<(ImplicitConfig, Trace)> = Vec::new();
    for s0 in initial_states(m, &Expr::TRUE, cfg) {
        let c = ImplicitConfig { st: StepState::new(s0), pos: Positions::default() };
        if visited.insert(c.clone()) {
            frontier.push((c, Vec::new()));
        }
    }
    for _ in 0..cfg.length {
        let mut next = Vec::new();
        for (c, trace) in &frontier {
            report.configurations += 1;
            for e in candidate_events(&c.pos, &c.st.sigma, m, cfg) {
                if report.traces >= cfg.max_traces {
                    report.complete = false;
                    return report;
                }
                report.traces += 1;
                let Ok(s) = step(&c.st, &e, m, Engine::Implicit) else { continue };
                if let Some(msg) = check(&c.st, &e, &s) {
                    let mut t = trace.clone();
                    t.push(e);
                    report.violation = Some(format!("{msg} after {}", display_trace(&t, m)));
                    return report;
                }
                let mut pos = c.pos.clone();
                pos.advance(&e, m);
                let mut st = s.state;
                forget_idle_locals(&mut st.sigma, &pos);
                let child = ImplicitConfig { st, pos };
                if !visited.contains(&child) {
                    visited.insert(child.clone());
                    let mut t = trace.clone();
                    t.push(e);
                    next.push((child, t));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    report
}

/// `N ⊆ B` after every implicit step.
pub fn check_notified_subset_blocked(m: &Monitor, cfg: &BoundsConfig) -> PropertyReport {
    explore_implicit(m, cfg, "N ⊆ B", &mut |_, _, s| {
        (!s.state.notified.is_subset(&s.state.blocked)).then(|| "N is not a subset of B".to_string())
    })
}

/// `(t,w) ∈ B ∧ (σ,t) ⊨ Guard(w) ⇒ (t,w) ∈ N` after every implicit step.
pub fn check_blocked_implies_notified(m: &Monitor, cfg: &BoundsConfig) -> PropertyReport {
    explore_implicit(m, cfg, "blocked and enabled implies notified", &mut |_, _, s| {
        for &(t, w) in &s.state.blocked {
            let enabled = s.state.sigma.holds(t, &m.ccr(w).guard).unwrap_or(false);
            if enabled && !s.state.notified.contains(&(t, w)) {
                return Some(format!("({t}, {}) is blocked with a true guard but not notified", m.ccr(w).label));
            }
        }
        None
    })
}

/// Whenever `N' ⊆ N` and `min(N) ∈ N'`, `min(N) = min(N')`, for N, N'
/// the notification sets before and after a step.
pub fn check_min_stability(m: &Monitor, cfg: &BoundsConfig) -> PropertyReport {
    explore_implicit(m, cfg, "min stability", &mut |before, _, s| {
        let (n, n2) = (&before.notified, &s.state.notified);
        match n.first() {
            Some(least) if n2.is_subset(n) && n2.contains(least) && n2.first() != Some(least) => {
                Some("least notification changed".to_string())
            }
            _ => None,
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Shadow {
    blocked: BTreeSet<EventKey>,
    notified: BTreeSet<EventKey>,
    shared: Vec<Value>,
    pos: Positions,
}

impl PartialOrd for Positions {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Positions {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.pending, &self.must_continue).cmp(&(&other.pending, &other.must_continue))
    }
}

/// For every implicit-feasible trace τ within the bounds, there is a
/// normalized implicit-feasible trace τ' reaching the same shared state,
/// where τ' is τ with some blocked events removed.
///
/// The search carries, alongside each real configuration, the set of
/// configurations reachable by normalized runs on such subsequences.
pub fn check_normalization_exists(m: &Monitor, cfg: &BoundsConfig) -> PropertyReport {
    let mut report = PropertyReport {
        name: "normalized witness exists".to_string(),
        configurations: 0,
        traces: 0,
        complete: true,
        violation: None,
    };
    type Node = (ImplicitConfig, BTreeMap<Shadow, MonitorState>);
    let mut visited: HashSet<(ImplicitConfig, BTreeSet<Shadow>)> = HashSet::new();
    let mut frontier: Vec<(Node, Trace)> = Vec::new();
    for s0 in initial_states(m, &Expr::TRUE, cfg) {
        let c = ImplicitConfig { st: StepState::new(s0.clone()), pos: Positions::default() };
        let sh = Shadow {
            blocked: BTreeSet::new(),
            notified: BTreeSet::new(),
            shared: s0.shared_values().to_vec(),
            pos: Positions::default(),
        };
        frontier.push(((c, BTreeMap::from([(sh, s0)])), Vec::new()));
    }
    for _ in 0..cfg.length {
        let mut next = Vec::new();
        for ((c, shadows), trace) in &frontier {
            report.configurations += 1;
            for e in candidate_events(&c.pos, &c.st.sigma, m, cfg) {
                if report.traces >= cfg.max_traces {
                    report.complete = false;
                    return report;
                }
                let Ok(s) = step(&c.st, &e, m, Engine::Implicit) else { continue };
                report.traces += 1;
                let mut pos = c.pos.clone();
                pos.advance(&e, m);
                let mut new_shadows: BTreeMap<Shadow, MonitorState> = BTreeMap::new();
                for (sh, sigma) in shadows {
                    if !e.fired {
                        new_shadows.insert(sh.clone(), sigma.clone());
                    }
                    if sh.pos.admits(&e, m).is_err() {
                        continue;
                    }
                    let st = StepState { sigma: sigma.clone(), blocked: sh.blocked.clone(), notified: sh.notified.clone() };
                    let Ok(s2) = step(&st, &e, m, Engine::Implicit) else { continue };
                    if s2.rule == Rule::R1b {
                        continue;
                    }
                    let mut spos = sh.pos.clone();
                    spos.advance(&e, m);
                    let mut sig = s2.state.sigma;
                    forget_idle_locals(&mut sig, &spos);
                    let key = Shadow {
                        blocked: s2.state.blocked,
                        notified: s2.state.notified,
                        shared: sig.shared_values().to_vec(),
                        pos: spos,
                    };
                    new_shadows.insert(key, sig);
                }
                let mut t = trace.clone();
                t.push(e.clone());
                let witnessed = new_shadows.keys().any(|sh| sh.shared == s.state.sigma.shared_values());
                if !witnessed {
                    report.violation =
                        Some(format!("no normalized subsequence reaches the final state of {}", display_trace(&t, m)));
                    return report;
                }
                let mut st = s.state;
                forget_idle_locals(&mut st.sigma, &pos);
                let child = ImplicitConfig { st, pos };
                let key = (child.clone(), new_shadows.keys().cloned().collect::<BTreeSet<_>>());
                if !visited.contains(&key) {
                    visited.insert(key);
                    next.push(((child, new_shadows), t));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    report
}

/// Invalidation by enumeration: executing `w`'s body as thread 1 leaves `p`
/// false for thread 2, from every domain state where `runner_pre` holds for
/// thread 1 and `observer_pre` holds for thread 2.
pub fn invalidates(
    m: &Monitor,
    w: CcrId,
    p: &Formula,
    cfg: &BoundsConfig,
    runner_pre: &Formula,
    observer_pre: &Formula,
) -> bool {
    let runner_locals: Vec<Var> = m.method_of(w).all_locals().cloned().collect();
    let observer_locals: Vec<Var> = p.locals().into_iter().chain(observer_pre.locals()).collect::<BTreeSet<_>>().into_iter().collect();
    let mut locals = runner_locals.clone();
    locals.extend(observer_locals.iter().filter(|v| !runner_locals.contains(v)).cloned());
    let layout = Layout::new(m.shared_vars(), locals);
    let shared = m.shared_vars();
    let mut choices: Vec<Vec<Value>> = shared.iter().map(|v| cfg.values(v.sort)).collect();
    choices.extend(runner_locals.iter().map(|v| cfg.values(v.sort)));
    choices.extend(observer_locals.iter().map(|v| cfg.values(v.sort)));
    for vals in product(&choices) {
        let mut s = MonitorState::new(layout.clone());
        let mut it = vals.into_iter();
        for v in &shared {
            s.set(0, v, it.next().unwrap());
        }
        for v in &runner_locals {
            s.set(1, v, it.next().unwrap());
        }
        for v in &observer_locals {
            s.set(2, v, it.next().unwrap());
        }
        if !s.holds(1, runner_pre).unwrap_or(false) || !s.holds(2, observer_pre).unwrap_or(false) {
            continue;
        }
        let Ok(after) = exec_body(&m.ccr(w).body, 1, &s, super::exec::DEFAULT_FUEL) else { continue };
        if after.holds(2, p).unwrap_or(false) {
            return false;
        }
    }
    true
}

/// Agreement `(σ,B,N) ~ (σ,B',N')` between implicit and explicit runs, with invalidation decided by
/// [`invalidates`] under `I ∧ Guard(e') ∧ pred(e)`.
pub fn agreement_observer<'a>(
    invariant: &'a Formula,
    cfg: &'a BoundsConfig,
) -> impl FnMut(&Monitor, &ProductConfig) -> Option<String> + 'a {
    let mut cache: HashMap<(CcrId, CcrId), bool> = HashMap::new();
    move |m: &Monitor, c: &ProductConfig| {
        if !c.n_explicit.is_subset(&c.n_implicit) {
            return Some("explicit notifications are not a subset of implicit ones".to_string());
        }
        for &(t, w) in c.n_implicit.difference(&c.n_explicit) {
            let p = &m.ccr(w).guard;
            if !c.sigma.holds(t, p).unwrap_or(false) {
                continue;
            }
            let justified = c.n_explicit.iter().any(|&(t2, w2)| {
                (t2, w2) < (t, w)
                    && m.ccr(w2).guard == *p
                    && *cache.entry((w2, w)).or_insert_with(|| {
                        let pre = Expr::and([invariant.clone(), m.ccr(w2).guard.clone()]);
                        invalidates(m, w2, p, cfg, &pre, p)
                    })
            });
            if !justified {
                return Some(format!("notification ({t}, {}) has no agreeing explicit counterpart", m.ccr(w).label));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_monitor;

    #[test]
    fn initial_states_respect_the_invariant() {
        let m = parse_monitor(include_str!("../../corpus/rwlock.mon")).unwrap();
        let cfg = BoundsConfig::default();
        assert_eq!(initial_states(&m, &Expr::TRUE, &cfg).len(), 8);
        let inv = crate::frontend::parse_expr("readers >= 1", &m, None).unwrap();
        assert_eq!(initial_states(&m, &inv, &cfg).len(), 6);
    }

    #[test]
    fn invalidation_examples() {
        let m = parse_monitor(include_str!("../../corpus/rwlock.mon")).unwrap();
        let cfg = BoundsConfig::default();
        let not_writer = m.ccrs[0].guard.clone();
        let enter_writer = m.ccr_by_label("enterWriter").unwrap().id;
        let exit_writer = m.ccr_by_label("exitWriter").unwrap().id;
        assert!(invalidates(&m, enter_writer, &not_writer, &cfg, &Expr::TRUE, &Expr::TRUE));
        assert!(!invalidates(&m, exit_writer, &not_writer, &cfg, &Expr::TRUE, &Expr::TRUE));
        let skip = parse_monitor("monitor S { int a; m() { } }").unwrap();
        let p = crate::frontend::parse_expr("a > 0", &skip, None).unwrap();
        assert!(!invalidates(&skip, CcrId(0), &p, &cfg, &Expr::TRUE, &Expr::TRUE));
    }
}
