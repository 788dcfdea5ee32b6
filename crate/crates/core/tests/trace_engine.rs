use std::time::Instant;

use sigweaver::frontend::{parse_expr, parse_monitor};
use sigweaver::placement::{instrument, Cond, NotificationTriple, SignalMap};
use sigweaver::trace_engine::*;
use sigweaver::{Monitor, Value};

fn corpus(name: &str) -> Monitor {
    let path = format!("{}/corpus/{name}.mon", env!("CARGO_MANIFEST_DIR"));
    parse_monitor(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn ev(t: usize, m: &Monitor, label: &str, fired: bool) -> Event {
    Event::new(t, m.ccr_by_label(label).unwrap().id, fired)
}

fn note(m: &Monitor, guard_of: &str, cond: Cond, bcast: bool) -> NotificationTriple {
    NotificationTriple { predicate: m.ccr_by_label(guard_of).unwrap().guard.clone(), cond, bcast }
}

/// The signaling of the hand-written explicit readers-writers lock.
fn rwlock_handwritten(m: &Monitor) -> SignalMap {
    let mut sm = SignalMap::empty(m);
    let exit_reader = m.ccr_by_label("exitReader").unwrap().id;
    let exit_writer = m.ccr_by_label("exitWriter").unwrap().id;
    sm.entries[exit_reader.0].push(note(m, "enterWriter", Cond::Conditional, false));
    sm.entries[exit_writer.0].push(note(m, "enterReader", Cond::Unconditional, true));
    sm.entries[exit_writer.0].push(note(m, "enterWriter", Cond::Conditional, false));
    sm
}

#[test]
fn handoff_well_formedness() {
    let m = corpus("handoff");
    let e = |t, l, b| ev(t, &m, l, b);
    let a = vec![e(1, "m1#2", true), e(1, "m1#1", true)];
    let b = vec![e(1, "m1#1", false), e(1, "m2#1", true)];
    let c = vec![e(1, "m1#1", false), e(2, "m2#1", true), e(1, "m1#1", true), e(1, "m1#2", true)];
    let ok = vec![
        e(1, "m1#1", false),
        e(2, "m2#1", true),
        e(2, "m2#2", false),
        e(1, "m1#1", true),
        e(1, "m1#2", true),
        e(2, "m2#2", true),
    ];
    assert_eq!(check_well_formed(&a, &m).unwrap_err().reason, IllFormedReason::A);
    assert_eq!(check_well_formed(&b, &m).unwrap_err().reason, IllFormedReason::B);
    assert_eq!(check_well_formed(&c, &m).unwrap_err().reason, IllFormedReason::C);
    assert!(is_well_formed(&ok, &m));

    // With z = 1 and x = y = w = 0 every step applies a rule.
    let s0 = MonitorState::initial(&m);
    let (outcome, log) = run_logged(&s0, &ok, &m, Engine::Implicit).unwrap();
    let rules: Vec<String> = log.iter().map(|r| r.rule.to_string()).collect();
    assert_eq!(rules, ["1a", "2a", "1a", "2b", "2a", "2b"]);
    let RunOutcome::Feasible(end) = outcome else { panic!("infeasible") };
    assert!(end.blocked.is_empty() && end.notified.is_empty());
    assert_eq!(is_normalized(&s0, &ok, &m), Ok(true));
}

#[test]
fn handwritten_rwlock_signaling_is_equivalent() {
    let m = corpus("rwlock");
    let mut em = instrument(&m, rwlock_handwritten(&m));
    em.invariant = parse_expr("readers >= 0", &m, None).unwrap();
    let start = Instant::now();
    let report = check_equivalence_bounded(&m, &em, &BoundsConfig::default());
    assert!(report.passed(), "{:?}", report.counterexample());
    assert!(report.complete);
    assert!(report.traces <= 1_000_000);
    eprintln!("rwlock: {} configs, {} traces, {:?}", report.configurations, report.traces, start.elapsed());
}

#[test]
fn broadcast_everything_is_equivalent() {
    let m = corpus("rwlock");
    let em = instrument(&m, SignalMap::broadcast_everything(&m));
    let report = check_equivalence_bounded(&m, &em, &BoundsConfig::default());
    assert!(report.passed(), "{:?}", report.counterexample());

    // Unchecked broadcasts wake a reader while a writer is still inside;
    // its re-block has no implicit counterpart.
    let em = instrument(&m, SignalMap::broadcast_all(&m, Cond::Unconditional));
    let report = check_equivalence_bounded(&m, &em, &BoundsConfig::default());
    let cex = report.counterexample().expect("spurious wake-up");
    assert_eq!(cex.condition, 1);
    assert_eq!(cex.trace.len(), 3);
}

#[test]
fn dropping_a_needed_signal_is_caught() {
    let m = corpus("rwlock");
    let mut sm = rwlock_handwritten(&m);
    sm.entries[m.ccr_by_label("exitReader").unwrap().id.0].clear();
    let em = instrument(&m, sm);
    let report = check_equivalence_bounded(&m, &em, &BoundsConfig::default());
    let cex = report.counterexample().expect("missing signal must be detected");
    assert_eq!(cex.condition, 2);
}

#[test]
fn signalling_one_reader_is_caught() {
    let m = corpus("rwlock");
    let mut sm = rwlock_handwritten(&m);
    sm.entries[m.ccr_by_label("exitWriter").unwrap().id.0][0].bcast = false;
    let report = check_equivalence_bounded(&m, &instrument(&m, sm), &BoundsConfig::default());
    let cex = report.counterexample().expect("a second reader stays asleep");
    assert_eq!(cex.condition, 2);
}

#[test]
fn local_guard_signal_instead_of_broadcast_fails_with_three_threads() {
    let m = corpus("local_guard");
    let mut sm = SignalMap::empty(&m);
    sm.entries[m.ccr_by_label("m2").unwrap().id.0].push(note(&m, "m1", Cond::Conditional, false));
    let report = check_equivalence_bounded(&m, &instrument(&m, sm), &BoundsConfig::default());
    let cex = report.counterexample().expect("signal must be insufficient");
    assert_eq!(cex.threads(), 3, "{}", cex.rendered);

    let mut sm = SignalMap::empty(&m);
    sm.entries[m.ccr_by_label("m2").unwrap().id.0].push(note(&m, "m1", Cond::Conditional, true));
    let report = check_equivalence_bounded(&m, &instrument(&m, sm), &BoundsConfig::default());
    assert!(report.passed(), "{:?}", report.counterexample());
}

#[test]
fn implicit_invariants_hold_on_rwlock() {
    let m = corpus("rwlock");
    let cfg = BoundsConfig::default();
    for r in [check_notified_subset_blocked(&m, &cfg), check_blocked_implies_notified(&m, &cfg), check_min_stability(&m, &cfg)] {
        assert!(r.holds(), "{}: {:?}", r.name, r.violation);
        assert!(r.complete);
    }
}

#[test]
fn normalized_witness_exists_on_rwlock() {
    let m = corpus("rwlock");
    let cfg = BoundsConfig { length: 6, ..BoundsConfig::default() };
    let r = check_normalization_exists(&m, &cfg);
    assert!(r.holds(), "{:?}", r.violation);
}

#[test]
fn two_writers_one_signal_goes_to_the_lower_thread() {
    let m = corpus("rwlock");
    let sm = rwlock_handwritten(&m);
    let s0 = MonitorState::initial(&m).with(0, &m.fields[0].var, Value::Int(1));
    let tau = vec![ev(2, &m, "enterWriter", false), ev(3, &m, "enterWriter", false), ev(1, &m, "exitReader", true)];
    let RunOutcome::Feasible(end) = run(&s0, &tau, &m, Engine::Explicit(&sm)).unwrap() else { panic!() };
    let writer = m.ccr_by_label("enterWriter").unwrap().id;
    assert_eq!(end.notified.into_iter().collect::<Vec<_>>(), vec![(2, writer)]);
}
