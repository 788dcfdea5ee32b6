use std::time::{Duration, Instant};

use sigweaver::codegen::{emit, extract_signal_map, EmitOptions};
use sigweaver::frontend::{parse_expr, parse_monitor};
use sigweaver::invariants::{infer_monitor_invariant, seed_triples, verify_invariant};
use sigweaver::logic::{self, Session};
use sigweaver::placement::{explain, place_signals, Cond, ExplicitMonitor, NotificationTriple, PlacementOptions, SignalMap};
use sigweaver::trace_engine::{agreement_observer, check_equivalence_bounded, check_equivalence_with, BoundsConfig};
use sigweaver::{Expr, Monitor};

fn corpus(name: &str) -> Monitor {
    let path = format!("{}/corpus/{name}.mon", env!("CARGO_MANIFEST_DIR"));
    parse_monitor(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn all_corpus() -> Vec<Monitor> {
    let mut names: Vec<String> = std::fs::read_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus"))
        .unwrap()
        .map(|e| e.unwrap().path().file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names.iter().map(|n| corpus(n)).collect()
}

fn solver() -> Session {
    Session::discover(None, logic::DEFAULT_TIMEOUT).expect("z3 must be installed for these tests")
}

fn compile(s: &mut Session, m: &Monitor, opts: PlacementOptions) -> ExplicitMonitor {
    let inv = infer_monitor_invariant(s, m, &seed_triples(m));
    place_signals(s, m, &inv.rendered, opts).unwrap()
}

fn row(m: &Monitor, sm: &SignalMap, label: &str) -> Vec<String> {
    sm.get(m.ccr_by_label(label).unwrap().id).iter().map(|n| n.to_string()).collect()
}

/// Lines of the rendered method `name`, trimmed.
fn method_lines<'a>(text: &'a str, name: &str) -> Vec<&'a str> {
    let head = format!("public void {name}(");
    text.lines()
        .map(str::trim)
        .skip_while(|l| !l.starts_with(&head))
        .take_while(|l| *l != "lock.unlock();")
        .collect()
}

#[test]
fn rwlock_matches_the_handwritten_lock() {
    let m = corpus("rwlock");
    let mut s = solver();
    let start = Instant::now();
    let inv = infer_monitor_invariant(&mut s, &m, &seed_triples(&m));
    let em = place_signals(&mut s, &m, &inv.rendered, PlacementOptions::default()).unwrap();
    assert!(start.elapsed() < Duration::from_secs(30));

    let nonneg = parse_expr("readers >= 0", &m, None).unwrap();
    assert!(s.check_valid(&Expr::implies(inv.rendered.clone(), nonneg)).is_valid(), "{}", inv.rendered);
    assert!(verify_invariant(&mut s, &m, &inv.rendered).is_valid());

    let pw = "readers == 0 && !writerIn";
    assert!(row(&m, &em.sigma_map, "enterReader").is_empty());
    assert_eq!(row(&m, &em.sigma_map, "exitReader"), [format!("({pw}, ?, signal)")]);
    assert!(row(&m, &em.sigma_map, "enterWriter").is_empty());
    assert_eq!(row(&m, &em.sigma_map, "exitWriter"), ["(!writerIn, ✓, broadcast)".to_string(), format!("({pw}, ?, signal)")]);

    let r = emit(&em, EmitOptions { lazy_broadcast: false });
    let exit_writer = method_lines(&r.text, "exitWriter");
    assert_eq!(
        exit_writer[exit_writer.len() - 2..],
        ["enterReaderCond.signalAll();", format!("if ({pw}) enterWriterCond.signal();").as_str()]
    );
    assert!(method_lines(&r.text, "exitReader").contains(&format!("if ({pw}) enterWriterCond.signal();").as_str()));
    assert!(method_lines(&r.text, "enterWriter").contains(&"while (readers != 0 || writerIn) enterWriterCond.await();"));
    for quiet in ["enterReader", "enterWriter"] {
        assert!(!method_lines(&r.text, quiet).iter().any(|l| l.contains("signal")));
    }
    assert_eq!(extract_signal_map(&r, &m).unwrap(), em.sigma_map);
    assert_eq!(r.condition_vars.len(), 2);
}

#[test]
fn rwlock_lazy_broadcast_relays_through_readers() {
    let m = corpus("rwlock");
    let mut s = solver();
    let em = compile(&mut s, &m, PlacementOptions::default());
    let r = emit(&em, EmitOptions { lazy_broadcast: true });
    assert!(method_lines(&r.text, "exitWriter").contains(&"enterReaderCond.signal();"));
    assert!(!r.text.contains("signalAll"));
    let enter_reader = method_lines(&r.text, "enterReader");
    assert_eq!(enter_reader.last(), Some(&"if (!writerIn) enterReaderCond.signal();"));
    let relay = ExplicitMonitor { sigma_map: extract_signal_map(&r, &m).unwrap(), ..em };
    let report = check_equivalence_bounded(&m, &relay, &BoundsConfig::default());
    assert!(report.passed(), "{:?}", report.counterexample());
}

#[test]
fn trivial_invariant_adds_a_signal_to_enter_reader() {
    let m = corpus("rwlock");
    let mut s = solver();
    let (em, report) = explain(&mut s, &m, &Expr::TRUE, PlacementOptions::default()).unwrap();
    let writer_guard = &m.ccr_by_label("enterWriter").unwrap().guard;
    let n = em.sigma_map.find(m.ccr_by_label("enterReader").unwrap().id, writer_guard).expect("signal without readers >= 0");
    assert_eq!(n.cond, Cond::Conditional);
    let skip = report
        .pairs
        .iter()
        .find(|p| p.ccr == "enterReader" && &p.predicate == writer_guard)
        .map(|p| p.checks[0].verdict.clone())
        .unwrap();
    assert!(skip.is_invalid(), "{skip}");
    // Still correct, only less efficient.
    assert!(check_equivalence_bounded(&m, &em, &BoundsConfig::default()).passed());
}

#[test]
fn every_corpus_monitor_compiles_to_an_equivalent_one() {
    let mut s = solver();
    let cfg = BoundsConfig::default();
    for m in all_corpus() {
        for opts in [PlacementOptions::default(), PlacementOptions { use_commutativity: false, ..Default::default() }] {
            let em = compile(&mut s, &m, opts);
            let report = check_equivalence_bounded(&m, &em, &cfg);
            assert!(report.passed(), "{} {:?}: {:?}", m.name, opts, report.counterexample());
            assert!(report.complete, "{}", m.name);
            for lazy in [false, true] {
                let r = emit(&em, EmitOptions { lazy_broadcast: lazy });
                let back = extract_signal_map(&r, &m).unwrap();
                assert_eq!(back, r.sigma_map, "{}", m.name);
                if lazy {
                    let relay = ExplicitMonitor { sigma_map: back, ..em.clone() };
                    let report = check_equivalence_bounded(&m, &relay, &cfg);
                    assert!(report.passed(), "{} lazy: {:?}", m.name, report.counterexample());
                } else {
                    assert_eq!(back, em.sigma_map);
                }
            }
        }
    }
}

#[test]
fn paired_runs_stay_in_agreement() {
    let mut s = solver();
    let cfg = BoundsConfig { length: 7, ..BoundsConfig::default() };
    for m in all_corpus() {
        // Commutativity-justified signals leave implicit notifications that
        // no single invalidation explains; agreement is a per-step relation
        // only for the plain placement.
        let em = compile(&mut s, &m, PlacementOptions { use_commutativity: false, ..Default::default() });
        let mut obs = agreement_observer(&em.invariant, &cfg);
        let report = check_equivalence_with(&m, &em.sigma_map, &em.invariant, &cfg, &mut obs);
        assert!(report.passed(), "{}: {:?}", m.name, report.counterexample());
    }
}

#[test]
fn commutativity_turns_the_throttle_broadcast_into_a_signal() {
    let m = corpus("throttle");
    let mut s = solver();
    let plain = compile(&mut s, &m, PlacementOptions { use_commutativity: false, ..Default::default() });
    let comm = compile(&mut s, &m, PlacementOptions::default());
    let guard = "threadCount < threadLimit";
    assert_eq!(row(&m, &plain.sigma_map, "afterAccess"), [format!("({guard}, ✓, broadcast)")]);
    assert_eq!(row(&m, &comm.sigma_map, "afterAccess"), [format!("({guard}, ✓, signal)")]);
    for em in [plain, comm] {
        assert!(check_equivalence_bounded(&m, &em, &BoundsConfig::default()).passed());
    }
}

#[test]
fn renaming_locals_is_what_forces_the_broadcast() {
    let m = corpus("local_guard");
    let mut s = solver();
    let renamed = compile(&mut s, &m, PlacementOptions::default());
    assert_eq!(row(&m, &renamed.sigma_map, "m2"), ["(x < y, ?, broadcast)"]);
    assert!(check_equivalence_bounded(&m, &renamed, &BoundsConfig::default()).passed());

    let naive = compile(&mut s, &m, PlacementOptions { rename_locals: false, ..Default::default() });
    assert_eq!(row(&m, &naive.sigma_map, "m2"), ["(x < y, ?, signal)"]);
    let report = check_equivalence_bounded(&m, &naive, &BoundsConfig::default());
    let cex = report.counterexample().expect("one signal cannot wake two eligible waiters");
    assert_eq!(cex.threads(), 3, "{}", cex.rendered);
}

#[test]
fn handoff_needs_no_signal_on_its_last_region() {
    let m = corpus("handoff");
    let mut s = solver();
    let em = compile(&mut s, &m, PlacementOptions::default());
    assert!(row(&m, &em.sigma_map, "m2#2").is_empty());
    assert_eq!(row(&m, &em.sigma_map, "m2#1"), ["(x > 0, ✓, broadcast)"]);
    assert!(check_equivalence_bounded(&m, &em, &BoundsConfig::default()).passed());
}

#[test]
fn without_a_solver_everything_is_broadcast_after_a_check() {
    let m = corpus("rwlock");
    let mut s = Session::offline("no solver in this test");
    let given = parse_expr("readers >= 0", &m, None).unwrap();
    let (em, report) = explain(&mut s, &m, &given, PlacementOptions::default()).unwrap();
    assert!(report.invariant_fallback.is_some());
    assert!(em.invariant.is_true());
    assert_eq!(em.sigma_map, SignalMap::broadcast_everything(&m));
    assert!(em.sigma_map.entries.iter().flatten().all(|n| *n
        == NotificationTriple { predicate: n.predicate.clone(), cond: Cond::Conditional, bcast: true }));
    assert!(check_equivalence_bounded(&m, &em, &BoundsConfig::default()).passed());
}
