//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use sigweaver::frontend::ast::CmpOp;
use sigweaver::frontend::{parse_expr, parse_monitor};
use sigweaver::invariants::{infer_monitor_invariant, seed_triples, verify_invariant};
use sigweaver::logic::{self, check_triple, wp, Session};
use sigweaver::placement::{place_signals, ExplicitMonitor, PlacementOptions, SignalMap};
use sigweaver::trace_engine::{
    check_blocked_implies_notified, check_equivalence_bounded, check_normalization_exists, check_notified_subset_blocked,
    check_well_formed, exec_body, is_well_formed, BoundsConfig, Event, IllFormedReason, Layout, MonitorState,
    DEFAULT_FUEL,
};
use sigweaver::{Expr, HoareTriple, Monitor, Sort, Stmt, Value, Var};

const GOLDEN_LIMIT: Duration = Duration::from_secs(30);
const DIFFTEST_LIMIT: Duration = Duration::from_secs(300);
const TRACE_CAP: u64 = 1_000_000;
const WP_CASES: u32 = 10_000;

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus")
}

fn load(name: &str) -> Monitor {
    parse_monitor(&std::fs::read_to_string(corpus_dir().join(format!("{name}.mon"))).unwrap()).unwrap()
}

fn corpus() -> Vec<Monitor> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir()).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    paths.iter().map(|p| parse_monitor(&std::fs::read_to_string(p).unwrap()).unwrap()).collect()
}

fn solver() -> Session {
    Session::discover(None, logic::DEFAULT_TIMEOUT).expect("z3 is required for the acceptance run")
}

fn expr(m: &Monitor, s: &str) -> Expr {
    parse_expr(s, m, None).unwrap()
}

fn row(m: &Monitor, sm: &SignalMap, label: &str) -> Vec<String> {
    sm.get(m.ccr_by_label(label).unwrap().id).iter().map(|n| n.to_string()).collect()
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg.into()) }
}

fn compile(s: &mut Session, m: &Monitor, opts: PlacementOptions) -> ExplicitMonitor {
    let inv = infer_monitor_invariant(s, m, &seed_triples(m));
    place_signals(s, m, &inv.rendered, opts).unwrap()
}

fn rwlock_golden() -> Outcome {
    let m = load("rwlock");
    let start = Instant::now();
    let mut s = solver();
    let em = compile(&mut s, &m, PlacementOptions::default());
    let took = start.elapsed();
    let pw = "readers == 0 && !writerIn";
    let want: [(&str, Vec<String>); 4] = [
        ("enterReader", vec![]),
        ("enterWriter", vec![]),
        ("exitReader", vec![format!("({pw}, ?, signal)")]),
        ("exitWriter", vec!["(!writerIn, ✓, broadcast)".into(), format!("({pw}, ?, signal)")]),
    ];
    for (label, expected) in want {
        let mut got = row(&m, &em.sigma_map, label);
        let mut expected = expected;
        got.sort();
        expected.sort();
        ensure(got == expected, format!("Σ({label}) = {got:?}, expected {expected:?}"))?;
    }
    ensure(took < GOLDEN_LIMIT, format!("took {took:.1?}"))?;
    Ok(format!("Σ matches the hand-written lock in {took:.2?} (limit {GOLDEN_LIMIT:?})"))
}

fn walkthrough_triples() -> Outcome {
    let m = load("rwlock");
    let mut s = solver();
    let pw = "(readers == 0 && !writerIn)";
    let body = |l: &str| m.ccr_by_label(l).unwrap().body.clone();
    let t = |pre: String, l: &str, post: String| HoareTriple::new(expr(&m, &pre), body(l), expr(&m, &post));
    let six = [
        (t(format!("readers >= 0 && !writerIn && !{pw}"), "enterReader", format!("!{pw}")), true),
        (t(format!("readers >= 0 && !{pw}"), "exitReader", format!("!{pw}")), false),
        (t(format!("readers >= 0 && {pw}"), "enterWriter", format!("!{pw}")), true),
        (t(format!("readers >= 0 && !{pw}"), "exitReader", pw.to_string()), false),
        (t(format!("readers >= 0 && {pw} && writerIn"), "enterWriter", "writerIn".into()), true),
        (t("readers >= 0 && writerIn".into(), "exitWriter", "!writerIn".into()), true),
    ];
    let mut valid = 0;
    for (triple, expect) in &six {
        let v = check_triple(&mut s, triple);
        ensure(v.is_valid() == *expect && !v.is_unknown(), format!("{triple}: {v}"))?;
        valid += usize::from(v.is_valid());
    }
    let dropped = t(format!("!writerIn && !{pw}"), "enterReader", format!("!{pw}"));
    let v = check_triple(&mut s, &dropped);
    ensure(v.is_invalid(), format!("without readers >= 0: {v}"))?;
    Ok(format!("{valid} valid, {} invalid; without readers >= 0 the enterReader triple is invalid", six.len() - valid))
}

fn rwlock_invariant() -> Outcome {
    let m = load("rwlock");
    let mut s = solver();
    let inv = infer_monitor_invariant(&mut s, &m, &seed_triples(&m)).rendered;
    let implies = s.check_valid(&Expr::implies(inv.clone(), expr(&m, "readers >= 0")));
    ensure(implies.is_valid(), format!("I = {inv} does not imply readers >= 0: {implies}"))?;
    let v = verify_invariant(&mut s, &m, &inv);
    ensure(v.is_valid(), format!("I = {inv} does not verify: {v}"))?;
    Ok(format!("I = {inv}"))
}

fn corpus_equivalence() -> Outcome {
    let cfg = BoundsConfig::default();
    let mut s = solver();
    let mut slowest = Duration::ZERO;
    let mut most = 0;
    let all = corpus();
    for m in &all {
        let em = compile(&mut s, m, PlacementOptions::default());
        let start = Instant::now();
        let r = check_equivalence_bounded(m, &em, &cfg);
        let took = start.elapsed();
        ensure(r.passed(), format!("{}: {:?}", m.name, r.counterexample().map(|c| &c.rendered)))?;
        ensure(r.complete && r.traces <= TRACE_CAP, format!("{}: cap reached at {} traces", m.name, r.traces))?;
        ensure(took < DIFFTEST_LIMIT, format!("{}: {took:.1?}", m.name))?;
        slowest = slowest.max(took);
        most = most.max(r.traces);
    }
    Ok(format!(
        "{} monitors pass ({} threads, length {}, values {}..{}); at most {most} traces, slowest {slowest:.2?}",
        all.len(),
        cfg.threads,
        cfg.length,
        cfg.min_value,
        cfg.max_value
    ))
}

fn local_guard() -> Outcome {
    let m = load("local_guard");
    let mut s = solver();
    let cfg = BoundsConfig::default();
    let m2 = m.ccr_by_label("m2").unwrap().id;
    let naive = compile(&mut s, &m, PlacementOptions { rename_locals: false, ..Default::default() });
    let naive_row = naive.sigma_map.get(m2);
    ensure(!naive_row.is_empty() && naive_row.iter().all(|n| !n.bcast), "without renaming m2 should signal")?;
    let r = check_equivalence_bounded(&m, &naive, &cfg);
    let cex = r.counterexample().ok_or("no counterexample without renaming")?;
    ensure(cex.threads() == 3, format!("counterexample uses {} threads: {}", cex.threads(), cex.rendered))?;
    let renamed = compile(&mut s, &m, PlacementOptions::default());
    ensure(renamed.sigma_map.get(m2).iter().any(|n| n.bcast), "with renaming m2 should broadcast")?;
    ensure(check_equivalence_bounded(&m, &renamed, &cfg).passed(), "renamed placement fails")?;
    Ok(format!("signal refuted by {}; broadcast passes", cex.rendered))
}

fn handoff_well_formedness() -> Outcome {
    let m = load("handoff");
    let e = |t, l: &str, b| Event::new(t, m.ccr_by_label(l).unwrap().id, b);
    let cases = [
        (vec![e(1, "m1#2", true), e(1, "m1#1", true)], IllFormedReason::A),
        (vec![e(1, "m1#1", false), e(1, "m2#1", true)], IllFormedReason::B),
        (vec![e(1, "m1#1", false), e(2, "m2#1", true), e(1, "m1#1", true), e(1, "m1#2", true)], IllFormedReason::C),
    ];
    for (tau, reason) in &cases {
        let got = check_well_formed(tau, &m).map_err(|e| e.reason);
        ensure(got == Err(*reason), format!("expected {reason}, got {got:?}"))?;
    }
    let ok = [
        e(1, "m1#1", false),
        e(2, "m2#1", true),
        e(2, "m2#2", false),
        e(1, "m1#1", true),
        e(1, "m1#2", true),
        e(2, "m2#2", true),
    ];
    ensure(is_well_formed(&ok, &m), "final trace rejected")?;
    Ok("rejected for (a), (b), (c); final trace well-formed".into())
}

fn offline_fallback() -> Outcome {
    let cfg = BoundsConfig::default();
    for m in corpus() {
        let mut s = Session::offline("acceptance: solver unreachable");
        let em = place_signals(&mut s, &m, &Expr::TRUE, PlacementOptions::default()).unwrap();
        ensure(em.sigma_map == SignalMap::broadcast_everything(&m), format!("{}: not broadcast-everything", m.name))?;
        let r = check_equivalence_bounded(&m, &em, &cfg);
        ensure(r.passed() && r.complete, format!("{}: {:?}", m.name, r.counterexample().map(|c| &c.rendered)))?;
    }
    let bin = env!("CARGO_BIN_EXE_sigweaver");
    let input = corpus_dir().join("rwlock.mon");
    let run = |extra: &[&str]| {
        Command::new(bin).args(["--solver", "/nonexistent/solver"]).args(extra).arg("difftest").arg(&input).output().unwrap()
    };
    let refused = run(&[]).status.code();
    ensure(refused == Some(3), format!("without --allow-unknown: exit {refused:?}"))?;
    let allowed = run(&["--allow-unknown"]).status.code();
    ensure(allowed == Some(0), format!("with --allow-unknown: exit {allowed:?}"))?;
    Ok("broadcast-everything on every monitor, all pass; CLI exits 3, or 0 with --allow-unknown".into())
}

fn throttle_commutativity() -> Outcome {
    let m = load("throttle");
    let mut s = solver();
    let plain = compile(&mut s, &m, PlacementOptions { use_commutativity: false, ..Default::default() });
    let comm = compile(&mut s, &m, PlacementOptions::default());
    let flipped: Vec<String> = m
        .ccrs
        .iter()
        .flat_map(|c| {
            let comm = &comm;
            plain.sigma_map.get(c.id).iter().filter_map(move |n| {
                let after = comm.sigma_map.find(c.id, &n.predicate)?;
                (n.bcast && !after.bcast).then(|| format!("{}: {}", c.label, n.predicate))
            })
        })
        .collect();
    ensure(!flipped.is_empty(), "no broadcast became a signal")?;
    let r = check_equivalence_bounded(&m, &comm, &BoundsConfig::default());
    ensure(r.passed(), format!("{:?}", r.counterexample().map(|c| &c.rendered)))?;
    Ok(format!("broadcast -> signal at {}; still equivalent", flipped.join(", ")))
}

fn wp_differential() -> Result<u32, String> {
    let x = Var::shared("x", Sort::Int);
    let y = Var::shared("y", Sort::Int);
    let atom = prop_oneof![Just(x.expr()), Just(y.expr()), (-2i64..3).prop_map(Expr::Int)];
    let int = atom.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::sub(a, b)),
        ]
    });
    let ops = vec![CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
    let cmp = (int.clone(), prop::sample::select(ops), int.clone()).prop_map(|(a, op, b)| Expr::cmp(op, a, b));
    let pred = cmp.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::not),
            (inner.clone(), inner.clone()).prop_map(|(p, q)| Expr::and([p, q])),
            (inner.clone(), inner).prop_map(|(p, q)| Expr::or([p, q])),
        ]
    });
    let (xv, yv) = (x.clone(), y.clone());
    let assign = (prop::bool::ANY, int).prop_map(move |(left, e)| Stmt::assign(if left { xv.clone() } else { yv.clone() }, e));
    let p2 = pred.clone();
    let stmt = assign.prop_recursive(3, 10, 3, move |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..4).prop_map(Stmt::seq),
            (p2.clone(), inner.clone(), inner).prop_map(|(c, t, e)| Stmt::If {
                cond: c,
                then_s: Box::new(t),
                else_s: Box::new(e),
            }),
        ]
    });
    let layout = Layout::new(vec![x.clone(), y.clone()], vec![]);
    let mut runner = TestRunner::new(Config { cases: WP_CASES, failure_persistence: None, ..Config::default() });
    runner
        .run(&(stmt, pred, -3i64..4, -3i64..4), |(s, q, a, b)| {
            let sigma = MonitorState::new(layout.clone()).with(0, &x, Value::Int(a)).with(0, &y, Value::Int(b));
            let before = sigma.holds(0, &wp(&s, &q).pre).unwrap();
            let after = exec_body(&s, 0, &sigma, DEFAULT_FUEL).unwrap().holds(0, &q).unwrap();
            prop_assert_eq!(before, after, "{} / {}", s, q);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(WP_CASES)
}

fn property_suites() -> Outcome {
    let cases = wp_differential()?;
    let cfg = BoundsConfig::default();
    let norm_cfg = BoundsConfig::default();
    let all = corpus();
    for m in &all {
        for r in [
            check_notified_subset_blocked(m, &cfg),
            check_blocked_implies_notified(m, &cfg),
            check_normalization_exists(m, &norm_cfg),
        ] {
            ensure(r.holds() && r.complete, format!("{} {}: {:?}", m.name, r.name, r.violation))?;
        }
    }
    Ok(format!(
        "wp agrees with execution on {cases} cases; N ⊆ B, blocked-implies-notified (length {}) and normalization (length {}) hold on {} monitors",
        cfg.length,
        norm_cfg.length,
        all.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("RWLock golden signal map", rwlock_golden),
        ("walkthrough Hoare triples", walkthrough_triples),
        ("RWLock invariant", rwlock_invariant),
        ("bounded equivalence on the corpus", corpus_equivalence),
        ("local guards need renaming", local_guard),
        ("well-formedness classification", handoff_well_formedness),
        ("solver-less fallback", offline_fallback),
        ("commutativity refinement", throttle_commutativity),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
