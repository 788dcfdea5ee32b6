use sigweaver::frontend::{parse_expr, parse_monitor};
use sigweaver::logic::{self, abduce, bodies_commute, check_triple, commutes, rename_locals, HoareTriple, Session, Verdict};
use sigweaver::{Expr, Monitor, Stmt, Value};

fn corpus(name: &str) -> Monitor {
    let path = format!("{}/corpus/{name}.mon", env!("CARGO_MANIFEST_DIR"));
    parse_monitor(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn solver() -> Session {
    Session::discover(None, logic::DEFAULT_TIMEOUT).expect("z3 must be installed for these tests")
}

fn e(m: &Monitor, s: &str) -> Expr {
    parse_expr(s, m, None).unwrap()
}

fn body(m: &Monitor, label: &str) -> Stmt {
    m.ccr_by_label(label).unwrap().body.clone()
}

const PW: &str = "(readers == 0 && !writerIn)";

/// The six triples of the readers-writers walkthrough with their verdicts.
fn walkthrough(m: &Monitor) -> Vec<(HoareTriple, bool)> {
    let t = |pre: String, label: &str, post: String| {
        HoareTriple::new(e(m, &pre), body(m, label), e(m, &post))
    };
    vec![
        (t(format!("readers >= 0 && !writerIn && !{PW}"), "enterReader", format!("!{PW}")), true),
        (t(format!("readers >= 0 && !{PW}"), "exitReader", format!("!{PW}")), false),
        (t(format!("readers >= 0 && {PW}"), "enterWriter", format!("!{PW}")), true),
        (t(format!("readers >= 0 && !{PW}"), "exitReader", PW.to_string()), false),
        (t(format!("readers >= 0 && {PW} && writerIn"), "enterWriter", "writerIn".into()), true),
        (t("readers >= 0 && writerIn".into(), "exitWriter", "!writerIn".into()), true),
    ]
}

#[test]
fn rwlock_walkthrough_triples() {
    let m = corpus("rwlock");
    let mut s = solver();
    for (t, valid) in walkthrough(&m) {
        let v = check_triple(&mut s, &t);
        assert_eq!(v.is_valid(), valid, "{t}: {v}");
        if let Verdict::Invalid(model) = v {
            assert_eq!(model.satisfies(&Expr::implies(t.pre.clone(), logic::wp(&t.body, &t.post).pre)), Some(false));
        }
    }
}

#[test]
fn dropping_the_invariant_gives_negative_readers() {
    let m = corpus("rwlock");
    let mut s = solver();
    let t = HoareTriple::new(e(&m, &format!("!writerIn && !{PW}")), body(&m, "enterReader"), e(&m, &format!("!{PW}")));
    let Verdict::Invalid(model) = check_triple(&mut s, &t) else { panic!("must be invalid") };
    // The only countermodel: readers + 1 == 0 with the writer out.
    assert_eq!(model.get("readers"), Some(Value::Int(-1)));
    assert_eq!(model.get("writerIn"), Some(Value::Bool(false)));
    assert_eq!(logic::check_valid(&mut s, &Expr::TRUE), Verdict::Valid);
}

#[test]
fn local_guard_needs_renaming() {
    let m = corpus("local_guard");
    let mut s = solver();
    let p = parse_expr("x < y", &m, Some("m1")).unwrap();
    let q = parse_expr("x >= y", &m, Some("m1")).unwrap();
    let w = body(&m, "m1");
    // Unrenamed: the waiter's x is the runner's x.
    let naive = HoareTriple::new(p.clone(), w.clone(), q.clone());
    assert!(check_triple(&mut s, &naive).is_valid());
    let avoid = logic::rename::names_of([&p, &q], [&w]);
    let (p2, q2, _) = rename_locals(&p, &q, &avoid);
    let renamed = HoareTriple::new(Expr::and([p.clone(), p2]), w, q2);
    let Verdict::Invalid(model) = check_triple(&mut s, &renamed) else { panic!("renamed triple must fail") };
    let x2 = model.get("m1.x'").and_then(|v| v.as_int()).unwrap();
    let y = model.get("y").and_then(|v| v.as_int()).unwrap();
    assert!(x2 < y);
}

#[test]
fn abduce_recovers_nonnegative_readers() {
    let m = corpus("rwlock");
    let mut s = solver();
    let p = e(&m, &format!("!writerIn && !{PW}"));
    let goal = logic::wp(&body(&m, "enterReader"), &e(&m, &format!("!{PW}"))).pre;
    let found = abduce(&mut s, &p, &goal);
    assert!(!found.is_empty() && found.len() <= logic::ABDUCE_LIMIT);
    assert!(found.contains(&e(&m, "readers >= 0")), "{found:?}");
    for psi in &found {
        assert!(psi.is_shared_only());
        let both = Expr::and([p.clone(), psi.clone()]);
        assert!(s.check_valid(&Expr::implies(both.clone(), goal.clone())).is_valid());
        assert!(s.check_valid(&Expr::not(both)).is_invalid());
    }
    assert_eq!(abduce(&mut s, &e(&m, "readers == 0"), &e(&m, "readers <= 0")), vec![Expr::TRUE]);
    assert!(abduce(&mut s, &e(&m, "readers == 0"), &Expr::FALSE).is_empty());
}

#[test]
fn commutativity() {
    let m = corpus("rwlock");
    let mut s = solver();
    assert!(bodies_commute(&mut s, &body(&m, "exitWriter"), &body(&m, "enterReader")).is_valid());
    assert!(!bodies_commute(&mut s, &body(&m, "enterWriter"), &body(&m, "exitWriter")).is_valid());

    let c = parse_monitor("monitor C { int x = 1; a() { x = x + 1; } b() { x = 2 * x; } }").unwrap();
    assert!(!bodies_commute(&mut s, &c.ccrs[0].body, &c.ccrs[1].body).is_valid());
    assert!(!commutes(&mut s, c.ccrs[0].id, &c));

    let t = corpus("throttle");
    assert!(t.ccrs.iter().all(|w| commutes(&mut s, w.id, &t)));
    let one = parse_monitor("monitor O { int x = 0; a() { x = x + 1; } }").unwrap();
    assert!(commutes(&mut s, one.ccrs[0].id, &one));
}
