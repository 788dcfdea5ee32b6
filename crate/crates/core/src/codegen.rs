//! Rendering of explicit-signal monitors as lock/condition-variable code.
//!
//! Each CCR becomes `while (!p) c.await(); s;` followed by its
//! notifications, inside one `lock()`/`unlock()` region per method. The
//! text is for reading; the trace engine is the executable semantics.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::frontend::ast::{Ccr, Expr, Monitor, Pred, Sort, Stmt, Var};
use crate::frontend::guards;
use crate::placement::{Cond, ExplicitMonitor, NotificationTriple, SignalMap};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmitOptions {
    pub lazy_broadcast: bool,
}

/// Bookkeeping for a guard that reads thread-locals: conditional signals
/// can only evaluate it against the snapshots of the blocked threads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryPlan {
    pub guard: Pred,
    pub name: String,
    pub condition_var: String,
    /// Locals captured when a thread blocks; they cannot change while it waits.
    pub snapshot: Vec<Var>,
    /// Rendered `∃` check over registered snapshots.
    pub check: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedMonitor {
    pub text: String,
    /// Guard text to condition-variable name.
    pub condition_vars: BTreeMap<String, String>,
    /// Guard text to registry, for guards over locals.
    pub waiter_registries: BTreeMap<String, RegistryPlan>,
    /// The notifications the text performs (the relay map when lazy).
    pub sigma_map: SignalMap,
}

fn java_sort(s: Sort) -> &'static str {
    match s {
        Sort::Int => "int",
        Sort::Bool => "boolean",
    }
}

/// One name per distinct guard, taken from the first method that waits on it.
fn condition_names(m: &Monitor) -> Vec<(Pred, String)> {
    let mut out: Vec<(Pred, String)> = Vec::new();
    for p in guards(m) {
        let first = m.ccrs.iter().find(|c| c.guard == p).expect("guards come from CCRs");
        let base = format!("{}Cond", m.methods[first.method].name);
        let mut name = base.clone();
        let mut k = 2;
        while out.iter().any(|(_, n)| *n == name) {
            name = format!("{base}{k}");
            k += 1;
        }
        out.push((p, name));
    }
    out
}

pub fn waiter_registry_plan(em: &ExplicitMonitor) -> Vec<RegistryPlan> {
    let m = &em.base;
    condition_names(m)
        .into_iter()
        .filter(|(p, _)| !p.locals().is_empty())
        .map(|(p, cv)| {
            let snapshot: Vec<Var> = p.locals().into_iter().collect();
            let name = cv.trim_end_matches("Cond").to_string() + "Waiters";
            let field = p.subst_with(&|v| v.is_local().then(|| Var::aux(&format!("s.{}", v.name), v.sort).expr()));
            let check = format!("{name}.any(s -> {field})");
            RegistryPlan { guard: p, name, condition_var: cv, snapshot, check }
        })
        .collect()
}

struct Ctx<'a> {
    m: &'a Monitor,
    cvs: Vec<(Pred, String)>,
    regs: Vec<RegistryPlan>,
}

impl Ctx<'_> {
    fn cv(&self, p: &Pred) -> &str {
        &self.cvs.iter().find(|(q, _)| q == p).expect("notified predicate is a guard").1
    }

    fn reg(&self, p: &Pred) -> Option<&RegistryPlan> {
        self.regs.iter().find(|r| &r.guard == p)
    }

    fn notification(&self, n: &NotificationTriple, pad: &str, out: &mut String) {
        let call = if n.bcast { "signalAll" } else { "signal" };
        let cv = self.cv(&n.predicate);
        match n.cond {
            Cond::Unconditional => writeln!(out, "{pad}{cv}.{call}();").unwrap(),
            Cond::Conditional => {
                let test = match self.reg(&n.predicate) {
                    Some(r) => r.check.clone(),
                    None => n.predicate.to_string(),
                };
                writeln!(out, "{pad}if ({test}) {cv}.{call}();").unwrap()
            }
        }
    }

    fn ccr(&self, c: &Ccr, sigma: &SignalMap, out: &mut String) {
        let pad = "        ";
        writeln!(out, "{pad}// {}", c.label).unwrap();
        if !c.guard.is_true() {
            let cv = self.cv(&c.guard);
            let negated = Expr::not(c.guard.clone()).nnf();
            match self.reg(&c.guard) {
                None => writeln!(out, "{pad}while ({negated}) {cv}.await();").unwrap(),
                Some(r) => {
                    let snap: Vec<&str> = r.snapshot.iter().map(|v| v.name.as_str()).collect();
                    writeln!(out, "{pad}while ({negated}) {{").unwrap();
                    writeln!(out, "{pad}    {}.register({});", r.name, snap.join(", ")).unwrap();
                    writeln!(out, "{pad}    {cv}.await();").unwrap();
                    writeln!(out, "{pad}    {}.deregister();", r.name).unwrap();
                    writeln!(out, "{pad}}}").unwrap();
                }
            }
        }
        java_stmt(&c.body, 2, out);
        for n in sigma.get(c.id) {
            self.notification(n, pad, out);
        }
    }
}

fn java_stmt(s: &Stmt, depth: usize, out: &mut String) {
    let pad = "    ".repeat(depth);
    match s {
        Stmt::Skip => {}
        Stmt::Assign { target, value, decl: true } => {
            writeln!(out, "{pad}{} {} = {value};", java_sort(target.sort), target.name).unwrap()
        }
        Stmt::Assign { target, value, .. } => writeln!(out, "{pad}{} = {value};", target.name).unwrap(),
        Stmt::Seq(v) => v.iter().for_each(|x| java_stmt(x, depth, out)),
        Stmt::If { cond, then_s, else_s } => {
            writeln!(out, "{pad}if ({cond}) {{").unwrap();
            java_stmt(then_s, depth + 1, out);
            if **else_s != Stmt::Skip {
                writeln!(out, "{pad}}} else {{").unwrap();
                java_stmt(else_s, depth + 1, out);
            }
            writeln!(out, "{pad}}}").unwrap();
        }
        Stmt::While { cond, invariant, body } => {
            if let Some(i) = invariant {
                writeln!(out, "{pad}// loop invariant: {i}").unwrap();
            }
            writeln!(out, "{pad}while ({cond}) {{").unwrap();
            java_stmt(body, depth + 1, out);
            writeln!(out, "{pad}}}").unwrap();
        }
    }
}

pub fn emit(em: &ExplicitMonitor, opts: EmitOptions) -> RenderedMonitor {
    let m = &em.base;
    let sigma = if opts.lazy_broadcast { em.sigma_map.lazy_relay(m) } else { em.sigma_map.clone() };
    let ctx = Ctx { m, cvs: condition_names(m), regs: waiter_registry_plan(em) };
    let mut out = String::new();
    writeln!(out, "class {} {{", m.name).unwrap();
    if !em.invariant.is_true() {
        writeln!(out, "    // monitor invariant: {}", em.invariant).unwrap();
    }
    for d in &m.fields {
        match d.init {
            Some(v) => writeln!(out, "    private {} {} = {v};", java_sort(d.var.sort), d.var.name).unwrap(),
            None => writeln!(out, "    private {} {};", java_sort(d.var.sort), d.var.name).unwrap(),
        }
    }
    writeln!(out, "    private final Lock lock = new ReentrantLock();").unwrap();
    for (p, cv) in &ctx.cvs {
        writeln!(out, "    private final Condition {cv} = lock.newCondition(); // {p}").unwrap();
    }
    for r in &ctx.regs {
        let sorts: Vec<&str> = r.snapshot.iter().map(|v| java_sort(v.sort)).collect();
        writeln!(out, "    private final WaiterRegistry {} = new WaiterRegistry(); // snapshots of ({})", r.name, sorts.join(", "))
            .unwrap();
    }
    for md in &m.methods {
        out.push('\n');
        let params: Vec<String> = md.params.iter().map(|p| format!("{} {}", java_sort(p.var.sort), p.var.name)).collect();
        writeln!(out, "    public void {}({}) {{", md.name, params.join(", ")).unwrap();
        writeln!(out, "        lock.lock();").unwrap();
        for id in &md.ccrs {
            ctx.ccr(ctx.m.ccr(*id), &sigma, &mut out);
        }
        writeln!(out, "        lock.unlock();").unwrap();
        writeln!(out, "    }}").unwrap();
    }
    out.push_str("}\n");
    RenderedMonitor {
        text: out,
        condition_vars: ctx.cvs.iter().map(|(p, cv)| (p.to_string(), cv.clone())).collect(),
        waiter_registries: ctx.regs.iter().map(|r| (r.guard.to_string(), r.clone())).collect(),
        sigma_map: sigma,
    }
}

/// Recovers Σ from rendered text: notification lines are attributed to the
/// CCR whose `// label` comment precedes them.
pub fn extract_signal_map(r: &RenderedMonitor, m: &Monitor) -> Result<SignalMap, String> {
    let by_cv: BTreeMap<&str, Pred> = {
        let guards = guards(m);
        r.condition_vars
            .iter()
            .map(|(text, cv)| {
                let p = guards.iter().find(|g| g.to_string() == *text).cloned().ok_or(format!("unknown guard {text}"))?;
                Ok((cv.as_str(), p))
            })
            .collect::<Result<_, String>>()?
    };
    let mut sm = SignalMap::empty(m);
    let mut current = None;
    for line in r.text.lines().map(str::trim) {
        if let Some(label) = line.strip_prefix("// ") {
            if let Some(c) = m.ccr_by_label(label) {
                current = Some(c.id);
            }
            continue;
        }
        let (cond, call) = match line.strip_prefix("if (") {
            Some(rest) => (Cond::Conditional, rest.rsplit_once(") ").map(|(_, c)| c).unwrap_or("")),
            None => (Cond::Unconditional, line),
        };
        let Some((cv, kind)) = call.strip_suffix("();").and_then(|c| c.split_once('.')) else { continue };
        let bcast = match kind {
            "signal" => false,
            "signalAll" => true,
            _ => continue,
        };
        let Some(p) = by_cv.get(cv) else { continue };
        let id = current.ok_or(format!("notification outside a CCR: {line}"))?;
        sm.entries[id.0].push(NotificationTriple { predicate: p.clone(), cond, bcast });
    }
    Ok(sm)
}

fn sexp_str(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn ir_stmt(s: &Stmt) -> String {
    match s {
        Stmt::Skip => "skip".into(),
        Stmt::Assign { target, value, .. } => format!("(:= {} {})", target.qualified(), sexp_str(&value.to_string())),
        Stmt::Seq(v) => format!("(seq {})", v.iter().map(ir_stmt).collect::<Vec<_>>().join(" ")),
        Stmt::If { cond, then_s, else_s } => {
            format!("(if {} {} {})", sexp_str(&cond.to_string()), ir_stmt(then_s), ir_stmt(else_s))
        }
        Stmt::While { cond, invariant, body } => {
            let inv = invariant.as_ref().map_or("true".to_string(), |i| sexp_str(&i.to_string()));
            format!("(while {} {inv} {})", sexp_str(&cond.to_string()), ir_stmt(body))
        }
    }
}

/// Canonical S-expression form of an explicit monitor.
pub fn emit_ir(em: &ExplicitMonitor, opts: EmitOptions) -> String {
    let m = &em.base;
    let sigma = if opts.lazy_broadcast { em.sigma_map.lazy_relay(m) } else { em.sigma_map.clone() };
    let mut out = String::new();
    writeln!(out, "(monitor {}", m.name).unwrap();
    writeln!(out, "  (invariant {})", sexp_str(&em.invariant.to_string())).unwrap();
    for d in &m.fields {
        let init = d.init.map_or("?".to_string(), |v| v.to_string());
        writeln!(out, "  (field {} {} {init})", d.var.sort, d.var.name).unwrap();
    }
    for c in &m.ccrs {
        writeln!(out, "  (ccr {} {}", c.label, sexp_str(&c.guard.to_string())).unwrap();
        writeln!(out, "    {}", ir_stmt(&c.body)).unwrap();
        for n in sigma.get(c.id) {
            let kind = if n.bcast { "broadcast" } else { "signal" };
            let cond = match n.cond {
                Cond::Conditional => "?",
                Cond::Unconditional => "!",
            };
            writeln!(out, "    ({kind} {cond} {})", sexp_str(&n.predicate.to_string())).unwrap();
        }
        out.truncate(out.trim_end().len());
        out.push_str(")\n");
    }
    out.truncate(out.trim_end().len());
    out.push_str(")\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_monitor;
    use crate::placement::instrument;

    #[test]
    fn empty_sigma_renders_guard_loop_and_body_only() {
        let m = parse_monitor("monitor E { int x = 0; a() { waituntil(x > 0) { x = x - 1; } } }").unwrap();
        let r = emit(&instrument(&m, SignalMap::empty(&m)), EmitOptions::default());
        let body: Vec<&str> = r.text.lines().skip_while(|l| !l.contains("public void a")).map(str::trim).collect();
        assert_eq!(body, ["public void a() {", "lock.lock();", "// a", "while (x <= 0) aCond.await();", "x = x - 1;", "lock.unlock();", "}", "}"]);
        assert!(r.waiter_registries.is_empty());
    }

    #[test]
    fn local_guards_get_a_registry_each() {
        let m = parse_monitor("monitor L { int y = 0; a(int x) { waituntil(x < y); } b(int x) { waituntil(x > y); } }").unwrap();
        let plans = waiter_registry_plan(&instrument(&m, SignalMap::empty(&m)));
        assert_eq!(plans.len(), 2);
        assert_eq!(plans[0].check, "aWaiters.any(s -> s.x < y)");
        assert_ne!(plans[0].name, plans[1].name);
    }
}
