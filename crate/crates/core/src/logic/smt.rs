//! SMT-LIB 2 over a child process.
//!
//! One solver process per [`Session`]; every query runs inside its own
//! `push`/`pop` scope. Responses are delimited by an `echo` marker so the
//! reader never has to guess where an answer ends.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, warn};

use crate::frontend::ast::{ArithOp, CmpOp, Expr, Formula, Sort, Value, Var};

use super::sexpr::{parse_all, Sexp};
use super::{Model, Verdict};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);
pub const SOLVER_ENV: &str = "SIGWEAVER_SOLVER";
const MARKER: &str = "@@done";
/// Extra wall-clock allowance on top of the solver's own timeout before the
/// process is considered hung.
const GRACE: Duration = Duration::from_secs(5);

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("cannot start solver {path}: {source}")]
    Spawn { path: PathBuf, source: std::io::Error },
    #[error("no solver found (use --solver, ${SOLVER_ENV}, or put z3 on PATH)")]
    NotFound,
    #[error("solver protocol error: {0}")]
    Protocol(String),
    #[error("solver did not answer within {0:?}")]
    Hung(Duration),
}

/// `--solver` path, else `$SIGWEAVER_SOLVER`, else `z3` on `PATH`.
pub fn locate_solver(explicit: Option<&Path>) -> Option<PathBuf> {
    if let Some(p) = explicit {
        return Some(p.to_path_buf());
    }
    if let Some(p) = std::env::var_os(SOLVER_ENV).filter(|p| !p.is_empty()) {
        return Some(PathBuf::from(p));
    }
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path).map(|d| d.join("z3")).find(|p| p.is_file())
}

pub fn encode(e: &Expr) -> String {
    let mut out = String::new();
    encode_into(e, &mut out);
    out
}

fn encode_into(e: &Expr, out: &mut String) {
    let nary = |op: &str, items: &[&Expr], out: &mut String| {
        out.push('(');
        out.push_str(op);
        for it in items {
            out.push(' ');
            encode_into(it, out);
        }
        out.push(')');
    };
    match e {
        Expr::Int(n) if *n < 0 => out.push_str(&format!("(- {})", n.unsigned_abs())),
        Expr::Int(n) => out.push_str(&n.to_string()),
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Var(v) => out.push_str(&v.smt_symbol()),
        Expr::Neg(a) => nary("-", &[a], out),
        Expr::Not(a) => nary("not", &[a], out),
        Expr::Arith(op, a, b) => {
            let s = match op {
                ArithOp::Add => "+",
                ArithOp::Sub => "-",
                ArithOp::Mul => "*",
            };
            nary(s, &[a, b], out)
        }
        Expr::Cmp(CmpOp::Ne, a, b) => nary("distinct", &[a, b], out),
        Expr::Cmp(op, a, b) => nary(if *op == CmpOp::Eq { "=" } else { op.symbol() }, &[a, b], out),
        Expr::And(v) if v.is_empty() => out.push_str("true"),
        Expr::Or(v) if v.is_empty() => out.push_str("false"),
        Expr::And(v) => nary("and", &v.iter().collect::<Vec<_>>(), out),
        Expr::Or(v) => nary("or", &v.iter().collect::<Vec<_>>(), out),
        Expr::Implies(a, b) => nary("=>", &[a, b], out),
    }
}

pub fn sort_name(s: Sort) -> &'static str {
    match s {
        Sort::Int => "Int",
        Sort::Bool => "Bool",
    }
}

pub fn declarations<'a>(vars: impl IntoIterator<Item = &'a Var>) -> String {
    vars.into_iter().map(|v| format!("(declare-const {} {})\n", v.smt_symbol(), sort_name(v.sort))).collect()
}

/// Translates solver output back into an [`Expr`]; `symbols` maps unquoted
/// symbol names to variables.
pub fn decode(s: &Sexp, symbols: &BTreeMap<String, Var>) -> Result<Expr, String> {
    decode_in(s, symbols, &mut Vec::new())
}

fn decode_in(s: &Sexp, symbols: &BTreeMap<String, Var>, lets: &mut Vec<(String, Expr)>) -> Result<Expr, String> {
    match s {
        Sexp::Atom(a) => {
            if let Some((_, e)) = lets.iter().rev().find(|(n, _)| n == a) {
                return Ok(e.clone());
            }
            match a.as_str() {
                "true" => Ok(Expr::TRUE),
                "false" => Ok(Expr::FALSE),
                _ => {
                    if let Ok(n) = a.parse::<i64>() {
                        return Ok(Expr::Int(n));
                    }
                    symbols.get(a).map(Var::expr).ok_or_else(|| format!("unknown symbol {a}"))
                }
            }
        }
        Sexp::List(items) => {
            let head = s.head().ok_or_else(|| format!("unsupported term {s}"))?;
            let args = &items[1..];
            if head == "let" {
                let binds = args.first().and_then(Sexp::list).ok_or("malformed let")?;
                let mut new = Vec::new();
                for b in binds {
                    let pair = b.list().filter(|p| p.len() == 2).ok_or("malformed let binding")?;
                    let name = pair[0].atom().ok_or("malformed let binding")?.to_string();
                    new.push((name, decode_in(&pair[1], symbols, lets)?));
                }
                let n = new.len();
                lets.extend(new);
                let body = match args.get(1) {
                    Some(b) => decode_in(b, symbols, lets),
                    None => Err("malformed let".to_string()),
                };
                lets.truncate(lets.len() - n);
                return body;
            }
            let xs = args.iter().map(|a| decode_in(a, symbols, lets)).collect::<Result<Vec<_>, _>>()?;
            let two = |xs: &[Expr]| -> Result<(Expr, Expr), String> {
                match xs {
                    [a, b] => Ok((a.clone(), b.clone())),
                    _ => Err(format!("{head} expects two arguments")),
                }
            };
            let chain = |op: CmpOp, xs: &[Expr]| -> Result<Expr, String> {
                if xs.len() < 2 {
                    return Err(format!("{head} expects two arguments"));
                }
                Ok(Expr::and(xs.windows(2).map(|w| Expr::cmp(op, w[0].clone(), w[1].clone()))))
            };
            match head {
                "and" => Ok(Expr::and(xs)),
                "or" => Ok(Expr::or(xs)),
                "not" if xs.len() == 1 => Ok(Expr::not(xs[0].clone())),
                "=>" => {
                    let (a, b) = two(&xs)?;
                    Ok(Expr::implies(a, b))
                }
                "=" => chain(CmpOp::Eq, &xs),
                "distinct" => {
                    let (a, b) = two(&xs)?;
                    Ok(Expr::cmp(CmpOp::Ne, a, b))
                }
                "<" => chain(CmpOp::Lt, &xs),
                "<=" => chain(CmpOp::Le, &xs),
                ">" => chain(CmpOp::Gt, &xs),
                ">=" => chain(CmpOp::Ge, &xs),
                "+" if !xs.is_empty() => Ok(xs.into_iter().reduce(Expr::add).unwrap()),
                "-" if xs.len() == 1 => Ok(Expr::neg(xs[0].clone())),
                "-" if xs.len() >= 2 => Ok(xs.into_iter().reduce(Expr::sub).unwrap()),
                "*" if !xs.is_empty() => {
                    Ok(xs.into_iter().reduce(|a, b| Expr::arith(ArithOp::Mul, a, b)).unwrap())
                }
                "ite" if xs.len() == 3 && xs[1].sort() == Sort::Bool => {
                    let (c, a, b) = (xs[0].clone(), xs[1].clone(), xs[2].clone());
                    Ok(Expr::or([Expr::and([c.clone(), a]), Expr::and([Expr::not(c), b])]))
                }
                _ => Err(format!("unsupported term {s}")),
            }
        }
    }
}

fn parse_value(s: &Sexp) -> Option<Value> {
    match s {
        Sexp::Atom(a) if a == "true" => Some(Value::Bool(true)),
        Sexp::Atom(a) if a == "false" => Some(Value::Bool(false)),
        Sexp::Atom(a) => a.parse().ok().map(Value::Int),
        Sexp::List(v) if v.len() == 2 && v[0].atom() == Some("-") => {
            parse_value(&v[1])?.as_int().map(|n| Value::Int(-n))
        }
        _ => None,
    }
}

struct Process {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl Process {
    fn spawn(path: &Path, timeout: Duration) -> Result<Process, SolverError> {
        let mut child = Command::new(path)
            .args(["-in", "-smt2"])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|source| SolverError::Spawn { path: path.to_path_buf(), source })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut p = Process { child, stdin, lines };
        let ms = timeout.as_millis().max(1);
        p.roundtrip(&format!("(set-option :print-success false)\n(set-option :timeout {ms})\n"), timeout)?;
        Ok(p)
    }

    /// Sends `cmds` and returns everything printed before the marker.
    fn roundtrip(&mut self, cmds: &str, timeout: Duration) -> Result<String, SolverError> {
        let io = |e: std::io::Error| SolverError::Protocol(e.to_string());
        self.stdin.write_all(cmds.as_bytes()).map_err(io)?;
        writeln!(self.stdin, "(echo \"{MARKER}\")").map_err(io)?;
        self.stdin.flush().map_err(io)?;
        let deadline = Instant::now() + timeout + GRACE;
        let mut out = String::new();
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            match self.lines.recv_timeout(left) {
                Ok(line) if line.trim() == MARKER => return Ok(out),
                Ok(line) => {
                    out.push_str(&line);
                    out.push('\n');
                }
                Err(RecvTimeoutError::Timeout) => return Err(SolverError::Hung(timeout + GRACE)),
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(SolverError::Protocol("solver exited".into()))
                }
            }
        }
    }
}

impl Drop for Process {
    fn drop(&mut self) {
        let _ = self.stdin.write_all(b"(exit)\n");
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Numbered `.smt2` files plus an `index.tsv` of labels.
struct VcDump {
    dir: PathBuf,
    count: usize,
    index: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SessionStats {
    pub queries: usize,
    pub cache_hits: usize,
    pub unknowns: usize,
    pub eliminations: usize,
}

/// A solver session; without a solver every query answers `Unknown`.
pub struct Session {
    process: Option<Process>,
    path: Option<PathBuf>,
    offline_reason: String,
    timeout: Duration,
    cache: HashMap<String, Verdict>,
    qe_cache: HashMap<String, Option<Vec<Expr>>>,
    dump: Option<VcDump>,
    label: String,
    last_dump: Option<PathBuf>,
    pub stats: SessionStats,
}

impl Session {
    pub fn spawn(path: &Path, timeout: Duration) -> Result<Session, SolverError> {
        let process = Process::spawn(path, timeout)?;
        debug!("solver session started: {}", path.display());
        Ok(Session { process: Some(process), path: Some(path.to_path_buf()), ..Session::offline("") }.with_timeout(timeout))
    }

    /// Spawns the solver found by [`locate_solver`].
    pub fn discover(explicit: Option<&Path>, timeout: Duration) -> Result<Session, SolverError> {
        let path = locate_solver(explicit).ok_or(SolverError::NotFound)?;
        Session::spawn(&path, timeout)
    }

    pub fn offline(reason: &str) -> Session {
        Session {
            process: None,
            path: None,
            offline_reason: reason.to_string(),
            timeout: DEFAULT_TIMEOUT,
            cache: HashMap::new(),
            qe_cache: HashMap::new(),
            dump: None,
            label: String::new(),
            last_dump: None,
            stats: SessionStats::default(),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Session {
        self.timeout = timeout;
        self
    }

    pub fn is_online(&self) -> bool {
        self.process.is_some()
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    /// Writes every subsequent validity query into `dir`.
    pub fn dump_to(&mut self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        self.dump = Some(VcDump { dir: dir.to_path_buf(), count: 0, index: Vec::new() });
        Ok(())
    }

    /// Writes `index.tsv` for the dumped queries.
    pub fn finish_dump(&mut self) -> std::io::Result<Option<PathBuf>> {
        let Some(d) = &self.dump else { return Ok(None) };
        let path = d.dir.join("index.tsv");
        let mut text = String::from("file\tsite\tpredicate\tcheck\n");
        for line in &d.index {
            text.push_str(line);
            text.push('\n');
        }
        fs::write(&path, text)?;
        Ok(Some(path))
    }

    /// Label recorded in the dump index for the following queries: where the
    /// query comes from, the predicate it is about, and the kind of check.
    pub fn set_label(&mut self, site: &str, predicate: &str, check: &str) {
        self.label = format!("{site}\t{predicate}\t{check}");
    }

    /// File written for the most recent query, if dumping.
    pub fn last_dump(&self) -> Option<&Path> {
        self.last_dump.as_deref()
    }

    fn record(&mut self, script: &str) {
        self.last_dump = None;
        let Some(d) = &mut self.dump else { return };
        d.count += 1;
        let name = format!("{:04}.smt2", d.count);
        let path = d.dir.join(&name);
        let text = format!("; {}\n(set-logic QF_LIA)\n{script}", self.label.replace('\t', " | "));
        if let Err(e) = fs::write(&path, text) {
            warn!("cannot write {}: {e}", path.display());
            return;
        }
        d.index.push(format!("{name}\t{}", self.label));
        self.last_dump = Some(path);
    }

    fn restart(&mut self) {
        self.process = None;
        if let Some(path) = &self.path {
            match Process::spawn(path, self.timeout) {
                Ok(p) => self.process = Some(p),
                Err(e) => {
                    warn!("solver restart failed: {e}");
                    self.offline_reason = e.to_string();
                }
            }
        }
    }

    fn roundtrip(&mut self, cmds: &str) -> Result<String, SolverError> {
        let timeout = self.timeout;
        let Some(p) = &mut self.process else {
            return Err(SolverError::Protocol(self.offline_reason.clone()));
        };
        let r = p.roundtrip(cmds, timeout);
        if let Err(SolverError::Hung(_) | SolverError::Protocol(_)) = &r {
            self.restart();
        }
        r
    }

    /// Valid iff `¬f` is unsatisfiable.
    pub fn check_valid(&mut self, f: &Formula) -> Verdict {
        let f = f.simplify();
        let vars = f.vars();
        let script = format!("{}(assert (not {}))\n(check-sat)\n", declarations(&vars), encode(&f));
        self.record(&script);
        self.stats.queries += 1;
        if let Some(v) = self.cache.get(&script) {
            self.stats.cache_hits += 1;
            return v.clone();
        }
        // Offline, nothing is decided, not even the trivial cases, so the
        // fallback is uniformly the most conservative one.
        if f.is_true() && self.is_online() {
            return Verdict::Valid;
        }
        let v = self.query(&script, &vars);
        if let Verdict::Unknown(r) = &v {
            self.stats.unknowns += 1;
            debug!("unknown verdict ({r}) for {f}");
        }
        self.cache.insert(script, v.clone());
        v
    }

    fn query(&mut self, script: &str, vars: &BTreeSet<Var>) -> Verdict {
        let answer = match self.roundtrip(&format!("(push 1)\n{script}")) {
            Ok(a) => a,
            Err(e) => return Verdict::Unknown(e.to_string()),
        };
        let verdict = match answer.trim() {
            "unsat" => Verdict::Valid,
            "sat" => {
                let syms: Vec<String> = vars.iter().map(Var::smt_symbol).collect();
                let model = if syms.is_empty() {
                    Ok(Model::default())
                } else {
                    self.roundtrip(&format!("(get-value ({}))\n", syms.join(" "))).map_err(|e| e.to_string()).and_then(
                        |text| {
                            let by_name: BTreeMap<String, &Var> = vars.iter().map(|v| (v.qualified(), v)).collect();
                            let mut m = Model::default();
                            for pair in parse_all(&text).map_err(|e| e.to_string())?.iter().filter_map(Sexp::list).flatten() {
                                let kv = pair.list().filter(|kv| kv.len() == 2).ok_or("malformed model")?;
                                let var = kv[0].atom().and_then(|n| by_name.get(n)).ok_or("unknown model symbol")?;
                                let val = parse_value(&kv[1]).ok_or("malformed model value")?;
                                m.0.insert((*var).clone(), val);
                            }
                            Ok(m)
                        },
                    )
                };
                match model {
                    Ok(m) => Verdict::Invalid(m),
                    Err(e) => Verdict::Unknown(format!("model: {e}")),
                }
            }
            "unknown" => Verdict::Unknown("solver returned unknown".into()),
            other => Verdict::Unknown(format!("unexpected solver answer: {other}")),
        };
        if self.roundtrip("(pop 1)\n").is_err() {
            return Verdict::Unknown("solver lost after query".into());
        }
        verdict
    }

    /// Quantifier elimination of `∀ bound. f`; returns the conjuncts of an
    /// equivalent quantifier-free formula over the remaining variables, or
    /// `None` if the solver fails or the result leaves the supported fragment.
    pub fn forall_eliminate(&mut self, f: &Formula, bound: &BTreeSet<Var>) -> Option<Vec<Expr>> {
        let vars = f.vars();
        let free: Vec<&Var> = vars.iter().filter(|v| !bound.contains(v)).collect();
        let binders: Vec<String> =
            vars.iter().filter(|v| bound.contains(v)).map(|v| format!("({} {})", v.smt_symbol(), sort_name(v.sort))).collect();
        let body = if binders.is_empty() { encode(f) } else { format!("(forall ({}) {})", binders.join(" "), encode(f)) };
        let script = format!("{}(assert {body})\n", declarations(free.iter().copied()));
        if let Some(hit) = self.qe_cache.get(&script) {
            return hit.clone();
        }
        self.stats.eliminations += 1;
        let ms = self.timeout.as_millis().max(1);
        let result = self
            .roundtrip(&format!("(push 1)\n{script}(apply (try-for (then qe simplify) {ms}))\n(pop 1)\n"))
            .ok()
            .and_then(|text| {
                let symbols: BTreeMap<String, Var> = free.iter().map(|v| (v.qualified(), (*v).clone())).collect();
                let goals = parse_all(&text).ok()?.into_iter().find(|s| s.head() == Some("goals"))?;
                let goals = goals.list()?;
                if goals.len() != 2 {
                    return None;
                }
                let goal = goals[1].list()?;
                let mut out = Vec::new();
                let mut it = goal.iter().skip(1);
                while let Some(t) = it.next() {
                    if t.atom().is_some_and(|a| a.starts_with(':')) {
                        it.next();
                        continue;
                    }
                    out.push(decode(t, &symbols).ok()?);
                }
                Some(out)
            });
        if result.is_none() {
            debug!("quantifier elimination failed for {f}");
        }
        self.qe_cache.insert(script, result.clone());
        result
    }
}
