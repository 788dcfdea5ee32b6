use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use log::{info, warn};
use serde::Serialize;
use sigweaver::codegen::{emit, emit_ir, extract_signal_map, EmitOptions};
use sigweaver::frontend::{parse_expr, parse_monitor};
use sigweaver::invariants::{infer_with_report, seed_triples};
use sigweaver::logic::smt::encode;
use sigweaver::logic::Session;
use sigweaver::placement::{explain, Cond, ExplicitMonitor, PlacementError, PlacementOptions, PlacementReport};
use sigweaver::trace_engine::{check_equivalence_bounded, run_logged, BoundsConfig, Counterexample, Engine, EquivReport};
use sigweaver::{Expr, Monitor};

use crate::{BoundsArgs, Cli, Command, Emit, PipelineArgs};

/// `print!` that exits quietly when the reader has gone away (`| head`).
macro_rules! out {
    ($($t:tt)*) => { write_stdout(format_args!($($t)*)) };
}
macro_rules! outln {
    ($($t:tt)*) => { write_stdout(format_args!("{}\n", format_args!($($t)*))) };
}

fn write_stdout(args: std::fmt::Arguments) {
    use std::io::Write as _;
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout.write_fmt(args).and_then(|()| stdout.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("writing output: {e}");
        std::process::exit(4);
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Semantic(String),
    #[error("{0}")]
    SolverUnavailable(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Semantic(_) => 1,
            CliError::Usage(_) => 2,
            CliError::SolverUnavailable(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Internal(format!("{}: {e}", path.display()))
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Compile { pipeline, emit: format, out_dir, explain } => compile(cli, pipeline, *format, out_dir.as_deref(), *explain),
        Command::InferInv { input, dump_vcs } => infer_inv(cli, input, dump_vcs.as_deref()),
        Command::Difftest { pipeline, bounds, trace_log } => difftest(cli, pipeline, bounds, trace_log.as_deref()),
        Command::DumpVcs { pipeline, out_dir } => {
            let p = PipelineArgs { dump_vcs: Some(out_dir.clone()), ..pipeline.clone() };
            let out = Pipeline::run(cli, &p)?;
            let rows = fs::read_to_string(out_dir.join("index.tsv")).map_err(io_err(out_dir))?.lines().count() - 1;
            if cli.json {
                print_json(&serde_json::json!({ "dir": out_dir, "conditions": rows }))
            } else {
                outln!("{rows} verification conditions ({} queries) written to {}", out.session.stats.queries, out_dir.display());
                Ok(())
            }
        }
        Command::Explain { pipeline } => {
            let out = Pipeline::run(cli, pipeline)?;
            if cli.json {
                return print_json(&out.report);
            }
            out!("{}", render_explanation(&out.report));
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<Monitor, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_monitor(&text).map_err(|e| CliError::Usage(format!("{}:{e}", path.display())))
}

fn session(cli: &Cli) -> Result<Session, CliError> {
    let timeout = Duration::from_millis(cli.timeout);
    match Session::discover(cli.solver.as_deref(), timeout) {
        Ok(s) => Ok(s),
        Err(e) if cli.allow_unknown => {
            warn!("{e}; every check is unknown, so every guard is broadcast after a check");
            Ok(Session::offline(&e.to_string()))
        }
        Err(e) => Err(CliError::SolverUnavailable(e.to_string())),
    }
}

/// Everything `compile` computes before rendering.
struct Pipeline {
    monitor: Monitor,
    session: Session,
    em: ExplicitMonitor,
    report: PlacementReport,
    opts: PlacementOptions,
    elapsed: Duration,
}

impl Pipeline {
    fn run(cli: &Cli, args: &PipelineArgs) -> Result<Pipeline, CliError> {
        let monitor = load(&args.input)?;
        let given = match &args.invariant {
            Some(text) => Some(
                parse_expr(text, &monitor, None).map_err(|e| CliError::Usage(format!("--invariant:{e}")))?,
            ),
            None => None,
        };
        let mut session = session(cli)?;
        if let Some(dir) = &args.dump_vcs {
            session.dump_to(dir).map_err(io_err(dir))?;
        }
        let start = Instant::now();
        let inferred = args.infer.then(|| {
            let theta = seed_triples(&monitor);
            infer_with_report(&mut session, &monitor, &theta)
        });
        let invariant = match (&given, &inferred) {
            (Some(i), _) => i.clone(),
            (None, Some((inv, report))) => {
                info!("inferred {} after {} passes", inv.rendered, report.passes);
                inv.rendered.clone()
            }
            (None, None) => Expr::TRUE,
        };
        let opts = PlacementOptions { use_commutativity: !args.no_commutativity, rename_locals: !args.no_rename_locals };
        let (em, report) = explain(&mut session, &monitor, &invariant, opts).map_err(|e| match e {
            PlacementError::LocalInvariant(_) | PlacementError::InvalidInvariant { .. } => CliError::Semantic(e.to_string()),
        })?;
        let elapsed = start.elapsed();
        if let Some(dir) = &args.dump_vcs {
            session.finish_dump().map_err(io_err(dir))?;
        }
        info!("solver: {:?}", session.stats);
        Ok(Pipeline { monitor, session, em, report, opts, elapsed })
    }
}

#[derive(Serialize)]
struct SigmaRow {
    ccr: String,
    predicate: String,
    cond: String,
    kind: &'static str,
}

fn sigma_rows(em: &ExplicitMonitor) -> Vec<SigmaRow> {
    em.base
        .ccrs
        .iter()
        .flat_map(|c| {
            em.sigma_map.get(c.id).iter().map(|n| SigmaRow {
                ccr: c.label.clone(),
                predicate: n.predicate.to_string(),
                cond: n.cond.to_string(),
                kind: if n.bcast { "broadcast" } else { "signal" },
            })
        })
        .collect()
}

fn sigma_table(em: &ExplicitMonitor) -> String {
    let m = &em.base;
    let width = m.ccrs.iter().map(|c| c.label.len()).max().unwrap_or(0).max(3);
    let pwidth = em.sigma_map.entries.iter().flatten().map(|n| n.predicate.to_string().len()).max().unwrap_or(0).max(9);
    let mut out = format!("{:width$}  {:pwidth$}  cond  kind\n", "ccr", "predicate");
    for c in &m.ccrs {
        let row = em.sigma_map.get(c.id);
        if row.is_empty() {
            writeln!(out, "{:width$}  -", c.label).unwrap();
        }
        for n in row {
            let cond = match n.cond {
                Cond::Conditional => "?",
                Cond::Unconditional => "✓",
            };
            let kind = if n.bcast { "broadcast" } else { "signal" };
            writeln!(out, "{:width$}  {:pwidth$}  {cond:4}  {kind}", c.label, n.predicate.to_string()).unwrap();
        }
    }
    out
}

fn render_explanation(report: &PlacementReport) -> String {
    let mut out = format!("invariant: {}\n", report.invariant);
    if let Some(why) = &report.invariant_fallback {
        writeln!(out, "  (supplied invariant unconfirmed: {why}; placed under true)").unwrap();
    }
    for pair in &report.pairs {
        writeln!(out, "\n{} / {}", pair.ccr, pair.predicate).unwrap();
        for c in &pair.checks {
            let other = c.other.as_deref().map(|o| format!(" [{o}]")).unwrap_or_default();
            writeln!(out, "  {}{other}: {}", c.kind, c.verdict).unwrap();
            if let Some(t) = &c.triple {
                writeln!(out, "    {t}").unwrap();
            }
            if let Some(d) = &c.dump {
                writeln!(out, "    vc: {}", d.display()).unwrap();
            }
        }
        match &pair.decision {
            Some(n) => writeln!(out, "  => {n}").unwrap(),
            None => writeln!(out, "  => no notification").unwrap(),
        }
    }
    out
}

fn print_json<T: Serialize>(v: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).map_err(|e| CliError::Internal(e.to_string()))?;
    outln!("{text}");
    Ok(())
}

fn compile(cli: &Cli, args: &PipelineArgs, format: Emit, out_dir: Option<&Path>, show: bool) -> Result<(), CliError> {
    let p = Pipeline::run(cli, args)?;
    let opts = EmitOptions { lazy_broadcast: !args.no_lazy_broadcast };
    let rendered = emit(&p.em, opts);
    // The text must perform exactly the notifications it was rendered from.
    let back = extract_signal_map(&rendered, &p.monitor).map_err(CliError::Internal)?;
    if back != rendered.sigma_map {
        return Err(CliError::Internal("rendered monitor does not reproduce its signal map".into()));
    }
    let (text, ext) = match format {
        Emit::Java => (rendered.text.clone(), "java.txt"),
        Emit::Ir => (emit_ir(&p.em, opts), "ir"),
    };
    let written = match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
            let path = dir.join(format!("{}.{ext}", p.monitor.name));
            fs::write(&path, &text).map_err(io_err(&path))?;
            Some(path)
        }
        None => None,
    };
    if cli.json {
        return print_json(&serde_json::json!({
            "monitor": p.monitor.name,
            "invariant": p.em.invariant.to_string(),
            "invariant_fallback": p.report.invariant_fallback,
            "signals": sigma_rows(&p.em),
            "output": written,
            "text": if written.is_none() { Some(&text) } else { None },
            "explanation": if show { Some(&p.report) } else { None },
            "solver_queries": p.session.stats.queries,
            "seconds": p.elapsed.as_secs_f64(),
        }));
    }
    outln!("monitor {}  invariant: {}", p.monitor.name, p.em.invariant);
    out!("{}", sigma_table(&p.em));
    if show {
        out!("\n{}", render_explanation(&p.report));
    }
    match written {
        Some(path) => outln!("\nwrote {}", path.display()),
        None => out!("\n{text}"),
    }
    Ok(())
}

fn infer_inv(cli: &Cli, input: &Path, dump: Option<&Path>) -> Result<(), CliError> {
    let m = load(input)?;
    let mut s = session(cli)?;
    if let Some(dir) = dump {
        s.dump_to(dir).map_err(io_err(dir))?;
    }
    let theta = seed_triples(&m);
    let (inv, report) = infer_with_report(&mut s, &m, &theta);
    if let Some(dir) = dump {
        s.finish_dump().map_err(io_err(dir))?;
    }
    let smt = encode(&inv.rendered);
    if cli.json {
        return print_json(&serde_json::json!({
            "monitor": m.name,
            "invariant": inv.rendered.to_string(),
            "smtlib": smt,
            "conjuncts": inv.conjuncts.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "seed_triples": theta.len(),
            "candidates": report.candidates.predicates.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "passes": report.passes,
            "dropped": report.dropped,
        }));
    }
    outln!("invariant: {}", inv.rendered);
    outln!("smt-lib:   {smt}");
    info!("{} seed triples, {} candidates, {} passes", theta.len(), report.candidates.predicates.len(), report.passes);
    Ok(())
}

fn bounds(b: &BoundsArgs) -> BoundsConfig {
    BoundsConfig {
        threads: b.threads as usize,
        length: b.length as usize,
        min_value: b.values.0,
        max_value: b.values.1,
        max_traces: b.max_traces,
    }
}

/// Both engines' step logs for a counterexample trace.
fn trace_log(m: &Monitor, em: &ExplicitMonitor, cex: &Counterexample) -> String {
    let mut out = format!("# sigma0 {}\n# trace {}\n", cex.sigma0, cex.rendered);
    let Some(s0) = &cex.initial else { return out };
    for (name, engine) in [("implicit", Engine::Implicit), ("explicit", Engine::Explicit(&em.sigma_map))] {
        writeln!(out, "# {name}").unwrap();
        match run_logged(s0, &cex.trace, m, engine) {
            Ok((outcome, log)) => {
                for r in &log {
                    writeln!(out, "{name}\t{}", r.display(m)).unwrap();
                }
                if let sigweaver::trace_engine::RunOutcome::Infeasible { index, reason } = outcome {
                    writeln!(out, "{name}\t{index}\tinfeasible\t{reason}").unwrap();
                }
            }
            Err(e) => writeln!(out, "{name}\till-formed at {}", e.index).unwrap(),
        }
    }
    out
}

fn histogram(r: &EquivReport) -> String {
    let fmt = |h: &std::collections::BTreeMap<sigweaver::trace_engine::Rule, u64>| {
        h.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(" ")
    };
    format!("implicit rules {}\nexplicit rules {}\n", fmt(&r.implicit_rules), fmt(&r.explicit_rules))
}

fn difftest(cli: &Cli, args: &PipelineArgs, b: &BoundsArgs, log_path: Option<&Path>) -> Result<(), CliError> {
    let p = Pipeline::run(cli, args)?;
    let em = if args.no_lazy_broadcast {
        p.em.clone()
    } else {
        ExplicitMonitor { sigma_map: p.em.sigma_map.lazy_relay(&p.monitor), ..p.em.clone() }
    };
    let cfg = bounds(b);
    let start = Instant::now();
    let report = check_equivalence_bounded(&p.monitor, &em, &cfg);
    let elapsed = start.elapsed();
    if let (Some(path), Some(cex)) = (log_path, report.counterexample()) {
        fs::write(path, trace_log(&p.monitor, &em, cex)).map_err(io_err(path))?;
    }
    if cli.json {
        print_json(&serde_json::json!({
            "monitor": p.monitor.name,
            "placement": p.opts,
            "lazy_broadcast": !args.no_lazy_broadcast,
            "signals": sigma_rows(&em),
            "bounds": cfg,
            "report": report,
            "seconds": elapsed.as_secs_f64(),
        }))?;
    } else {
        outln!("{}", sigma_table(&em));
        outln!(
            "{} initial states, {} configurations, {} traces, depth {}{} ({:.2?})",
            report.initial_states,
            report.configurations,
            report.traces,
            report.depth,
            if report.complete { "" } else { ", cap reached" },
            elapsed
        );
        out!("{}", histogram(&report));
    }
    match report.counterexample() {
        None => {
            if !cli.json {
                outln!("Pass");
            }
            Ok(())
        }
        Some(cex) => {
            let msg = format!(
                "Counterexample (condition {}): {}\n  from {}\n  {}",
                cex.condition, cex.rendered, cex.sigma0, cex.detail
            );
            if !cli.json {
                outln!("{msg}");
            }
            Err(CliError::Semantic(format!("{}: not equivalent within bounds", p.monitor.name)))
        }
    }
}
