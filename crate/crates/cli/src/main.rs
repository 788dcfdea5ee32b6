//! `sigweaver`: compile implicit-signal monitors to explicit-signal ones.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "sigweaver", version, about = "Signal placement for implicit-signal monitors")]
pub struct Cli {
    /// SMT solver executable (default: $SIGWEAVER_SOLVER, then `z3` on PATH).
    #[arg(long, global = true)]
    pub solver: Option<PathBuf>,
    /// Per-query solver timeout in milliseconds.
    #[arg(long, global = true, default_value_t = 5000, value_parser = clap::value_parser!(u64).range(1..))]
    pub timeout: u64,
    /// Continue without a solver, treating every check as unknown.
    #[arg(long, global = true)]
    pub allow_unknown: bool,
    /// Print a machine-readable report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// More logging (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Place signals and emit the explicit-signal monitor.
    Compile {
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long, value_enum, default_value_t = Emit::Java)]
        emit: Emit,
        /// Write `<Monitor>.java.txt` or `<Monitor>.ir` here instead of stdout.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Also print every placement check with its verdict.
        #[arg(long)]
        explain: bool,
    },
    /// Infer a monitor invariant.
    InferInv {
        input: PathBuf,
        /// Also write every solver query to this directory.
        #[arg(long)]
        dump_vcs: Option<PathBuf>,
    },
    /// Compile, then compare source and result on all small traces.
    Difftest {
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        bounds: BoundsArgs,
        /// Write the step-by-step runs of a counterexample here.
        #[arg(long)]
        trace_log: Option<PathBuf>,
    },
    /// Write every verification condition of a compile run to a directory.
    DumpVcs {
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print every placement check with its verdict.
    Explain {
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    pub input: PathBuf,
    /// Monitor invariant to place signals under.
    #[arg(long, conflicts_with = "infer")]
    pub invariant: Option<String>,
    /// Infer the monitor invariant first.
    #[arg(long)]
    pub infer: bool,
    /// Skip the commutativity refinement when deciding signal vs. broadcast.
    #[arg(long)]
    pub no_commutativity: bool,
    /// Emit signalAll instead of relayed signals.
    #[arg(long)]
    pub no_lazy_broadcast: bool,
    /// Use guards over locals verbatim (unsound; for demonstration).
    #[arg(long)]
    pub no_rename_locals: bool,
    /// Also write every solver query to this directory.
    #[arg(long)]
    pub dump_vcs: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    /// Number of threads.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: u64,
    /// Longest trace explored.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub length: u64,
    /// Integer domain as `LO..HI` (inclusive).
    #[arg(long, default_value = "0..3", value_parser = parse_range)]
    pub values: (i64, i64),
    /// Give up (reporting an incomplete search) after this many steps.
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_traces: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Java,
    Ir,
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once("..").ok_or("expected LO..HI")?;
    let lo: i64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: i64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
