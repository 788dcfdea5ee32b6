//! Compiler from implicit-signal (`waituntil`) monitors to explicit-signal
//! monitors, with a dual-semantics trace engine for bounded differential
//! equivalence checking.
//!
//! Pipeline: [`frontend::parse_monitor`] → [`invariants::infer_monitor_invariant`]
//! → [`placement::place_signals`] → [`codegen::emit`]. The
//! [`trace_engine`] interprets both the source and the compiled monitor and
//! compares them trace by trace.

pub mod codegen;
pub mod frontend;
pub mod invariants;
pub mod logic;
pub mod placement;
pub mod trace_engine;

pub use frontend::ast::{Ccr, CcrId, Expr, Method, Monitor, Scope, Sort, Stmt, Value, Var, VarDecl};
pub use logic::{HoareTriple, Verdict};
pub use placement::{ExplicitMonitor, NotificationTriple, SignalMap};
