//! Monitor states, events and traces.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::frontend::ast::{CcrId, EvalError, Expr, Monitor, Pred, Sort, Value, Var};

pub type ThreadId = usize;

/// Slot assignment for every variable a state can hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub shared: Vec<Var>,
    pub locals: Vec<Var>,
    index: HashMap<Var, Slot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Shared(usize),
    Local(usize),
}

impl Layout {
    /// Shared variables get one slot; local (and auxiliary) variables get a
    /// slot per thread.
    pub fn new(shared: Vec<Var>, locals: Vec<Var>) -> Arc<Layout> {
        let mut index = HashMap::new();
        for (i, v) in shared.iter().enumerate() {
            index.insert(v.clone(), Slot::Shared(i));
        }
        for (i, v) in locals.iter().enumerate() {
            index.insert(v.clone(), Slot::Local(i));
        }
        Arc::new(Layout { shared, locals, index })
    }

    pub fn of_monitor(m: &Monitor) -> Arc<Layout> {
        let locals = m.methods.iter().flat_map(|md| md.all_locals().cloned()).collect();
        Layout::new(m.shared_vars(), locals)
    }
}

fn default_value(sort: Sort) -> Value {
    match sort {
        Sort::Int => Value::Int(0),
        Sort::Bool => Value::Bool(false),
    }
}

/// Map from (thread, variable) to value. Shared variables are stored once,
/// so all threads agree on them by construction.
#[derive(Clone)]
pub struct MonitorState {
    layout: Arc<Layout>,
    shared: Vec<Value>,
    locals: BTreeMap<ThreadId, Vec<Option<Value>>>,
}

impl PartialEq for MonitorState {
    fn eq(&self, other: &Self) -> bool {
        self.shared == other.shared && self.locals == other.locals
    }
}

impl Eq for MonitorState {}

impl Hash for MonitorState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.shared.hash(state);
        self.locals.hash(state);
    }
}

impl MonitorState {
    /// Shared variables at their sort's default (0 / false), no locals bound.
    pub fn new(layout: Arc<Layout>) -> Self {
        let shared = layout.shared.iter().map(|v| default_value(v.sort)).collect();
        MonitorState { layout, shared, locals: BTreeMap::new() }
    }

    /// State after the field initializers; uninitialized fields take defaults.
    pub fn initial(m: &Monitor) -> Self {
        let mut s = MonitorState::new(Layout::of_monitor(m));
        for d in &m.fields {
            if let Some(v) = d.init {
                s.set(0, &d.var, v);
            }
        }
        s
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn get(&self, t: ThreadId, v: &Var) -> Option<Value> {
        match self.layout.index.get(v)? {
            Slot::Shared(i) => Some(self.shared[*i]),
            Slot::Local(i) => self.locals.get(&t)?[*i],
        }
    }

    pub fn shared(&self, v: &Var) -> Option<Value> {
        self.get(0, v)
    }

    pub fn shared_values(&self) -> &[Value] {
        &self.shared
    }

    /// Panics if `v` has no slot in the layout.
    pub fn set(&mut self, t: ThreadId, v: &Var, value: Value) {
        match self.layout.index.get(v) {
            Some(Slot::Shared(i)) => self.shared[*i] = value,
            Some(Slot::Local(i)) => {
                let n = self.layout.locals.len();
                self.locals.entry(t).or_insert_with(|| vec![None; n])[*i] = Some(value);
            }
            None => panic!("variable `{}` is not part of the state layout", v.qualified()),
        }
    }

    pub fn with(mut self, t: ThreadId, v: &Var, value: Value) -> Self {
        self.set(t, v, value);
        self
    }

    /// Forgets every local of thread `t`.
    pub fn clear_locals(&mut self, t: ThreadId) {
        self.locals.remove(&t);
    }

    pub fn threads(&self) -> impl Iterator<Item = ThreadId> + '_ {
        self.locals.keys().copied()
    }

    pub fn eval(&self, t: ThreadId, e: &Expr) -> Result<Value, EvalError> {
        e.eval(&|v| self.get(t, v))
    }

    pub fn holds(&self, t: ThreadId, p: &Pred) -> Result<bool, EvalError> {
        self.eval(t, p)?.as_bool().ok_or_else(|| EvalError::SortMismatch(p.to_string()))
    }

    /// Shared variables whose value differs from `other`.
    pub fn changed_shared(&self, other: &MonitorState) -> Vec<(Var, Value)> {
        self.layout
            .shared
            .iter()
            .zip(self.shared.iter().zip(&other.shared))
            .filter(|(_, (a, b))| a != b)
            .map(|(v, (_, b))| (v.clone(), *b))
            .collect()
    }
}

impl fmt::Debug for MonitorState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MonitorState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for (v, val) in self.layout.shared.iter().zip(&self.shared) {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{v}={val}")?;
        }
        for (t, slots) in &self.locals {
            for (v, val) in self.layout.locals.iter().zip(slots) {
                if let Some(val) = val {
                    if !first {
                        write!(f, ", ")?;
                    }
                    first = false;
                    write!(f, "{t}:{}={val}", v.qualified())?;
                }
            }
        }
        write!(f, "}}")
    }
}

/// `(t, w, b)`: thread `t` either executes (`fired`) or blocks on CCR `w`.
/// `args` binds the method parameters when the event enters a method; it
/// is ignored otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Event {
    pub thread: ThreadId,
    pub ccr: CcrId,
    pub fired: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<Value>,
}

impl Event {
    pub fn new(thread: ThreadId, ccr: CcrId, fired: bool) -> Self {
        Event { thread, ccr, fired, args: Vec::new() }
    }

    pub fn with_args(mut self, args: Vec<Value>) -> Self {
        self.args = args;
        self
    }

    pub fn key(&self) -> EventKey {
        (self.thread, self.ccr)
    }

    pub fn display(&self, m: &Monitor) -> String {
        let args = if self.args.is_empty() {
            String::new()
        } else {
            let a: Vec<String> = self.args.iter().map(Value::to_string).collect();
            format!("({})", a.join(", "))
        };
        let b = if self.fired { "T" } else { "F" };
        format!("({}, {}{args}, {b})", self.thread, m.ccr(self.ccr).label)
    }
}

/// `ē = (t, w)`. The derived tuple order is the event order ≺:
/// lexicographic on thread id, then CCR index.
pub type EventKey = (ThreadId, CcrId);

pub type Trace = Vec<Event>;

pub fn display_trace(tau: &[Event], m: &Monitor) -> String {
    let parts: Vec<String> = tau.iter().map(|e| e.display(m)).collect();
    format!("[{}]", parts.join(", "))
}

pub fn display_keys(keys: &BTreeSet<EventKey>, m: &Monitor) -> String {
    let parts: Vec<String> = keys.iter().map(|(t, w)| format!("({t}, {})", m.ccr(*w).label)).collect();
    format!("{{{}}}", parts.join(", "))
}

/// `(σ, B, N)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StepState {
    pub sigma: MonitorState,
    pub blocked: BTreeSet<EventKey>,
    pub notified: BTreeSet<EventKey>,
}

impl StepState {
    pub fn new(sigma: MonitorState) -> Self {
        StepState { sigma, blocked: BTreeSet::new(), notified: BTreeSet::new() }
    }
}
