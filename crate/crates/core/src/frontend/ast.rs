//! Typed syntax tree for the monitor DSL.
//!
//! Expressions double as logical formulas: guards, invariants and
//! verification conditions all use [`Expr`]. The smart constructors
//! (`Expr::and`, `Expr::not`, ...) do syntactic simplification only:
//! constant folding, flattening, double negation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sort {
    Int,
    Bool,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => write!(f, "int"),
            Sort::Bool => write!(f, "bool"),
        }
    }
}

/// Where a variable lives. Locals are owned by one method; `Aux` variables
/// are introduced by the logic layer (havoc, result constants) and never
/// appear in source programs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scope {
    Shared,
    Local(String),
    Aux,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
    pub scope: Scope,
}

impl Var {
    pub fn shared(name: &str, sort: Sort) -> Var {
        Var { name: name.to_string(), sort, scope: Scope::Shared }
    }

    pub fn local(method: &str, name: &str, sort: Sort) -> Var {
        Var { name: name.to_string(), sort, scope: Scope::Local(method.to_string()) }
    }

    pub fn aux(name: &str, sort: Sort) -> Var {
        Var { name: name.to_string(), sort, scope: Scope::Aux }
    }

    pub fn is_shared(&self) -> bool {
        self.scope == Scope::Shared
    }

    pub fn is_local(&self) -> bool {
        matches!(self.scope, Scope::Local(_))
    }

    /// Globally unique name: locals are qualified by their method.
    pub fn qualified(&self) -> String {
        match &self.scope {
            Scope::Shared => self.name.clone(),
            Scope::Local(m) => format!("{m}.{}", self.name),
            Scope::Aux => format!("!{}", self.name),
        }
    }

    pub fn smt_symbol(&self) -> String {
        format!("|{}|", self.qualified())
    }

    pub fn expr(&self) -> Expr {
        Expr::Var(self.clone())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Int(_) => Sort::Int,
            Value::Bool(_) => Sort::Bool,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Int(_) => None,
        }
    }

    pub fn expr(&self) -> Expr {
        match self {
            Value::Int(n) => Expr::Int(*n),
            Value::Bool(b) => Expr::Bool(*b),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(Var),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Implies(Box<Expr>, Box<Expr>),
}

/// Predicates and formulas share the expression type.
pub type Pred = Expr;
pub type Formula = Expr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("sort mismatch while evaluating `{0}`")]
    SortMismatch(String),
    #[error("integer overflow")]
    Overflow,
}

impl Expr {
    pub const TRUE: Expr = Expr::Bool(true);
    pub const FALSE: Expr = Expr::Bool(false);

    pub fn is_true(&self) -> bool {
        matches!(self, Expr::Bool(true))
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Expr::Bool(false))
    }

    pub fn not(e: Expr) -> Expr {
        match e {
            Expr::Bool(b) => Expr::Bool(!b),
            Expr::Not(inner) => *inner,
            other => Expr::Not(Box::new(other)),
        }
    }

    pub fn and<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        let mut out: Vec<Expr> = Vec::new();
        for e in items {
            let parts = match e {
                Expr::And(v) => v,
                other => vec![other],
            };
            for p in parts {
                if p.is_false() {
                    return Expr::FALSE;
                }
                if !p.is_true() && !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        match out.len() {
            0 => Expr::TRUE,
            1 => out.pop().unwrap(),
            _ => Expr::And(out),
        }
    }

    pub fn or<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        let mut out: Vec<Expr> = Vec::new();
        for e in items {
            let parts = match e {
                Expr::Or(v) => v,
                other => vec![other],
            };
            for p in parts {
                if p.is_true() {
                    return Expr::TRUE;
                }
                if !p.is_false() && !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        match out.len() {
            0 => Expr::FALSE,
            1 => out.pop().unwrap(),
            _ => Expr::Or(out),
        }
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        if a.is_true() {
            b
        } else if a.is_false() || b.is_true() {
            Expr::TRUE
        } else if b.is_false() {
            Expr::not(a)
        } else {
            Expr::Implies(Box::new(a), Box::new(b))
        }
    }

    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Int(n) => match n.checked_neg() {
                Some(m) => Expr::Int(m),
                None => Expr::Neg(Box::new(Expr::Int(n))),
            },
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn arith(op: ArithOp, a: Expr, b: Expr) -> Expr {
        if let (Expr::Int(x), Expr::Int(y)) = (&a, &b) {
            let folded = match op {
                ArithOp::Add => x.checked_add(*y),
                ArithOp::Sub => x.checked_sub(*y),
                ArithOp::Mul => x.checked_mul(*y),
            };
            if let Some(n) = folded {
                return Expr::Int(n);
            }
        }
        match (op, &a, &b) {
            (ArithOp::Add, Expr::Int(0), _) => b,
            (ArithOp::Add | ArithOp::Sub, _, Expr::Int(0)) => a,
            (ArithOp::Mul, Expr::Int(0), _) | (ArithOp::Mul, _, Expr::Int(0)) => Expr::Int(0),
            (ArithOp::Mul, Expr::Int(1), _) => b,
            (ArithOp::Mul, _, Expr::Int(1)) => a,
            _ => Expr::Arith(op, Box::new(a), Box::new(b)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::arith(ArithOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::arith(ArithOp::Sub, a, b)
    }

    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Int(x), Expr::Int(y)) => return Expr::Bool(op.holds(*x, *y)),
            (Expr::Bool(x), Expr::Bool(y)) => match op {
                CmpOp::Eq => return Expr::Bool(x == y),
                CmpOp::Ne => return Expr::Bool(x != y),
                _ => {}
            },
            _ => {}
        }
        if a == b {
            return Expr::Bool(matches!(op, CmpOp::Eq | CmpOp::Le | CmpOp::Ge));
        }
        Expr::Cmp(op, Box::new(a), Box::new(b))
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::cmp(CmpOp::Eq, a, b)
    }

    pub fn sort(&self) -> Sort {
        match self {
            Expr::Int(_) | Expr::Neg(_) | Expr::Arith(..) => Sort::Int,
            Expr::Var(v) => v.sort,
            _ => Sort::Bool,
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Int(_) | Expr::Bool(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Neg(e) | Expr::Not(e) => e.collect_vars(out),
            Expr::Arith(_, a, b) | Expr::Cmp(_, a, b) | Expr::Implies(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::And(v) | Expr::Or(v) => v.iter().for_each(|e| e.collect_vars(out)),
        }
    }

    pub fn locals(&self) -> BTreeSet<Var> {
        self.vars().into_iter().filter(Var::is_local).collect()
    }

    pub fn is_shared_only(&self) -> bool {
        self.vars().iter().all(Var::is_shared)
    }

    /// Rebuilds the expression bottom-up, replacing variables for which `f`
    /// returns `Some`. Result is re-simplified through the smart constructors.
    pub fn subst_with(&self, f: &dyn Fn(&Var) -> Option<Expr>) -> Expr {
        match self {
            Expr::Int(_) | Expr::Bool(_) => self.clone(),
            Expr::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            Expr::Neg(e) => Expr::neg(e.subst_with(f)),
            Expr::Not(e) => Expr::not(e.subst_with(f)),
            Expr::Arith(op, a, b) => Expr::arith(*op, a.subst_with(f), b.subst_with(f)),
            Expr::Cmp(op, a, b) => Expr::cmp(*op, a.subst_with(f), b.subst_with(f)),
            Expr::And(v) => Expr::and(v.iter().map(|e| e.subst_with(f))),
            Expr::Or(v) => Expr::or(v.iter().map(|e| e.subst_with(f))),
            Expr::Implies(a, b) => Expr::implies(a.subst_with(f), b.subst_with(f)),
        }
    }

    pub fn subst(&self, map: &BTreeMap<Var, Expr>) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        self.subst_with(&|v| map.get(v).cloned())
    }

    pub fn simplify(&self) -> Expr {
        self.subst_with(&|_| None)
    }

    /// Negation normal form; negated comparisons flip their operator.
    pub fn nnf(&self) -> Expr {
        self.nnf_pol(true)
    }

    fn nnf_pol(&self, positive: bool) -> Expr {
        match self {
            Expr::Not(e) => e.nnf_pol(!positive),
            Expr::And(v) if positive => Expr::and(v.iter().map(|e| e.nnf_pol(true))),
            Expr::And(v) => Expr::or(v.iter().map(|e| e.nnf_pol(false))),
            Expr::Or(v) if positive => Expr::or(v.iter().map(|e| e.nnf_pol(true))),
            Expr::Or(v) => Expr::and(v.iter().map(|e| e.nnf_pol(false))),
            Expr::Implies(a, b) if positive => Expr::or([a.nnf_pol(false), b.nnf_pol(true)]),
            Expr::Implies(a, b) => Expr::and([a.nnf_pol(true), b.nnf_pol(false)]),
            Expr::Cmp(op, a, b) if !positive => Expr::cmp(op.negate(), (**a).clone(), (**b).clone()),
            Expr::Bool(b) => Expr::Bool(*b == positive),
            other if positive => other.clone(),
            other => Expr::not(other.clone()),
        }
    }

    pub fn eval(&self, env: &dyn Fn(&Var) -> Option<Value>) -> Result<Value, EvalError> {
        let int = |e: &Expr| -> Result<i64, EvalError> {
            e.eval(env)?.as_int().ok_or_else(|| EvalError::SortMismatch(e.to_string()))
        };
        let boolean = |e: &Expr| -> Result<bool, EvalError> {
            e.eval(env)?.as_bool().ok_or_else(|| EvalError::SortMismatch(e.to_string()))
        };
        Ok(match self {
            Expr::Int(n) => Value::Int(*n),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Var(v) => env(v).ok_or_else(|| EvalError::Unbound(v.qualified()))?,
            Expr::Neg(e) => Value::Int(int(e)?.checked_neg().ok_or(EvalError::Overflow)?),
            Expr::Not(e) => Value::Bool(!boolean(e)?),
            Expr::Arith(op, a, b) => {
                let (x, y) = (int(a)?, int(b)?);
                let r = match op {
                    ArithOp::Add => x.checked_add(y),
                    ArithOp::Sub => x.checked_sub(y),
                    ArithOp::Mul => x.checked_mul(y),
                };
                Value::Int(r.ok_or(EvalError::Overflow)?)
            }
            Expr::Cmp(op, a, b) => {
                let (x, y) = (a.eval(env)?, b.eval(env)?);
                match (x, y) {
                    (Value::Int(x), Value::Int(y)) => Value::Bool(op.holds(x, y)),
                    (Value::Bool(x), Value::Bool(y)) => match op {
                        CmpOp::Eq => Value::Bool(x == y),
                        CmpOp::Ne => Value::Bool(x != y),
                        _ => return Err(EvalError::SortMismatch(self.to_string())),
                    },
                    _ => return Err(EvalError::SortMismatch(self.to_string())),
                }
            }
            Expr::And(v) => {
                for e in v {
                    if !boolean(e)? {
                        return Ok(Value::Bool(false));
                    }
                }
                Value::Bool(true)
            }
            Expr::Or(v) => {
                for e in v {
                    if boolean(e)? {
                        return Ok(Value::Bool(true));
                    }
                }
                Value::Bool(false)
            }
            Expr::Implies(a, b) => Value::Bool(!boolean(a)? || boolean(b)?),
        })
    }

    /// Number of atomic subformulas (comparisons and boolean variables).
    pub fn atom_count(&self) -> usize {
        match self {
            Expr::Not(e) => e.atom_count(),
            Expr::And(v) | Expr::Or(v) => v.iter().map(Expr::atom_count).sum(),
            Expr::Implies(a, b) => a.atom_count() + b.atom_count(),
            Expr::Bool(_) => 0,
            _ => 1,
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Implies(..) => 0,
            Expr::Or(_) => 1,
            Expr::And(_) => 2,
            Expr::Cmp(CmpOp::Eq | CmpOp::Ne, ..) => 3,
            Expr::Cmp(..) => 4,
            Expr::Arith(ArithOp::Add | ArithOp::Sub, ..) => 5,
            Expr::Arith(ArithOp::Mul, ..) => 6,
            Expr::Neg(_) | Expr::Not(_) => 7,
            Expr::Int(n) if *n < 0 => 7,
            _ => 8,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let p = self.prec();
        if p < min {
            write!(f, "(")?;
        }
        match self {
            Expr::Int(n) => write!(f, "{n}")?,
            Expr::Bool(b) => write!(f, "{b}")?,
            Expr::Var(v) => write!(f, "{v}")?,
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_prec(f, 8)?;
            }
            Expr::Not(e) => {
                write!(f, "!")?;
                e.fmt_prec(f, 7)?;
            }
            Expr::Arith(op, a, b) => {
                a.fmt_prec(f, p)?;
                let s = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                };
                write!(f, " {s} ")?;
                b.fmt_prec(f, p + 1)?;
            }
            Expr::Cmp(op, a, b) => {
                a.fmt_prec(f, p + 1)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_prec(f, p + 1)?;
            }
            Expr::And(v) | Expr::Or(v) => {
                let sep = if matches!(self, Expr::And(_)) { " && " } else { " || " };
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{sep}")?;
                    }
                    e.fmt_prec(f, p + 1)?;
                }
            }
            Expr::Implies(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " ==> ")?;
                b.fmt_prec(f, 0)?;
            }
        }
        if p < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stmt {
    Skip,
    /// `decl` marks a local declaration `int x = e;`, kept for printing.
    Assign { target: Var, value: Expr, decl: bool },
    Seq(Vec<Stmt>),
    If { cond: Expr, then_s: Box<Stmt>, else_s: Box<Stmt> },
    While { cond: Expr, invariant: Option<Expr>, body: Box<Stmt> },
}

impl Stmt {
    pub fn assign(target: Var, value: Expr) -> Stmt {
        Stmt::Assign { target, value, decl: false }
    }

    /// Flattens nested sequences and drops `skip`.
    pub fn seq<I: IntoIterator<Item = Stmt>>(items: I) -> Stmt {
        let mut out = Vec::new();
        for s in items {
            match s {
                Stmt::Skip => {}
                Stmt::Seq(v) => out.extend(v),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Stmt::Skip,
            1 => out.pop().unwrap(),
            _ => Stmt::Seq(out),
        }
    }

    pub fn has_loop(&self) -> bool {
        match self {
            Stmt::While { .. } => true,
            Stmt::Seq(v) => v.iter().any(Stmt::has_loop),
            Stmt::If { then_s, else_s, .. } => then_s.has_loop() || else_s.has_loop(),
            _ => false,
        }
    }

    pub fn modified(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_modified(&mut out);
        out
    }

    fn collect_modified(&self, out: &mut BTreeSet<Var>) {
        match self {
            Stmt::Skip => {}
            Stmt::Assign { target, .. } => {
                out.insert(target.clone());
            }
            Stmt::Seq(v) => v.iter().for_each(|s| s.collect_modified(out)),
            Stmt::If { then_s, else_s, .. } => {
                then_s.collect_modified(out);
                else_s.collect_modified(out);
            }
            Stmt::While { body, .. } => body.collect_modified(out),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Stmt::Skip => {}
            Stmt::Assign { target, value, .. } => {
                out.insert(target.clone());
                out.extend(value.vars());
            }
            Stmt::Seq(v) => v.iter().for_each(|s| s.collect_vars(out)),
            Stmt::If { cond, then_s, else_s } => {
                out.extend(cond.vars());
                then_s.collect_vars(out);
                else_s.collect_vars(out);
            }
            Stmt::While { cond, invariant, body } => {
                out.extend(cond.vars());
                if let Some(i) = invariant {
                    out.extend(i.vars());
                }
                body.collect_vars(out);
            }
        }
    }

    /// Consistently renames variables (assignment targets included).
    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Stmt {
        if map.is_empty() {
            return self.clone();
        }
        let sub = |e: &Expr| e.subst_with(&|v| map.get(v).map(Var::expr));
        match self {
            Stmt::Skip => Stmt::Skip,
            Stmt::Assign { target, value, decl } => Stmt::Assign {
                target: map.get(target).cloned().unwrap_or_else(|| target.clone()),
                value: sub(value),
                decl: *decl,
            },
            Stmt::Seq(v) => Stmt::Seq(v.iter().map(|s| s.rename(map)).collect()),
            Stmt::If { cond, then_s, else_s } => Stmt::If {
                cond: sub(cond),
                then_s: Box::new(then_s.rename(map)),
                else_s: Box::new(else_s.rename(map)),
            },
            Stmt::While { cond, invariant, body } => Stmt::While {
                cond: sub(cond),
                invariant: invariant.as_ref().map(sub),
                body: Box::new(body.rename(map)),
            },
        }
    }
}

/// One-line rendering used in diagnostics and triple listings.
impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Skip => write!(f, "skip"),
            Stmt::Assign { target, value, .. } => write!(f, "{target} = {value}"),
            Stmt::Seq(v) => {
                for (i, s) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{s}")?;
                }
                Ok(())
            }
            Stmt::If { cond, then_s, else_s } if **else_s == Stmt::Skip => write!(f, "if ({cond}) {{ {then_s} }}"),
            Stmt::If { cond, then_s, else_s } => write!(f, "if ({cond}) {{ {then_s} }} else {{ {else_s} }}"),
            Stmt::While { cond, body, .. } => write!(f, "while ({cond}) {{ {body} }}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CcrId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarDecl {
    pub var: Var,
    pub init: Option<Value>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ccr {
    pub id: CcrId,
    /// Index of the owning method in `Monitor::methods`.
    pub method: usize,
    /// Zero-based position within the method.
    pub ordinal: usize,
    /// `method` for single-CCR methods, `method#k` (1-based) otherwise.
    pub label: String,
    pub guard: Pred,
    pub body: Stmt,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Method {
    pub name: String,
    pub params: Vec<VarDecl>,
    /// Locals declared in the body (parameters excluded).
    pub locals: Vec<Var>,
    pub ccrs: Vec<CcrId>,
    pub pos: Pos,
}

impl Method {
    pub fn all_locals(&self) -> impl Iterator<Item = &Var> {
        self.params.iter().map(|d| &d.var).chain(self.locals.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monitor {
    pub name: String,
    pub fields: Vec<VarDecl>,
    pub methods: Vec<Method>,
    /// All CCRs in method declaration order, then ordinal; `ccrs[i].id == CcrId(i)`.
    pub ccrs: Vec<Ccr>,
}

impl Monitor {
    pub fn ccr(&self, id: CcrId) -> &Ccr {
        &self.ccrs[id.0]
    }

    pub fn method_of(&self, id: CcrId) -> &Method {
        &self.methods[self.ccr(id).method]
    }

    pub fn shared_vars(&self) -> Vec<Var> {
        self.fields.iter().map(|d| d.var.clone()).collect()
    }

    /// Field initializers as a statement; uninitialized fields are left
    /// unconstrained.
    pub fn ctor(&self) -> Stmt {
        Stmt::seq(
            self.fields
                .iter()
                .filter_map(|d| d.init.map(|v| Stmt::assign(d.var.clone(), v.expr()))),
        )
    }

    pub fn ccr_by_label(&self, label: &str) -> Option<&Ccr> {
        self.ccrs.iter().find(|c| c.label == label)
    }

    /// Successor CCR within the same method, if any.
    pub fn succ(&self, id: CcrId) -> Option<CcrId> {
        let c = self.ccr(id);
        self.methods[c.method].ccrs.get(c.ordinal + 1).copied()
    }

    pub fn is_last(&self, id: CcrId) -> bool {
        self.succ(id).is_none()
    }

    pub fn is_first(&self, id: CcrId) -> bool {
        self.ccr(id).ordinal == 0
    }
}
