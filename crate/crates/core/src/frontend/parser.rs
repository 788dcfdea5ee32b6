//! Recursive-descent parser. Parsing produces an untyped tree first; a
//! resolution pass then binds identifiers, checks sorts and splits method
//! bodies into CCRs.

use std::collections::BTreeMap;

use super::ast::*;
use super::lexer::{tokenize, Tok};
use super::{ParseError, ParseErrorKind};

#[derive(Debug, Clone)]
enum RExpr {
    Int(i64),
    Bool(bool),
    Ident(String, bool),
    Unary(&'static str, Box<LExpr>),
    Binary(&'static str, Box<LExpr>, Box<LExpr>),
}

#[derive(Debug, Clone)]
struct Located<T> {
    node: T,
    pos: Pos,
}

type LExpr = Located<RExpr>;

#[derive(Debug, Clone)]
enum RStmt {
    Skip,
    Assign { target: String, op: &'static str, value: Option<LExpr> },
    Decl { sort: Sort, name: String, value: Option<LExpr> },
    Block(Vec<Located<RStmt>>),
    If { cond: LExpr, then_s: Box<Located<RStmt>>, else_s: Option<Box<Located<RStmt>>> },
    While { cond: LExpr, invariant: Option<LExpr>, body: Box<Located<RStmt>> },
    WaitUntil { guard: LExpr, body: Vec<Located<RStmt>> },
}

struct RField {
    sort: Sort,
    name: String,
    init: Option<LExpr>,
    pos: Pos,
}

struct RMethod {
    name: String,
    params: Vec<(Sort, String, Pos)>,
    body: Vec<Located<RStmt>>,
    pos: Pos,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        Err(ParseError::syntax(self.pos(), format!("expected {wanted}, found {}", self.peek())))
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), ParseError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.unexpected(&format!("`{p}`"))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_reserved(&s) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn sort_kw(&self) -> Option<(Sort, usize)> {
        match self.peek() {
            Tok::Ident(s) if s == "int" => Some((Sort::Int, 1)),
            Tok::Ident(s) if s == "bool" || s == "boolean" => Some((Sort::Bool, 1)),
            Tok::Ident(s) if s == "unsigned" && matches!(self.peek_at(1), Tok::Ident(t) if t == "int") => {
                Some((Sort::Int, 2))
            }
            _ => None,
        }
    }

    fn sort(&mut self) -> Result<Sort, ParseError> {
        match self.sort_kw() {
            Some((s, n)) => {
                for _ in 0..n {
                    self.bump();
                }
                Ok(s)
            }
            None => self.unexpected("type"),
        }
    }

    fn monitor(&mut self) -> Result<(String, Vec<RField>, Vec<RMethod>), ParseError> {
        while self.eat_kw("public") || self.eat_kw("final") {}
        if !(self.eat_kw("monitor") || self.eat_kw("class")) {
            return self.unexpected("`monitor`");
        }
        let name = self.ident()?;
        self.expect_punct("{")?;
        let (mut fields, mut methods) = (Vec::new(), Vec::new());
        while !self.eat_punct("}") {
            let pos = self.pos();
            while ["public", "private", "protected", "final", "atomic", "synchronized"]
                .iter()
                .any(|kw| self.eat_kw(kw))
            {}
            if let Some((sort, n)) = self.sort_kw() {
                if matches!(self.peek_at(n + 1), Tok::Punct("(")) {
                    return Err(ParseError::syntax(pos, "methods must return void"));
                }
                self.sort()?;
                let fname = self.ident()?;
                let init = if self.eat_punct("=") { Some(self.expr()?) } else { None };
                self.expect_punct(";")?;
                fields.push(RField { sort, name: fname, init, pos });
            } else {
                self.eat_kw("void");
                let mname = self.ident()?;
                self.expect_punct("(")?;
                let mut params = Vec::new();
                if !self.eat_punct(")") {
                    loop {
                        let ppos = self.pos();
                        let s = self.sort()?;
                        params.push((s, self.ident()?, ppos));
                        if self.eat_punct(")") {
                            break;
                        }
                        self.expect_punct(",")?;
                    }
                }
                let body = self.block()?;
                methods.push(RMethod { name: mname, params, body, pos });
            }
        }
        if *self.peek() != Tok::Eof {
            return self.unexpected("end of input");
        }
        Ok((name, fields, methods))
    }

    fn block(&mut self) -> Result<Vec<Located<RStmt>>, ParseError> {
        self.expect_punct("{")?;
        let mut out = Vec::new();
        while !self.eat_punct("}") {
            out.push(self.stmt()?);
        }
        Ok(out)
    }

    fn stmt(&mut self) -> Result<Located<RStmt>, ParseError> {
        let pos = self.pos();
        let node = if self.is_punct("{") {
            RStmt::Block(self.block()?)
        } else if self.eat_punct(";") {
            RStmt::Skip
        } else if self.eat_kw("skip") {
            self.expect_punct(";")?;
            RStmt::Skip
        } else if self.eat_kw("waituntil") {
            self.expect_punct("(")?;
            let guard = self.expr()?;
            self.expect_punct(")")?;
            let body = if self.eat_punct(";") { Vec::new() } else { self.block()? };
            RStmt::WaitUntil { guard, body }
        } else if self.eat_kw("if") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let then_s = Box::new(self.stmt()?);
            let else_s = if self.eat_kw("else") { Some(Box::new(self.stmt()?)) } else { None };
            RStmt::If { cond, then_s, else_s }
        } else if self.eat_kw("while") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let invariant = if self.eat_kw("invariant") {
                self.expect_punct("(")?;
                let i = self.expr()?;
                self.expect_punct(")")?;
                Some(i)
            } else {
                None
            };
            RStmt::While { cond, invariant, body: Box::new(self.stmt()?) }
        } else if self.sort_kw().is_some() {
            let sort = self.sort()?;
            let name = self.ident()?;
            let value = if self.eat_punct("=") { Some(self.expr()?) } else { None };
            self.expect_punct(";")?;
            RStmt::Decl { sort, name, value }
        } else {
            if self.eat_kw("this") {
                self.expect_punct(".")?;
            }
            let target = self.ident()?;
            let node = match self.bump() {
                Tok::Punct(op @ ("=" | "+=" | "-=")) => RStmt::Assign { target, op, value: Some(self.expr()?) },
                Tok::Punct(op @ ("++" | "--")) => RStmt::Assign { target, op, value: None },
                other => {
                    return Err(ParseError::syntax(pos, format!("expected assignment after `{target}`, found {other}")))
                }
            };
            self.expect_punct(";")?;
            node
        };
        Ok(Located { node, pos })
    }

    fn expr(&mut self) -> Result<LExpr, ParseError> {
        self.binary(0)
    }

    fn binary(&mut self, level: usize) -> Result<LExpr, ParseError> {
        const LEVELS: &[&[&str]] = &[&["==>"], &["||"], &["&&"], &["==", "!="], &["<", "<=", ">", ">="], &["+", "-"], &["*"]];
        if level == LEVELS.len() {
            return self.unary();
        }
        let lhs = self.binary(level + 1)?;
        // Implication is right-associative; everything else left-associative.
        if level == 0 {
            if self.is_punct("==>") {
                let pos = self.pos();
                self.bump();
                let rhs = self.binary(0)?;
                return Ok(Located { node: RExpr::Binary("==>", Box::new(lhs), Box::new(rhs)), pos });
            }
            return Ok(lhs);
        }
        let mut lhs = lhs;
        loop {
            let op = match self.peek() {
                Tok::Punct(p) if LEVELS[level].contains(p) => *p,
                _ => return Ok(lhs),
            };
            let pos = self.pos();
            self.bump();
            let rhs = self.binary(level + 1)?;
            lhs = Located { node: RExpr::Binary(op, Box::new(lhs), Box::new(rhs)), pos };
        }
    }

    fn unary(&mut self) -> Result<LExpr, ParseError> {
        let pos = self.pos();
        if self.eat_punct("!") {
            return Ok(Located { node: RExpr::Unary("!", Box::new(self.unary()?)), pos });
        }
        if self.eat_punct("-") {
            return Ok(Located { node: RExpr::Unary("-", Box::new(self.unary()?)), pos });
        }
        let node = match self.bump() {
            Tok::Int(n) => RExpr::Int(n),
            Tok::Ident(s) if s == "true" => RExpr::Bool(true),
            Tok::Ident(s) if s == "false" => RExpr::Bool(false),
            Tok::Ident(s) if s == "this" => {
                self.expect_punct(".")?;
                RExpr::Ident(self.ident()?, true)
            }
            Tok::Ident(s) if !is_reserved(&s) => RExpr::Ident(s, false),
            Tok::Punct("(") => {
                let e = self.expr()?;
                self.expect_punct(")")?;
                return Ok(e);
            }
            other => return Err(ParseError::syntax(pos, format!("expected expression, found {other}"))),
        };
        Ok(Located { node, pos })
    }
}

fn is_reserved(s: &str) -> bool {
    matches!(
        s,
        "monitor" | "class" | "atomic" | "void" | "int" | "bool" | "boolean" | "unsigned" | "if" | "else"
            | "while" | "invariant" | "waituntil" | "skip" | "true" | "false" | "this"
    )
}

/// Name-resolution environment for one method (or for field-only contexts).
struct Env<'a> {
    fields: &'a BTreeMap<String, Var>,
    method: Option<String>,
    locals: BTreeMap<String, Var>,
}

impl Env<'_> {
    fn lookup(&self, name: &str, this: bool, pos: Pos) -> Result<Var, ParseError> {
        let found = if this { None } else { self.locals.get(name) };
        found
            .or_else(|| self.fields.get(name))
            .cloned()
            .ok_or_else(|| ParseError::new(pos, ParseErrorKind::UnknownIdentifier(name.to_string())))
    }

    fn declare(&mut self, sort: Sort, name: &str, pos: Pos) -> Result<Var, ParseError> {
        if self.locals.contains_key(name) || self.fields.contains_key(name) {
            return Err(ParseError::new(pos, ParseErrorKind::Duplicate(name.to_string())));
        }
        let m = self.method.clone().unwrap_or_default();
        let v = Var::local(&m, name, sort);
        self.locals.insert(name.to_string(), v.clone());
        Ok(v)
    }

    fn expr(&self, e: &LExpr) -> Result<Expr, ParseError> {
        let mismatch = |msg: String| ParseError::new(e.pos, ParseErrorKind::SortMismatch(msg));
        let want = |x: &Expr, s: Sort, what: &str| -> Result<(), ParseError> {
            if x.sort() == s {
                Ok(())
            } else {
                Err(mismatch(format!("operand `{x}` of `{what}` must be {s}")))
            }
        };
        Ok(match &e.node {
            RExpr::Int(n) => Expr::Int(*n),
            RExpr::Bool(b) => Expr::Bool(*b),
            RExpr::Ident(name, this) => self.lookup(name, *this, e.pos)?.expr(),
            RExpr::Unary(op, inner) => {
                let x = self.expr(inner)?;
                if *op == "!" {
                    want(&x, Sort::Bool, "!")?;
                    Expr::not(x)
                } else {
                    want(&x, Sort::Int, "-")?;
                    Expr::neg(x)
                }
            }
            RExpr::Binary(op, a, b) => {
                let (x, y) = (self.expr(a)?, self.expr(b)?);
                match *op {
                    "==>" | "||" | "&&" => {
                        want(&x, Sort::Bool, op)?;
                        want(&y, Sort::Bool, op)?;
                        match *op {
                            "==>" => Expr::implies(x, y),
                            "||" => Expr::or([x, y]),
                            _ => Expr::and([x, y]),
                        }
                    }
                    "==" | "!=" => {
                        if x.sort() != y.sort() {
                            return Err(mismatch(format!("cannot compare {} `{x}` with {} `{y}`", x.sort(), y.sort())));
                        }
                        Expr::cmp(if *op == "==" { CmpOp::Eq } else { CmpOp::Ne }, x, y)
                    }
                    "<" | "<=" | ">" | ">=" => {
                        want(&x, Sort::Int, op)?;
                        want(&y, Sort::Int, op)?;
                        let c = match *op {
                            "<" => CmpOp::Lt,
                            "<=" => CmpOp::Le,
                            ">" => CmpOp::Gt,
                            _ => CmpOp::Ge,
                        };
                        Expr::cmp(c, x, y)
                    }
                    _ => {
                        want(&x, Sort::Int, op)?;
                        want(&y, Sort::Int, op)?;
                        match *op {
                            "+" => Expr::add(x, y),
                            "-" => Expr::sub(x, y),
                            _ => {
                                if !x.vars().is_empty() && !y.vars().is_empty() {
                                    return Err(ParseError::new(
                                        e.pos,
                                        ParseErrorKind::NonLinear(format!("{x} * {y}")),
                                    ));
                                }
                                Expr::arith(ArithOp::Mul, x, y)
                            }
                        }
                    }
                }
            }
        })
    }

    fn bool_expr(&self, e: &LExpr) -> Result<Expr, ParseError> {
        let x = self.expr(e)?;
        if x.sort() != Sort::Bool {
            return Err(ParseError::new(e.pos, ParseErrorKind::SortMismatch(format!("`{x}` must be bool"))));
        }
        Ok(x)
    }

    fn stmt(&mut self, s: &Located<RStmt>) -> Result<Stmt, ParseError> {
        Ok(match &s.node {
            RStmt::Skip => Stmt::Skip,
            RStmt::WaitUntil { .. } => return Err(ParseError::new(s.pos, ParseErrorKind::NestedWaituntil)),
            RStmt::Block(v) => Stmt::seq(v.iter().map(|x| self.stmt(x)).collect::<Result<Vec<_>, _>>()?),
            RStmt::If { cond, then_s, else_s } => {
                let cond = self.bool_expr(cond)?;
                let then_s = self.stmt(then_s)?;
                let else_s = match else_s {
                    Some(e) => self.stmt(e)?,
                    None => Stmt::Skip,
                };
                Stmt::If { cond, then_s: Box::new(then_s), else_s: Box::new(else_s) }
            }
            RStmt::While { cond, invariant, body } => {
                let cond = self.bool_expr(cond)?;
                let invariant = invariant.as_ref().map(|i| self.bool_expr(i)).transpose()?;
                Stmt::While { cond, invariant, body: Box::new(self.stmt(body)?) }
            }
            RStmt::Decl { sort, name, value } => {
                let value = match value {
                    Some(v) => {
                        let x = self.expr(v)?;
                        if x.sort() != *sort {
                            return Err(ParseError::new(
                                v.pos,
                                ParseErrorKind::SortMismatch(format!("`{x}` is not {sort}")),
                            ));
                        }
                        x
                    }
                    None if *sort == Sort::Int => Expr::Int(0),
                    None => Expr::FALSE,
                };
                let target = self.declare(*sort, name, s.pos)?;
                Stmt::Assign { target, value, decl: true }
            }
            RStmt::Assign { target, op, value } => {
                let var = self.lookup(target, false, s.pos)?;
                let rhs = match (op, value) {
                    (&"=", Some(v)) => self.expr(v)?,
                    (&"+=", Some(v)) | (&"-=", Some(v)) => {
                        let x = self.expr(v)?;
                        if var.sort != Sort::Int || x.sort() != Sort::Int {
                            return Err(ParseError::new(
                                s.pos,
                                ParseErrorKind::SortMismatch(format!("`{op}` needs int operands")),
                            ));
                        }
                        if *op == "+=" {
                            Expr::add(var.expr(), x)
                        } else {
                            Expr::sub(var.expr(), x)
                        }
                    }
                    _ => {
                        if var.sort != Sort::Int {
                            return Err(ParseError::new(
                                s.pos,
                                ParseErrorKind::SortMismatch(format!("`{op}` needs an int variable")),
                            ));
                        }
                        if *op == "++" {
                            Expr::add(var.expr(), Expr::Int(1))
                        } else {
                            Expr::sub(var.expr(), Expr::Int(1))
                        }
                    }
                };
                if rhs.sort() != var.sort {
                    return Err(ParseError::new(
                        s.pos,
                        ParseErrorKind::SortMismatch(format!("cannot assign `{rhs}` to {} `{target}`", var.sort)),
                    ));
                }
                Stmt::assign(var, rhs)
            }
        })
    }
}

fn const_value(e: &LExpr, env: &Env, sort: Sort) -> Result<Value, ParseError> {
    let x = env.expr(e)?;
    let v = x
        .eval(&|_| None)
        .map_err(|_| ParseError::syntax(e.pos, format!("field initializer `{x}` must be a constant")))?;
    if v.sort() != sort {
        return Err(ParseError::new(e.pos, ParseErrorKind::SortMismatch(format!("`{x}` is not {sort}"))));
    }
    Ok(v)
}

pub fn parse_monitor(text: &str) -> Result<Monitor, ParseError> {
    let mut p = Parser { toks: tokenize(text)?, at: 0 };
    let (name, rfields, rmethods) = p.monitor()?;

    let mut fields_map = BTreeMap::new();
    let mut fields = Vec::new();
    for f in &rfields {
        if fields_map.contains_key(&f.name) {
            return Err(ParseError::new(f.pos, ParseErrorKind::Duplicate(f.name.clone())));
        }
        fields_map.insert(f.name.clone(), Var::shared(&f.name, f.sort));
    }
    for f in &rfields {
        let env = Env { fields: &BTreeMap::new(), method: None, locals: BTreeMap::new() };
        let init = f.init.as_ref().map(|e| const_value(e, &env, f.sort)).transpose()?;
        fields.push(VarDecl { var: fields_map[&f.name].clone(), init, pos: f.pos });
    }

    let mut methods: Vec<Method> = Vec::new();
    let mut all_ccrs: Vec<Ccr> = Vec::new();
    for (mi, rm) in rmethods.iter().enumerate() {
        if methods.iter().any(|m| m.name == rm.name) || fields_map.contains_key(&rm.name) {
            return Err(ParseError::new(rm.pos, ParseErrorKind::Duplicate(rm.name.clone())));
        }
        let mut env = Env { fields: &fields_map, method: Some(rm.name.clone()), locals: BTreeMap::new() };
        let mut params = Vec::new();
        for (sort, pname, ppos) in &rm.params {
            let var = env.declare(*sort, pname, *ppos)?;
            params.push(VarDecl { var, init: None, pos: *ppos });
        }
        let mut leading: Vec<Stmt> = Vec::new();
        let mut groups: Vec<(Expr, Vec<Stmt>, Pos)> = Vec::new();
        for s in &rm.body {
            if let RStmt::WaitUntil { guard, body } = &s.node {
                let g = env.bool_expr(guard)?;
                let b = body.iter().map(|x| env.stmt(x)).collect::<Result<Vec<_>, _>>()?;
                groups.push((g, b, s.pos));
            } else {
                let st = env.stmt(s)?;
                match groups.last_mut() {
                    Some(g) => g.1.push(st),
                    None => leading.push(st),
                }
            }
        }
        let leading = Stmt::seq(leading);
        if leading != Stmt::Skip || groups.is_empty() {
            groups.insert(0, (Expr::TRUE, vec![leading], rm.pos));
        }
        let n = groups.len();
        let mut ids = Vec::new();
        for (ordinal, (guard, body, pos)) in groups.into_iter().enumerate() {
            let id = CcrId(all_ccrs.len());
            let label = if n == 1 { rm.name.clone() } else { format!("{}#{}", rm.name, ordinal + 1) };
            all_ccrs.push(Ccr { id, method: mi, ordinal, label, guard, body: Stmt::seq(body), pos });
            ids.push(id);
        }
        let param_names: Vec<&String> = rm.params.iter().map(|p| &p.1).collect();
        let locals = env
            .locals
            .values()
            .filter(|v| !param_names.contains(&&v.name))
            .cloned()
            .collect();
        methods.push(Method { name: rm.name.clone(), params, locals, ccrs: ids, pos: rm.pos });
    }
    Ok(Monitor { name, fields, methods, ccrs: all_ccrs })
}

/// Parses a standalone expression over the monitor's fields, plus the
/// locals of `method` when given.
pub fn parse_expr(text: &str, m: &Monitor, method: Option<&str>) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: tokenize(text)?, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.unexpected("end of expression");
    }
    let fields: BTreeMap<String, Var> = m.fields.iter().map(|d| (d.var.name.clone(), d.var.clone())).collect();
    let mut locals = BTreeMap::new();
    if let Some(name) = method {
        if let Some(md) = m.methods.iter().find(|x| x.name == name) {
            for v in md.all_locals() {
                locals.insert(v.name.clone(), v.clone());
            }
        }
    }
    let env = Env { fields: &fields, method: method.map(str::to_string), locals };
    env.expr(&e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_statements_into_ccrs() {
        let m = parse_monitor(
            "monitor M { int a = 0; m(int k) { a = k; waituntil(a > 0) { a--; } a = a + 2; waituntil(a > 5); } }",
        )
        .unwrap();
        let labels: Vec<&str> = m.ccrs.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, ["m#1", "m#2", "m#3"]);
        assert!(m.ccrs[0].guard.is_true());
        assert!(matches!(&m.ccrs[1].body, Stmt::Seq(v) if v.len() == 2));
        assert_eq!(m.ccrs[2].body, Stmt::Skip);
    }

    #[test]
    fn compound_assignments_desugar() {
        let m = parse_monitor("monitor M { int a; m() { a += 3; a--; } }").unwrap();
        let a = Var::shared("a", Sort::Int);
        assert_eq!(
            m.ccrs[0].body,
            Stmt::Seq(vec![
                Stmt::assign(a.clone(), Expr::add(a.expr(), Expr::Int(3))),
                Stmt::assign(a.clone(), Expr::sub(a.expr(), Expr::Int(1))),
            ])
        );
        assert_eq!(m.ctor(), Stmt::Skip);
    }

    #[test]
    fn rejections() {
        let cases: &[(&str, fn(&ParseErrorKind) -> bool)] = &[
            ("monitor M { m() { if (true) { waituntil(true); } } }", |k| *k == ParseErrorKind::NestedWaituntil),
            ("monitor M { m() { while (true) waituntil(true); } }", |k| *k == ParseErrorKind::NestedWaituntil),
            ("monitor M { m() { waituntil(true) { waituntil(true); } } }", |k| {
                *k == ParseErrorKind::NestedWaituntil
            }),
            ("monitor M { m(int x) { int x = 1; } }", |k| matches!(k, ParseErrorKind::Duplicate(_))),
            ("monitor M { int a; m(int a) { } }", |k| matches!(k, ParseErrorKind::Duplicate(_))),
            ("monitor M { m() { q = 1; } }", |k| matches!(k, ParseErrorKind::UnknownIdentifier(_))),
            ("monitor M { bool b; m() { b = 1; } }", |k| matches!(k, ParseErrorKind::SortMismatch(_))),
            ("monitor M { int a; m() { waituntil(a); } }", |k| matches!(k, ParseErrorKind::SortMismatch(_))),
            ("monitor M { int a; m(int b) { a = a * b; } }", |k| matches!(k, ParseErrorKind::NonLinear(_))),
            ("monitor M { m() { a = ; } }", |k| matches!(k, ParseErrorKind::Syntax(_))),
        ];
        for (src, ok) in cases {
            let err = parse_monitor(src).expect_err(src);
            assert!(ok(&err.kind), "{src}: {err}");
        }
    }

    #[test]
    fn syntax_error_reports_line_and_column() {
        let err = parse_monitor("monitor M {\n  m() {\n    x = = 1;\n  }\n}").unwrap_err();
        assert_eq!(err.pos, Pos { line: 3, col: 9 });
        assert!(err.to_string().starts_with("3:9: "));
    }

    #[test]
    fn locals_are_method_qualified() {
        let m = parse_monitor("monitor M { a(int x) { } b(int x) { } }").unwrap();
        let xa = &m.methods[0].params[0].var;
        let xb = &m.methods[1].params[0].var;
        assert_ne!(xa, xb);
        assert_eq!(xa.qualified(), "a.x");
    }

    #[test]
    fn standalone_expressions() {
        let m = parse_monitor("monitor M { int readers = 0; m(int n) { } }").unwrap();
        let e = parse_expr("readers >= -5", &m, None).unwrap();
        assert_eq!(e.to_string(), "readers >= -5");
        assert!(parse_expr("n > 0", &m, None).is_err());
        assert!(parse_expr("n > 0", &m, Some("m")).is_ok());
    }
}
