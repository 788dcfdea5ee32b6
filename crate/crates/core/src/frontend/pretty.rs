use std::fmt::Write;

use super::ast::{Monitor, Stmt, Value};

pub fn pretty_print(m: &Monitor) -> String {
    let mut out = String::new();
    writeln!(out, "monitor {} {{", m.name).unwrap();
    for d in &m.fields {
        match d.init {
            Some(v) => writeln!(out, "    {} {} = {};", d.var.sort, d.var.name, value(v)).unwrap(),
            None => writeln!(out, "    {} {};", d.var.sort, d.var.name).unwrap(),
        }
    }
    for md in &m.methods {
        out.push('\n');
        let params: Vec<String> = md.params.iter().map(|p| format!("{} {}", p.var.sort, p.var.name)).collect();
        writeln!(out, "    atomic void {}({}) {{", md.name, params.join(", ")).unwrap();
        for (k, id) in md.ccrs.iter().enumerate() {
            let c = m.ccr(*id);
            let bare = k == 0 && c.guard.is_true() && !(c.body == Stmt::Skip && md.ccrs.len() > 1);
            if bare {
                stmt_lines(&c.body, 2, &mut out);
            } else if c.body == Stmt::Skip {
                writeln!(out, "        waituntil ({});", c.guard).unwrap();
            } else {
                writeln!(out, "        waituntil ({}) {{", c.guard).unwrap();
                stmt_lines(&c.body, 3, &mut out);
                writeln!(out, "        }}").unwrap();
            }
        }
        writeln!(out, "    }}").unwrap();
    }
    out.push_str("}\n");
    out
}

fn value(v: Value) -> String {
    v.to_string()
}

pub fn stmt_lines(s: &Stmt, depth: usize, out: &mut String) {
    let pad = "    ".repeat(depth);
    match s {
        Stmt::Skip => {}
        Stmt::Assign { target, value, decl: true } => {
            writeln!(out, "{pad}{} {} = {};", target.sort, target.name, value).unwrap()
        }
        Stmt::Assign { target, value, .. } => writeln!(out, "{pad}{} = {};", target.name, value).unwrap(),
        Stmt::Seq(v) => v.iter().for_each(|x| stmt_lines(x, depth, out)),
        Stmt::If { cond, then_s, else_s } => {
            writeln!(out, "{pad}if ({cond}) {{").unwrap();
            stmt_lines(then_s, depth + 1, out);
            if **else_s == Stmt::Skip {
                writeln!(out, "{pad}}}").unwrap();
            } else {
                writeln!(out, "{pad}}} else {{").unwrap();
                stmt_lines(else_s, depth + 1, out);
                writeln!(out, "{pad}}}").unwrap();
            }
        }
        Stmt::While { cond, invariant, body } => {
            match invariant {
                Some(i) => writeln!(out, "{pad}while ({cond}) invariant ({i}) {{").unwrap(),
                None => writeln!(out, "{pad}while ({cond}) {{").unwrap(),
            }
            stmt_lines(body, depth + 1, out);
            writeln!(out, "{pad}}}").unwrap();
        }
    }
}
