//! Big-step execution of CCR bodies.

use crate::frontend::ast::{EvalError, Pred, Stmt};

use super::state::{MonitorState, ThreadId};

pub const DEFAULT_FUEL: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("fuel exhausted after {0} steps")]
    FuelExhausted(u64),
}

/// `(σ, t) ⊨ p`.
pub fn eval_pred(sigma: &MonitorState, t: ThreadId, p: &Pred) -> Result<bool, EvalError> {
    sigma.holds(t, p)
}

/// `⟨s, t, σ⟩ ⇓ σ'`, counting one unit of fuel per assignment and per loop
/// iteration.
pub fn exec_body(s: &Stmt, t: ThreadId, sigma: &MonitorState, fuel: u64) -> Result<MonitorState, ExecError> {
    let mut out = sigma.clone();
    let mut left = fuel;
    run(s, t, &mut out, &mut left, fuel)?;
    Ok(out)
}

fn burn(left: &mut u64, fuel: u64) -> Result<(), ExecError> {
    if *left == 0 {
        return Err(ExecError::FuelExhausted(fuel));
    }
    *left -= 1;
    Ok(())
}

fn run(s: &Stmt, t: ThreadId, sigma: &mut MonitorState, left: &mut u64, fuel: u64) -> Result<(), ExecError> {
    match s {
        Stmt::Skip => {}
        Stmt::Assign { target, value, .. } => {
            burn(left, fuel)?;
            let v = sigma.eval(t, value)?;
            sigma.set(t, target, v);
        }
        Stmt::Seq(v) => {
            for x in v {
                run(x, t, sigma, left, fuel)?;
            }
        }
        Stmt::If { cond, then_s, else_s } => {
            if sigma.holds(t, cond)? {
                run(then_s, t, sigma, left, fuel)?;
            } else {
                run(else_s, t, sigma, left, fuel)?;
            }
        }
        Stmt::While { cond, body, .. } => {
            while sigma.holds(t, cond)? {
                burn(left, fuel)?;
                run(body, t, sigma, left, fuel)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::ast::Value;
    use crate::frontend::parse_monitor;
    use crate::trace_engine::state::MonitorState;

    fn rwlock() -> crate::frontend::ast::Monitor {
        parse_monitor(include_str!("../../corpus/rwlock.mon")).unwrap()
    }

    #[test]
    fn eval_pred_examples() {
        let m = rwlock();
        let readers = m.fields[0].var.clone();
        let writer_in = m.fields[1].var.clone();
        let s = MonitorState::initial(&m);
        assert!(eval_pred(&s, 1, &m.ccrs[0].guard).unwrap());
        assert!(eval_pred(&s, 7, &crate::frontend::ast::Expr::TRUE).unwrap());
        let s2 = s.with(0, &readers, Value::Int(2)).with(0, &writer_in, Value::Bool(false));
        assert!(!eval_pred(&s2, 1, &m.ccrs[2].guard).unwrap());
    }

    #[test]
    fn exec_body_examples() {
        let m = rwlock();
        let readers = m.fields[0].var.clone();
        let s = MonitorState::initial(&m);
        let after = exec_body(&m.ccrs[0].body, 1, &s, DEFAULT_FUEL).unwrap();
        assert_eq!(after.shared(&readers), Some(Value::Int(1)));
        assert_eq!(exec_body(&Stmt::Skip, 1, &s, DEFAULT_FUEL).unwrap(), s);
        // exitReader at readers = 0 takes the empty else branch.
        assert_eq!(exec_body(&m.ccrs[1].body, 1, &s, DEFAULT_FUEL).unwrap(), s);
    }

    #[test]
    fn nonterminating_loop_runs_out_of_fuel() {
        let m = parse_monitor("monitor L { int a = 0; m() { while (a >= 0) { a = a + 1; } } }").unwrap();
        let s = MonitorState::initial(&m);
        assert_eq!(exec_body(&m.ccrs[0].body, 1, &s, 50), Err(ExecError::FuelExhausted(50)));
    }
}
