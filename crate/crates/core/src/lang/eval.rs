//! Evaluation of DOM, Bool and numeric expressions, shared by the symbolic
//! and concrete interpreters.

use super::ast::*;
use crate::integrator::LinForm;
use crate::symexp::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("variable `{0}` read before assignment")]
    Unassigned(String),
    #[error("table `{0}` has no row for arguments {1:?}")]
    MissingRow(String, Vec<i64>),
    #[error("{0}")]
    Other(String),
}

pub type DomEnv<'a> = &'a dyn Fn(Var) -> Option<i64>;
pub type BoolEnv<'a> = &'a dyn Fn(Var) -> Option<bool>;

pub fn eval_dom(p: &Program, e: &DomExpr, doms: DomEnv) -> Result<i64, EvalError> {
    Ok(match e {
        DomExpr::Lit(n) => *n,
        DomExpr::Var(v) => doms(*v).ok_or_else(|| EvalError::Unassigned(p.name(*v).into()))?,
        DomExpr::Add(a, b) => p.clamp(eval_dom(p, a, doms)? + eval_dom(p, b, doms)?),
        DomExpr::Sub(a, b) => p.clamp(eval_dom(p, a, doms)? - eval_dom(p, b, doms)?),
        DomExpr::Builtin(f, xs) => {
            let x = eval_dom(p, &xs[0], doms)?;
            let y = eval_dom(p, &xs[1], doms)?;
            match f {
                DomFn::Min => x.min(y),
                DomFn::Max => x.max(y),
                DomFn::Add => p.clamp(x + y),
                DomFn::Sub => p.clamp(x - y),
            }
        }
        DomExpr::Table(t, xs) => {
            let args = eval_args(p, xs, doms)?;
            match p.funcs[t].rows.get(&args) {
                Some(FnValue::Dom(v)) => *v,
                _ => return Err(EvalError::MissingRow(t.clone(), args)),
            }
        }
    })
}

pub fn eval_args(p: &Program, xs: &[DomExpr], doms: DomEnv) -> Result<Vec<i64>, EvalError> {
    xs.iter().map(|x| eval_dom(p, x, doms)).collect()
}

pub fn eval_bool(p: &Program, e: &BoolExpr, bools: BoolEnv, doms: DomEnv) -> Result<bool, EvalError> {
    Ok(match e {
        BoolExpr::Lit(b) => *b,
        BoolExpr::Var(v) => bools(*v).ok_or_else(|| EvalError::Unassigned(p.name(*v).into()))?,
        BoolExpr::Not(a) => !eval_bool(p, a, bools, doms)?,
        BoolExpr::And(a, b) => eval_bool(p, a, bools, doms)? && eval_bool(p, b, bools, doms)?,
        BoolExpr::Or(a, b) => eval_bool(p, a, bools, doms)? || eval_bool(p, b, bools, doms)?,
        BoolExpr::Builtin(f, xs) => {
            let x = eval_dom(p, &xs[0], doms)?;
            let y = eval_dom(p, &xs[1], doms)?;
            match f {
                BoolFn::Eq => x == y,
                BoolFn::Lt => x < y,
                BoolFn::Le => x <= y,
            }
        }
        BoolExpr::Table(t, xs) => {
            let args = eval_args(p, xs, doms)?;
            match p.funcs[t].rows.get(&args) {
                Some(FnValue::Bool(v)) => *v,
                _ => return Err(EvalError::MissingRow(t.clone(), args)),
            }
        }
    })
}

/// Numeric expression as a linear form, given forms for real/int variables.
pub fn num_linform(
    p: &Program,
    e: &NumExpr,
    nums: &dyn Fn(Var) -> Option<LinForm>,
    doms: DomEnv,
) -> Result<LinForm, EvalError> {
    let r = |x: &NumExpr| num_linform(p, x, nums, doms);
    Ok(match e {
        NumExpr::Var(v) => nums(*v).ok_or_else(|| EvalError::Unassigned(p.name(*v).into()))?,
        NumExpr::Const(c) => LinForm::constant(c.clone()),
        NumExpr::Dom(d) => LinForm::constant(Rational::from_integer(eval_dom(p, d, doms)?.into())),
        NumExpr::Add(a, b) => r(a)?.add(&r(b)?),
        NumExpr::Sub(a, b) => r(a)?.sub(&r(b)?),
        NumExpr::Neg(a) => r(a)?.neg(),
        NumExpr::Mul(a, b) => {
            let (x, y) = (r(a)?, r(b)?);
            if x.is_constant() {
                y.scale(&x.constant)
            } else if y.is_constant() {
                x.scale(&y.constant)
            } else {
                return Err(EvalError::Other("nonlinear product".into()));
            }
        }
    })
}

/// Numeric expression evaluated at rational values.
pub fn num_value(
    p: &Program,
    e: &NumExpr,
    nums: &dyn Fn(Var) -> Option<Rational>,
    doms: DomEnv,
) -> Result<Rational, EvalError> {
    let forms = |v: Var| nums(v).map(LinForm::constant);
    let l = num_linform(p, e, &forms, doms)?;
    debug_assert!(l.is_constant());
    Ok(l.constant)
}

/// Numeric expression evaluated in floating point.
pub fn num_f64(p: &Program, e: &NumExpr, nums: &dyn Fn(Var) -> Option<f64>, doms: DomEnv) -> Result<f64, EvalError> {
    let r = |x: &NumExpr| num_f64(p, x, nums, doms);
    Ok(match e {
        NumExpr::Var(v) => nums(*v).ok_or_else(|| EvalError::Unassigned(p.name(*v).into()))?,
        NumExpr::Const(c) => crate::symexp::rational::to_f64(c),
        NumExpr::Dom(d) => eval_dom(p, d, doms)? as f64,
        NumExpr::Add(a, b) => r(a)? + r(b)?,
        NumExpr::Sub(a, b) => r(a)? - r(b)?,
        NumExpr::Neg(a) => -r(a)?,
        NumExpr::Mul(a, b) => r(a)? * r(b)?,
    })
}

/// Linear constraint equivalent to `lhs op rhs`.
pub fn comparison_constraint(lhs: &LinForm, op: CmpOp, rhs: &LinForm) -> crate::integrator::Constraint {
    use crate::integrator::{Constraint, Rel};
    match op {
        CmpOp::Lt => Constraint::cmp(lhs, Rel::Lt, rhs),
        CmpOp::Le => Constraint::cmp(lhs, Rel::Le, rhs),
        CmpOp::Gt => Constraint::cmp(rhs, Rel::Lt, lhs),
        CmpOp::Ge => Constraint::cmp(rhs, Rel::Le, lhs),
        CmpOp::Eq => Constraint::cmp(lhs, Rel::Eq, rhs),
    }
}

pub fn compare_values(a: &Rational, op: CmpOp, b: &Rational) -> bool {
    match op {
        CmpOp::Lt => a < b,
        CmpOp::Le => a <= b,
        CmpOp::Gt => a > b,
        CmpOp::Ge => a >= b,
        CmpOp::Eq => a == b,
    }
}

pub fn compare_f64(a: f64, op: CmpOp, b: f64) -> bool {
    match op {
        CmpOp::Lt => a < b,
        CmpOp::Le => a <= b,
        CmpOp::Gt => a > b,
        CmpOp::Ge => a >= b,
        CmpOp::Eq => a == b,
    }
}
