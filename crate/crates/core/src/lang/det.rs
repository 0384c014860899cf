//! Reference (deterministic) programs: symbolic cells and direct evaluation.

use super::ast::*;
use super::eval::{comparison_constraint, compare_values, eval_bool, eval_dom, num_linform, num_value, EvalError};
use crate::integrator::{Constraint, Entailment, LinForm, Region, VarId};
use crate::symexp::rational::Rational;
use std::collections::HashMap;

/// Explicit finite map from input points to outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct DetTable {
    pub rows: Vec<(Vec<Rational>, Vec<OutValue>)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DetSpec {
    Program(Program),
    Table(DetTable),
}

/// Concrete output value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutValue {
    Unset,
    Dom(i64),
    Real(Rational),
}

/// Output value on a cell: real outputs are linear in the real inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CellValue {
    Unset,
    Dom(i64),
    Real(LinForm),
}

impl CellValue {
    pub fn at(&self, x: &dyn Fn(VarId) -> Rational) -> OutValue {
        match self {
            CellValue::Unset => OutValue::Unset,
            CellValue::Dom(d) => OutValue::Dom(*d),
            CellValue::Real(l) => OutValue::Real(l.eval(x)),
        }
    }
}

/// Region over the real inputs (variable ids are input positions in
/// [`Program::vars`] for programs, column indices for tables).
#[derive(Clone, Debug, PartialEq)]
pub struct DetCell {
    pub guard: Region,
    pub outputs: Vec<CellValue>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DetError {
    #[error("reference program samples noise at {0}")]
    NotDeterministic(String),
    #[error("while loop not finished after {0} iterations")]
    UnrollBound(usize),
    #[error("more than {0} cells")]
    TooManyCells(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Input(String),
}

#[derive(Clone, Debug)]
pub struct DetOptions {
    pub unroll_bound: usize,
    pub max_cells: usize,
}

impl Default for DetOptions {
    fn default() -> Self {
        DetOptions {
            unroll_bound: 1000,
            max_cells: 100_000,
        }
    }
}

#[derive(Clone, Debug)]
struct SymState {
    bools: HashMap<Var, bool>,
    doms: HashMap<Var, i64>,
    nums: HashMap<Var, LinForm>,
    guard: Region,
}

/// Cells of the reference program with its DOM inputs fixed to `dom_inputs`.
pub fn det_cells(d: &DetSpec, dom_inputs: &[(Var, i64)], opts: &DetOptions) -> Result<Vec<DetCell>, DetError> {
    match d {
        DetSpec::Table(t) => Ok(t
            .rows
            .iter()
            .map(|(u, out)| DetCell {
                guard: Region::new(
                    u.iter()
                        .enumerate()
                        .map(|(i, x)| Constraint::eq(LinForm::var(i).add_constant(&-x.clone())))
                        .collect(),
                ),
                outputs: out
                    .iter()
                    .map(|o| match o {
                        OutValue::Unset => CellValue::Unset,
                        OutValue::Dom(v) => CellValue::Dom(*v),
                        OutValue::Real(r) => CellValue::Real(LinForm::constant(r.clone())),
                    })
                    .collect(),
            })
            .collect()),
        DetSpec::Program(p) => program_cells(p, dom_inputs, opts),
    }
}

fn program_cells(p: &Program, dom_inputs: &[(Var, i64)], opts: &DetOptions) -> Result<Vec<DetCell>, DetError> {
    let mut init = SymState {
        bools: HashMap::new(),
        doms: HashMap::new(),
        nums: HashMap::new(),
        guard: Region::full(),
    };
    for v in p.inputs() {
        match p.ty(v) {
            Ty::Real => {
                init.nums.insert(v, LinForm::var(v));
            }
            _ => {
                let Some((_, x)) = dom_inputs.iter().find(|(w, _)| *w == v) else {
                    return Err(DetError::Input(format!("no value for DOM input `{}`", p.name(v))));
                };
                init.doms.insert(v, *x);
            }
        }
    }
    let mut done = Vec::new();
    let live = exec(p, &p.body, vec![init], &mut done, opts)?;
    done.extend(live);
    Ok(done
        .into_iter()
        .map(|s| DetCell {
            outputs: p
                .outputs()
                .into_iter()
                .map(|o| match p.ty(o) {
                    Ty::Real => s.nums.get(&o).map_or(CellValue::Unset, |l| CellValue::Real(l.clone())),
                    _ => s.doms.get(&o).map_or(CellValue::Unset, |d| CellValue::Dom(*d)),
                })
                .collect(),
            guard: s.guard,
        })
        .collect())
}

/// Runs `b` on every state; exited states go to `done`, the rest are returned.
fn exec(
    p: &Program,
    b: &[Stmt],
    mut states: Vec<SymState>,
    done: &mut Vec<SymState>,
    opts: &DetOptions,
) -> Result<Vec<SymState>, DetError> {
    for s in b {
        if states.is_empty() {
            break;
        }
        if states.len() + done.len() > opts.max_cells {
            return Err(DetError::TooManyCells(opts.max_cells));
        }
        let mut next = Vec::new();
        for mut st in states {
            let doms = |v: Var| st.doms.get(&v).copied();
            let bools = |v: Var| st.bools.get(&v).copied();
            match &s.kind {
                StmtKind::Bool(v, e) => {
                    let x = eval_bool(p, e, &bools, &doms)?;
                    st.bools.insert(*v, x);
                    next.push(st);
                }
                StmtKind::Dom(v, e) => {
                    let x = eval_dom(p, e, &doms)?;
                    st.doms.insert(*v, x);
                    next.push(st);
                }
                StmtKind::Num(v, e) => {
                    let l = num_linform(p, e, &|w| st.nums.get(&w).cloned(), &doms)?;
                    st.nums.insert(*v, l);
                    next.push(st);
                }
                StmtKind::Compare { dst, lhs, op, rhs, .. } => {
                    let nums = |w: Var| st.nums.get(&w).cloned();
                    let l = num_linform(p, lhs, &nums, &doms)?;
                    let r = num_linform(p, rhs, &nums, &doms)?;
                    let c = comparison_constraint(&l, *op, &r);
                    match st.guard.entails_exact(&c) {
                        Entailment::Yes => {
                            st.bools.insert(*dst, true);
                            next.push(st);
                        }
                        Entailment::No => {
                            st.bools.insert(*dst, false);
                            next.push(st);
                        }
                        Entailment::Neither => {
                            let mut t = st.clone();
                            t.guard.push(c.clone());
                            t.bools.insert(*dst, true);
                            next.push(t);
                            for n in c.negate() {
                                let mut f = st.clone();
                                f.guard.push(n);
                                if !f.guard.is_empty() {
                                    f.bools.insert(*dst, false);
                                    next.push(f);
                                }
                            }
                        }
                    }
                }
                StmtKind::If(c, t, e) => {
                    let x = eval_bool(p, c, &bools, &doms)?;
                    let branch = if x { t } else { e };
                    next.extend(exec(p, branch, vec![st], done, opts)?);
                }
                StmtKind::While(c, body) => {
                    let mut cur = vec![st];
                    let mut iters = 0;
                    while !cur.is_empty() {
                        let mut go = Vec::new();
                        for st in cur {
                            if eval_bool(p, c, &|v| st.bools.get(&v).copied(), &|v| st.doms.get(&v).copied())? {
                                go.push(st);
                            } else {
                                next.push(st);
                            }
                        }
                        if go.is_empty() {
                            break;
                        }
                        iters += 1;
                        if iters > opts.unroll_bound {
                            return Err(DetError::UnrollBound(opts.unroll_bound));
                        }
                        cur = exec(p, body, go, done, opts)?;
                    }
                }
                StmtKind::Exit => done.push(st),
                _ => return Err(DetError::NotDeterministic(s.label.clone())),
            }
        }
        states = next;
    }
    Ok(states)
}

/// Direct evaluation of a deterministic program at a concrete input.
pub fn evaluate(p: &Program, input: &[(Var, OutValue)], opts: &DetOptions) -> Result<Vec<OutValue>, DetError> {
    let mut env = Env::default();
    for (v, x) in input {
        match x {
            OutValue::Dom(d) => drop(env.doms.insert(*v, *d)),
            OutValue::Real(r) => drop(env.nums.insert(*v, r.clone())),
            OutValue::Unset => {}
        }
    }
    run(p, &p.body, &mut env, opts)?;
    Ok(p.outputs()
        .into_iter()
        .map(|o| match p.ty(o) {
            Ty::Real => env.nums.get(&o).map_or(OutValue::Unset, |r| OutValue::Real(r.clone())),
            _ => env.doms.get(&o).map_or(OutValue::Unset, |d| OutValue::Dom(*d)),
        })
        .collect())
}

#[derive(Default)]
struct Env {
    bools: HashMap<Var, bool>,
    doms: HashMap<Var, i64>,
    nums: HashMap<Var, Rational>,
}

/// `Ok(false)` once `exit` runs.
fn run(p: &Program, b: &[Stmt], env: &mut Env, opts: &DetOptions) -> Result<bool, DetError> {
    for s in b {
        let go = {
            let doms = |v: Var| env.doms.get(&v).copied();
            let bools = |v: Var| env.bools.get(&v).copied();
            let nums = |v: Var| env.nums.get(&v).cloned();
            match &s.kind {
                StmtKind::Bool(v, e) => {
                    let x = eval_bool(p, e, &bools, &doms)?;
                    env.bools.insert(*v, x);
                    true
                }
                StmtKind::Dom(v, e) => {
                    let x = eval_dom(p, e, &doms)?;
                    env.doms.insert(*v, x);
                    true
                }
                StmtKind::Num(v, e) => {
                    let x = num_value(p, e, &nums, &doms)?;
                    env.nums.insert(*v, x);
                    true
                }
                StmtKind::Compare { dst, lhs, op, rhs, .. } => {
                    let a = num_value(p, lhs, &nums, &doms)?;
                    let c = num_value(p, rhs, &nums, &doms)?;
                    env.bools.insert(*dst, compare_values(&a, *op, &c));
                    true
                }
                StmtKind::If(c, t, e) => {
                    let x = eval_bool(p, c, &bools, &doms)?;
                    run(p, if x { t } else { e }, env, opts)?
                }
                StmtKind::While(c, body) => {
                    let mut iters = 0;
                    let mut live = true;
                    while live && eval_bool(p, c, &|v| env.bools.get(&v).copied(), &|v| env.doms.get(&v).copied())? {
                        iters += 1;
                        if iters > opts.unroll_bound {
                            return Err(DetError::UnrollBound(opts.unroll_bound));
                        }
                        live = run(p, body, env, opts)?;
                    }
                    live
                }
                StmtKind::Exit => false,
                _ => return Err(DetError::NotDeterministic(s.label.clone())),
            }
        };
        if !go {
            return Ok(false);
        }
    }
    Ok(true)
}
