//! Typed program representation.

use crate::symexp::ExpRational;
use crate::symexp::rational::Rational;
use std::collections::BTreeMap;

pub use super::syntax::Role;

/// Index into [`Program::vars`].
pub type Var = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ty {
    Bool,
    Dom,
    Int,
    Real,
}

impl Ty {
    pub fn keyword(self) -> &'static str {
        match self {
            Ty::Bool => "bool",
            Ty::Dom => "dom",
            Ty::Int => "int",
            Ty::Real => "real",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub ty: Ty,
    pub role: Role,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DomFn {
    Min,
    Max,
    Add,
    Sub,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DomExpr {
    Lit(i64),
    Var(Var),
    /// clamped `+`
    Add(Box<DomExpr>, Box<DomExpr>),
    /// clamped `-`
    Sub(Box<DomExpr>, Box<DomExpr>),
    Builtin(DomFn, Vec<DomExpr>),
    Table(String, Vec<DomExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NumExpr {
    Var(Var),
    Const(Rational),
    Dom(DomExpr),
    Add(Box<NumExpr>, Box<NumExpr>),
    Sub(Box<NumExpr>, Box<NumExpr>),
    Neg(Box<NumExpr>),
    /// at least one factor contains no real or integer variable
    Mul(Box<NumExpr>, Box<NumExpr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoolFn {
    Eq,
    Lt,
    Le,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    Lit(bool),
    Var(Var),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Builtin(BoolFn, Vec<DomExpr>),
    Table(String, Vec<DomExpr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
        }
    }
}

/// Which kind of variables a comparison ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpDomain {
    Real,
    Int,
    /// no random variables; decided by evaluation
    Scalar,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Bool(Var, BoolExpr),
    Compare {
        dst: Var,
        lhs: NumExpr,
        op: CmpOp,
        rhs: NumExpr,
        domain: CmpDomain,
    },
    Dom(Var, DomExpr),
    Num(Var, NumExpr),
    Lap {
        dst: Var,
        scale: Rational,
        mean: NumExpr,
    },
    DLap {
        dst: Var,
        scale: Rational,
        mean: NumExpr,
    },
    ExpMech {
        dst: Var,
        scale: Rational,
        table: String,
        args: Vec<DomExpr>,
    },
    Choose {
        dst: Var,
        scale: Rational,
        table: String,
        args: Vec<DomExpr>,
    },
    If(BoolExpr, Vec<Stmt>, Vec<Stmt>),
    While(BoolExpr, Vec<Stmt>),
    Exit,
}

/// Source line is informational only and ignored by equality.
#[derive(Clone, Debug)]
pub struct Stmt {
    pub label: String,
    pub kind: StmtKind,
    pub line: usize,
}

impl PartialEq for Stmt {
    fn eq(&self, o: &Self) -> bool {
        self.label == o.label && self.kind == o.kind
    }
}

impl Stmt {
    /// Variable written by this statement, if it is an assignment.
    pub fn target(&self) -> Option<Var> {
        match &self.kind {
            StmtKind::Bool(v, _) | StmtKind::Dom(v, _) | StmtKind::Num(v, _) => Some(*v),
            StmtKind::Compare { dst, .. }
            | StmtKind::Lap { dst, .. }
            | StmtKind::DLap { dst, .. }
            | StmtKind::ExpMech { dst, .. }
            | StmtKind::Choose { dst, .. } => Some(*dst),
            _ => None,
        }
    }

    pub fn is_sampling(&self) -> bool {
        matches!(
            self.kind,
            StmtKind::Lap { .. } | StmtKind::DLap { .. } | StmtKind::ExpMech { .. } | StmtKind::Choose { .. }
        )
    }
}

/// Exponential-mechanism scores: per argument tuple, `(candidate, F)` pairs.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ScoreTable {
    pub arity: usize,
    pub rows: BTreeMap<Vec<i64>, Vec<(i64, Rational)>>,
}

/// User distribution for `choose`: per argument tuple, `(value, p(eps))`
/// with the probability text kept for printing.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct DistTable {
    pub arity: usize,
    pub rows: BTreeMap<Vec<i64>, Vec<(i64, String, ExpRational)>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FnValue {
    Dom(i64),
    Bool(bool),
}

/// Finite user function into DOM or Bool.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FnTable {
    pub arity: usize,
    pub boolean: bool,
    pub rows: BTreeMap<Vec<i64>, FnValue>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub dom_bound: i64,
    pub vars: Vec<VarDecl>,
    pub body: Vec<Stmt>,
    pub scores: BTreeMap<String, ScoreTable>,
    pub dists: BTreeMap<String, DistTable>,
    pub funcs: BTreeMap<String, FnTable>,
}

impl Program {
    pub fn var(&self, name: &str) -> Option<Var> {
        self.vars.iter().position(|d| d.name == name)
    }

    pub fn name(&self, v: Var) -> &str {
        &self.vars[v].name
    }

    pub fn ty(&self, v: Var) -> Ty {
        self.vars[v].ty
    }

    pub fn inputs(&self) -> Vec<Var> {
        self.with_role(Role::Input)
    }

    pub fn outputs(&self) -> Vec<Var> {
        self.with_role(Role::Output)
    }

    fn with_role(&self, r: Role) -> Vec<Var> {
        (0..self.vars.len()).filter(|&v| self.vars[v].role == r).collect()
    }

    pub fn clamp(&self, x: i64) -> i64 {
        x.clamp(-self.dom_bound, self.dom_bound)
    }

    /// All statements in program order, nested ones included.
    pub fn statements(&self) -> Vec<&Stmt> {
        fn walk<'a>(b: &'a [Stmt], out: &mut Vec<&'a Stmt>) {
            for s in b {
                out.push(s);
                match &s.kind {
                    StmtKind::If(_, t, e) => {
                        walk(t, out);
                        walk(e, out);
                    }
                    StmtKind::While(_, body) => walk(body, out),
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.body, &mut out);
        out
    }

    pub fn is_deterministic(&self) -> bool {
        self.statements().iter().all(|s| !s.is_sampling())
    }
}

impl DomExpr {
    pub fn vars(&self, out: &mut Vec<Var>) {
        match self {
            DomExpr::Lit(_) => {}
            DomExpr::Var(v) => out.push(*v),
            DomExpr::Add(a, b) | DomExpr::Sub(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            DomExpr::Builtin(_, xs) | DomExpr::Table(_, xs) => xs.iter().for_each(|x| x.vars(out)),
        }
    }
}

impl NumExpr {
    pub fn vars(&self, out: &mut Vec<Var>) {
        match self {
            NumExpr::Var(v) => out.push(*v),
            NumExpr::Const(_) => {}
            NumExpr::Dom(d) => d.vars(out),
            NumExpr::Add(a, b) | NumExpr::Sub(a, b) | NumExpr::Mul(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            NumExpr::Neg(a) => a.vars(out),
        }
    }
}

impl BoolExpr {
    pub fn vars(&self, out: &mut Vec<Var>) {
        match self {
            BoolExpr::Lit(_) => {}
            BoolExpr::Var(v) => out.push(*v),
            BoolExpr::Not(a) => a.vars(out),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            BoolExpr::Builtin(_, xs) | BoolExpr::Table(_, xs) => xs.iter().for_each(|x| x.vars(out)),
        }
    }
}

impl StmtKind {
    /// Variables read by this statement (conditions only, for compound statements).
    pub fn reads(&self) -> Vec<Var> {
        let mut out = Vec::new();
        match self {
            StmtKind::Bool(_, e) => e.vars(&mut out),
            StmtKind::Compare { lhs, rhs, .. } => {
                lhs.vars(&mut out);
                rhs.vars(&mut out);
            }
            StmtKind::Dom(_, e) => e.vars(&mut out),
            StmtKind::Num(_, e) => e.vars(&mut out),
            StmtKind::Lap { mean, .. } | StmtKind::DLap { mean, .. } => mean.vars(&mut out),
            StmtKind::ExpMech { args, .. } | StmtKind::Choose { args, .. } => {
                args.iter().for_each(|a| a.vars(&mut out))
            }
            StmtKind::If(c, _, _) | StmtKind::While(c, _) => c.vars(&mut out),
            StmtKind::Exit => {}
        }
        out
    }
}
