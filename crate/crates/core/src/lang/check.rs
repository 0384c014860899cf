//! Static restrictions on typed programs.

use super::ast::*;
use crate::decide::{sign_on_positive_reals, DecideOptions, SignVerdict};
use crate::symexp::ExpRational;
use std::collections::{BTreeSet, HashSet};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    UniqueLabels,
    SingleAssignment,
    BoundedAssignments,
    NoRealIntMix,
    DefBeforeUse,
    DomRange,
    Tables,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::UniqueLabels => "unique labels",
            Rule::SingleAssignment => "single assignment",
            Rule::BoundedAssignments => "Bounded Assignments",
            Rule::NoRealIntMix => "real/integer separation",
            Rule::DefBeforeUse => "definition before use",
            Rule::DomRange => "DOM range",
            Rule::Tables => "tables",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub rule: Rule,
    pub label: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(l) => write!(f, "[{}] at {}: {}", self.rule.name(), l, self.message),
            None => write!(f, "[{}] {}", self.rule.name(), self.message),
        }
    }
}

pub fn check(p: &Program) -> Vec<Diagnostic> {
    let mut c = Checker { p, out: Vec::new() };
    c.labels();
    c.tables();
    c.assignments(&p.body, &mut HashSet::new(), false);
    let init: BTreeSet<Var> = p.inputs().into_iter().collect();
    c.uses(&p.body, init);
    for s in p.statements() {
        c.stmt_local(s);
    }
    c.out
}

struct Checker<'a> {
    p: &'a Program,
    out: Vec<Diagnostic>,
}

/// Iteration suffix of an unrolled label (`"5.2"` gives `"2"`).
fn instance(label: &str) -> &str {
    label.split_once('.').map_or("", |(_, s)| s)
}

impl Checker<'_> {
    fn diag(&mut self, rule: Rule, label: Option<&str>, message: String) {
        self.out.push(Diagnostic {
            rule,
            label: label.map(str::to_string),
            message,
        });
    }

    fn labels(&mut self) {
        let mut seen = HashSet::new();
        for s in self.p.statements() {
            if !seen.insert(s.label.clone()) {
                self.diag(Rule::UniqueLabels, Some(&s.label), "label used twice".into());
            }
        }
    }

    /// Path-sensitive at-most-once check. `assigned` holds the (variable,
    /// iteration instance) pairs assigned on some path reaching this point.
    /// Returns whether the block can fall through.
    fn assignments(&mut self, b: &[Stmt], assigned: &mut HashSet<(Var, String)>, in_while: bool) -> bool {
        for s in b {
            match &s.kind {
                StmtKind::If(_, t, e) => {
                    let mut a = assigned.clone();
                    let mut c = assigned.clone();
                    let ft = self.assignments(t, &mut a, in_while);
                    let fe = self.assignments(e, &mut c, in_while);
                    assigned.clear();
                    if ft {
                        assigned.extend(a);
                    }
                    if fe {
                        assigned.extend(c);
                    }
                    if !ft && !fe {
                        return false;
                    }
                }
                StmtKind::While(_, body) => {
                    let mut a = assigned.clone();
                    self.assignments(body, &mut a, true);
                    assigned.extend(a);
                }
                StmtKind::Exit => return false,
                _ => {
                    let Some(v) = s.target() else { continue };
                    if !matches!(self.p.ty(v), Ty::Real | Ty::Int) {
                        continue;
                    }
                    if in_while {
                        let m = format!(
                            "{} variable `{}` assigned inside a while loop",
                            self.p.ty(v).keyword(),
                            self.p.name(v)
                        );
                        self.diag(Rule::BoundedAssignments, Some(&s.label), m);
                    }
                    if self.p.vars[v].role == Role::Input {
                        let m = format!("input `{}` is assigned", self.p.name(v));
                        self.diag(Rule::SingleAssignment, Some(&s.label), m);
                    }
                    if !assigned.insert((v, instance(&s.label).to_string())) {
                        let m = format!("`{}` may be assigned twice", self.p.name(v));
                        self.diag(Rule::SingleAssignment, Some(&s.label), m);
                    }
                }
            }
        }
        true
    }

    /// Definite-assignment analysis; returns the set after the block, or
    /// `None` when the block never falls through.
    fn uses(&mut self, b: &[Stmt], mut def: BTreeSet<Var>) -> Option<BTreeSet<Var>> {
        for s in b {
            for v in s.kind.reads() {
                if !def.contains(&v) {
                    let m = format!("`{}` may be read before it is assigned", self.p.name(v));
                    if !self.out.iter().any(|d| d.rule == Rule::DefBeforeUse && d.message == m) {
                        self.diag(Rule::DefBeforeUse, Some(&s.label), m);
                    }
                }
            }
            match &s.kind {
                StmtKind::If(_, t, e) => {
                    let a = self.uses(t, def.clone());
                    let c = self.uses(e, def.clone());
                    def = match (a, c) {
                        (Some(a), Some(c)) => a.intersection(&c).copied().collect(),
                        (Some(a), None) => a,
                        (None, Some(c)) => c,
                        (None, None) => return None,
                    };
                }
                StmtKind::While(_, body) => {
                    self.uses(body, def.clone());
                }
                StmtKind::Exit => return None,
                _ => {
                    if let Some(v) = s.target() {
                        def.insert(v);
                    }
                }
            }
        }
        Some(def)
    }

    fn stmt_local(&mut self, s: &Stmt) {
        let mut lits = Vec::new();
        match &s.kind {
            StmtKind::Bool(_, e) | StmtKind::If(e, _, _) | StmtKind::While(e, _) => bool_lits(e, &mut lits),
            StmtKind::Dom(_, e) => dom_lits(e, &mut lits),
            StmtKind::Compare { dst, lhs, rhs, domain, .. } => {
                num_lits(lhs, &mut lits);
                num_lits(rhs, &mut lits);
                let (a, b) = (self.class(lhs), self.class(rhs));
                if (a == Some(Ty::Real) && b == Some(Ty::Int)) || (a == Some(Ty::Int) && b == Some(Ty::Real)) {
                    self.diag(Rule::NoRealIntMix, Some(&s.label), "comparison mixes real and integer expressions".into());
                }
                let want = match domain {
                    CmpDomain::Real => Some(Ty::Real),
                    CmpDomain::Int => Some(Ty::Int),
                    CmpDomain::Scalar => None,
                };
                if a.or(b) != want && a.and(b) != want {
                    self.diag(Rule::NoRealIntMix, Some(&s.label), "comparison kind does not match its operands".into());
                }
                if self.p.ty(*dst) != Ty::Bool {
                    self.diag(Rule::NoRealIntMix, Some(&s.label), "comparison stored in a non-Bool variable".into());
                }
            }
            StmtKind::Num(_, e) | StmtKind::Lap { mean: e, .. } | StmtKind::DLap { mean: e, .. } => {
                num_lits(e, &mut lits);
                self.mixing(e, &s.label);
            }
            StmtKind::ExpMech { args, .. } | StmtKind::Choose { args, .. } => {
                args.iter().for_each(|a| dom_lits(a, &mut lits))
            }
            StmtKind::Exit => {}
        }
        let n = self.p.dom_bound;
        for l in lits {
            if l < -n || l > n {
                self.diag(Rule::DomRange, Some(&s.label), format!("DOM literal {l} outside [-{n}, {n}]"));
            }
        }
    }

    fn mixing(&mut self, e: &NumExpr, label: &str) {
        let mut vs = Vec::new();
        e.vars(&mut vs);
        let real = vs.iter().any(|&v| self.p.ty(v) == Ty::Real);
        let int = vs.iter().any(|&v| self.p.ty(v) == Ty::Int);
        if real && int {
            self.diag(Rule::NoRealIntMix, Some(label), "expression mixes real and integer variables".into());
        }
    }

    /// Real, Int, or `None` for expressions free of random variables.
    fn class(&self, e: &NumExpr) -> Option<Ty> {
        let mut vs = Vec::new();
        e.vars(&mut vs);
        if vs.iter().any(|&v| self.p.ty(v) == Ty::Real) {
            Some(Ty::Real)
        } else if vs.iter().any(|&v| self.p.ty(v) == Ty::Int) {
            Some(Ty::Int)
        } else {
            None
        }
    }

    fn tables(&mut self) {
        let n = self.p.dom_bound;
        let in_range = |x: i64| -n <= x && x <= n;
        for (name, t) in &self.p.scores {
            for (args, es) in &t.rows {
                if es.is_empty() {
                    self.diag(Rule::Tables, None, format!("score table `{name}` has an empty row at {args:?}"));
                }
                if !args.iter().chain(es.iter().map(|(c, _)| c)).all(|&x| in_range(x)) {
                    self.diag(Rule::DomRange, None, format!("score table `{name}` row {args:?} leaves DOM"));
                }
            }
        }
        let opts = DecideOptions::default();
        for (name, t) in &self.p.dists {
            for (args, es) in &t.rows {
                if !args.iter().chain(es.iter().map(|(c, _, _)| c)).all(|&x| in_range(x)) {
                    self.diag(Rule::DomRange, None, format!("dist table `{name}` row {args:?} leaves DOM"));
                }
                let mut total = ExpRational::zero();
                for (v, txt, p) in es {
                    total = &total + p;
                    match sign_on_positive_reals(p, &opts) {
                        SignVerdict::NonNeg => {}
                        SignVerdict::FoundNeg { .. } => self.diag(
                            Rule::Tables,
                            None,
                            format!("dist table `{name}` row {args:?}: probability of {v} ({txt}) is negative somewhere"),
                        ),
                        SignVerdict::Unknown(why) => self.diag(
                            Rule::Tables,
                            None,
                            format!("dist table `{name}` row {args:?}: cannot certify {txt} >= 0 ({why})"),
                        ),
                    }
                }
                if !total.is_one() {
                    self.diag(
                        Rule::Tables,
                        None,
                        format!("dist table `{name}` row {args:?}: probabilities sum to {total}, not 1"),
                    );
                }
            }
        }
        for (name, t) in &self.p.funcs {
            for (args, v) in &t.rows {
                let ok = args.iter().all(|&x| in_range(x)) && !matches!(v, FnValue::Dom(x) if !in_range(*x));
                if !ok {
                    self.diag(Rule::DomRange, None, format!("table `{name}` row {args:?} leaves DOM"));
                }
            }
        }
    }
}

fn dom_lits(e: &DomExpr, out: &mut Vec<i64>) {
    match e {
        DomExpr::Lit(n) => out.push(*n),
        DomExpr::Var(_) => {}
        DomExpr::Add(a, b) | DomExpr::Sub(a, b) => {
            dom_lits(a, out);
            dom_lits(b, out);
        }
        DomExpr::Builtin(_, xs) | DomExpr::Table(_, xs) => xs.iter().for_each(|x| dom_lits(x, out)),
    }
}

fn num_lits(e: &NumExpr, out: &mut Vec<i64>) {
    match e {
        NumExpr::Dom(d) => dom_lits(d, out),
        NumExpr::Add(a, b) | NumExpr::Sub(a, b) | NumExpr::Mul(a, b) => {
            num_lits(a, out);
            num_lits(b, out);
        }
        NumExpr::Neg(a) => num_lits(a, out),
        _ => {}
    }
}

fn bool_lits(e: &BoolExpr, out: &mut Vec<i64>) {
    match e {
        BoolExpr::Not(a) => bool_lits(a, out),
        BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
            bool_lits(a, out);
            bool_lits(b, out);
        }
        BoolExpr::Builtin(_, xs) | BoolExpr::Table(_, xs) => xs.iter().for_each(|x| dom_lits(x, out)),
        _ => {}
    }
}
