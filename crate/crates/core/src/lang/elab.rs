//! Loop unrolling and typing of the parse tree.

use super::ast::*;
use super::syntax::{BinOp, PExpr, PProgram, PStmt, PStmtKind, PTable, PTableValue, Pos, TableKind};
use super::LangError;
use crate::symexp::ExpRational;
use crate::symexp::rational::{is_integer, Rational};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, HashMap, HashSet};

/// Upper limit on statements produced by unrolling.
const UNROLL_LIMIT: usize = 100_000;

pub fn unroll(body: &[PStmt]) -> Result<Vec<PStmt>, LangError> {
    let mut count = 0usize;
    unroll_block(body, &mut count)
}

fn unroll_block(body: &[PStmt], count: &mut usize) -> Result<Vec<PStmt>, LangError> {
    let mut out = Vec::new();
    for s in body {
        match &s.kind {
            PStmtKind::For(v, a, b, inner) => {
                for k in *a..=*b {
                    let sub: Vec<PStmt> = inner.iter().map(|t| instantiate(t, v, k)).collect();
                    out.extend(unroll_block(&sub, count)?);
                    if *count > UNROLL_LIMIT {
                        return Err(LangError::at(s.pos.line, s.pos.col, "for-loop unrolling too large"));
                    }
                }
            }
            PStmtKind::If(c, t, e) => {
                *count += 1;
                out.push(PStmt {
                    kind: PStmtKind::If(c.clone(), unroll_block(t, count)?, unroll_block(e, count)?),
                    ..s.clone()
                })
            }
            PStmtKind::While(c, t) => {
                *count += 1;
                out.push(PStmt {
                    kind: PStmtKind::While(c.clone(), unroll_block(t, count)?),
                    ..s.clone()
                })
            }
            _ => {
                *count += 1;
                out.push(s.clone())
            }
        }
    }
    Ok(out)
}

/// Copy of `s` for iteration `k` of the loop over `v`.
fn instantiate(s: &PStmt, v: &str, k: i64) -> PStmt {
    let e = |x: &PExpr| subst(x, v, k);
    let es = |xs: &[PExpr]| xs.iter().map(|x| subst(x, v, k)).collect::<Vec<_>>();
    let b = |xs: &[PStmt]| xs.iter().map(|x| instantiate(x, v, k)).collect::<Vec<_>>();
    let kind = match &s.kind {
        PStmtKind::Assign(l, r) => PStmtKind::Assign(e(l), e(r)),
        PStmtKind::Lap(l, a, m) => PStmtKind::Lap(e(l), e(a), e(m)),
        PStmtKind::DLap(l, a, m) => PStmtKind::DLap(e(l), e(a), e(m)),
        PStmtKind::ExpMech(l, a, t, xs) => PStmtKind::ExpMech(e(l), e(a), t.clone(), es(xs)),
        PStmtKind::Choose(l, a, t, xs) => PStmtKind::Choose(e(l), e(a), t.clone(), es(xs)),
        PStmtKind::If(c, t, f) => PStmtKind::If(e(c), b(t), b(f)),
        PStmtKind::While(c, t) => PStmtKind::While(e(c), b(t)),
        PStmtKind::For(w, lo, hi, t) if w != v => PStmtKind::For(w.clone(), *lo, *hi, b(t)),
        other => other.clone(),
    };
    PStmt {
        label: s.label.as_ref().map(|l| format!("{l}.{k}")),
        kind,
        pos: s.pos.clone(),
    }
}

fn subst(e: &PExpr, v: &str, k: i64) -> PExpr {
    let r = |x: &PExpr| Box::new(subst(x, v, k));
    match e {
        PExpr::Name(n) if n == v => PExpr::Num(Rational::from_integer(k.into()), true),
        PExpr::Index(n, i) => PExpr::Index(n.clone(), r(i)),
        PExpr::Call(f, xs) => PExpr::Call(f.clone(), xs.iter().map(|x| subst(x, v, k)).collect()),
        PExpr::Bin(op, a, b) => PExpr::Bin(*op, r(a), r(b)),
        PExpr::Neg(a) => PExpr::Neg(r(a)),
        PExpr::Not(a) => PExpr::Not(r(a)),
        other => other.clone(),
    }
}

/// Value of a variable-free arithmetic expression.
fn const_val(e: &PExpr) -> Option<Rational> {
    match e {
        PExpr::Num(v, _) => Some(v.clone()),
        PExpr::Neg(a) => const_val(a).map(|x| -x),
        PExpr::Bin(op, a, b) => {
            let (x, y) = (const_val(a)?, const_val(b)?);
            match op {
                BinOp::Add => Some(x + y),
                BinOp::Sub => Some(x - y),
                BinOp::Mul => Some(x * y),
                BinOp::Div if !y.is_zero() => Some(x / y),
                _ => None,
            }
        }
        _ => None,
    }
}

/// `c` such that `e = c * eps`.
fn eps_scale(e: &PExpr) -> Option<Rational> {
    fn go(e: &PExpr) -> Option<(Rational, u32)> {
        match e {
            PExpr::Num(v, _) => Some((v.clone(), 0)),
            PExpr::Eps => Some((Rational::one(), 1)),
            PExpr::Neg(a) => go(a).map(|(c, p)| (-c, p)),
            PExpr::Bin(BinOp::Mul, a, b) => {
                let (x, p) = go(a)?;
                let (y, q) = go(b)?;
                Some((x * y, p + q))
            }
            PExpr::Bin(BinOp::Div, a, b) => {
                let (x, p) = go(a)?;
                let (y, q) = go(b)?;
                (q == 0 && !y.is_zero()).then(|| (x / y, p))
            }
            PExpr::Bin(op @ (BinOp::Add | BinOp::Sub), a, b) => {
                let (x, p) = go(a)?;
                let (y, q) = go(b)?;
                (p == q).then(|| (if *op == BinOp::Add { x + y } else { x - y }, p))
            }
            _ => None,
        }
    }
    match go(e)? {
        (c, 1) if c.is_positive() => Some(c),
        _ => None,
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Class {
    Scalar,
    Real,
    Int,
}

struct Elab<'a> {
    names: HashMap<String, Var>,
    vars: Vec<VarDecl>,
    scores: &'a BTreeMap<String, ScoreTable>,
    dists: &'a BTreeMap<String, DistTable>,
    funcs: &'a BTreeMap<String, FnTable>,
    labels: HashSet<String>,
    pos: Pos,
}

pub fn elaborate(p: PProgram) -> Result<Program, LangError> {
    let dom_bound = p.dom.unwrap_or(1);
    let mut vars = Vec::new();
    let mut names = HashMap::new();
    for d in &p.decls {
        let ty = match d.ty.as_str() {
            "real" => Ty::Real,
            "int" => Ty::Int,
            "bool" => Ty::Bool,
            _ => Ty::Dom,
        };
        if d.role != Role::Local && matches!(ty, Ty::Bool | Ty::Int) {
            return Err(LangError::at(
                d.pos.line,
                d.pos.col,
                format!("inputs and outputs must be dom or real, `{}` is {}", d.name, d.ty),
            ));
        }
        let elems: Vec<String> = match d.len {
            None => vec![d.name.clone()],
            Some(n) => (1..=n).map(|i| format!("{}[{i}]", d.name)).collect(),
        };
        for name in elems {
            if names.insert(name.clone(), vars.len()).is_some() {
                return Err(LangError::at(d.pos.line, d.pos.col, format!("variable `{name}` declared twice")));
            }
            vars.push(VarDecl { name, ty, role: d.role });
        }
    }
    let (scores, dists, funcs) = tables(&p.tables)?;
    let mut raw = p.body.clone();
    let mut used = HashSet::new();
    raw_labels(&raw, &mut used);
    let mut counter = 0usize;
    autolabel(&mut raw, &mut used, &mut counter);
    let body = unroll(&raw)?;
    let mut labels = HashSet::new();
    collect_labels(&body, &mut labels)?;
    let mut el = Elab {
        names,
        vars,
        scores: &scores,
        dists: &dists,
        funcs: &funcs,
        labels,
        pos: Pos { line: 1, col: 1 },
    };
    let body = el.block(&body, &mut counter)?;
    Ok(Program {
        dom_bound,
        vars: el.vars,
        body,
        scores,
        dists,
        funcs,
    })
}

fn raw_labels(b: &[PStmt], out: &mut HashSet<String>) {
    for s in b {
        if let Some(l) = &s.label {
            out.insert(l.clone());
        }
        match &s.kind {
            PStmtKind::If(_, t, e) => {
                raw_labels(t, out);
                raw_labels(e, out);
            }
            PStmtKind::While(_, t) | PStmtKind::For(_, _, _, t) => raw_labels(t, out),
            _ => {}
        }
    }
}

/// Labels `s1, s2, ...` for unlabeled statements, before unrolling so that
/// loop copies share a base label.
fn autolabel(b: &mut [PStmt], used: &mut HashSet<String>, counter: &mut usize) {
    for s in b {
        if s.label.is_none() && !matches!(s.kind, PStmtKind::For(..)) {
            s.label = Some(fresh(used, counter));
        }
        match &mut s.kind {
            PStmtKind::If(_, t, e) => {
                autolabel(t, used, counter);
                autolabel(e, used, counter);
            }
            PStmtKind::While(_, t) | PStmtKind::For(_, _, _, t) => autolabel(t, used, counter),
            _ => {}
        }
    }
}

fn fresh(used: &mut HashSet<String>, counter: &mut usize) -> String {
    loop {
        *counter += 1;
        let l = format!("s{counter}");
        if used.insert(l.clone()) {
            return l;
        }
    }
}

fn collect_labels(b: &[PStmt], seen: &mut HashSet<String>) -> Result<(), LangError> {
    for s in b {
        if let Some(l) = &s.label {
            if !seen.insert(l.clone()) {
                return Err(LangError::at(s.pos.line, s.pos.col, format!("duplicate label `{l}`")));
            }
        }
        match &s.kind {
            PStmtKind::If(_, t, e) => {
                collect_labels(t, seen)?;
                collect_labels(e, seen)?;
            }
            PStmtKind::While(_, t) => collect_labels(t, seen)?,
            _ => {}
        }
    }
    Ok(())
}

type Tables = (
    BTreeMap<String, ScoreTable>,
    BTreeMap<String, DistTable>,
    BTreeMap<String, FnTable>,
);

fn tables(ts: &[PTable]) -> Result<Tables, LangError> {
    let mut scores = BTreeMap::new();
    let mut dists = BTreeMap::new();
    let mut funcs = BTreeMap::new();
    let mut seen = HashSet::new();
    for t in ts {
        let fail = |msg: String| LangError::at(t.pos.line, t.pos.col, msg);
        if !seen.insert(t.name.clone()) {
            return Err(fail(format!("table `{}` declared twice", t.name)));
        }
        if ["EQ", "LT", "LE", "MIN", "MAX", "ADD", "SUB"].contains(&t.name.as_str()) {
            return Err(fail(format!("`{}` is a built-in function", t.name)));
        }
        let arity = t.rows.first().map_or(0, |r| r.args.len());
        let int_of = |e: &PExpr, what: &str| -> Result<i64, LangError> {
            const_val(e)
                .filter(is_integer)
                .and_then(|v| v.to_integer().to_i64())
                .ok_or_else(|| LangError::at(t.pos.line, t.pos.col, format!("{what} in table `{}` must be an integer", t.name)))
        };
        let mut keys = HashSet::new();
        let mut score = ScoreTable { arity, ..Default::default() };
        let mut dist = DistTable { arity, ..Default::default() };
        let mut func = FnTable { arity, ..Default::default() };
        for (ri, row) in t.rows.iter().enumerate() {
            let rfail = |msg: String| LangError::at(row.pos.line, row.pos.col, msg);
            if row.args.len() != arity {
                return Err(rfail(format!("rows of table `{}` have different arities", t.name)));
            }
            let key: Vec<i64> = row.args.iter().map(|a| int_of(a, "argument")).collect::<Result<_, _>>()?;
            if !keys.insert(key.clone()) {
                return Err(rfail(format!("table `{}` has two rows for the same arguments", t.name)));
            }
            match t.kind {
                TableKind::Score => {
                    let mut es = Vec::new();
                    for (c, v) in &row.entries {
                        let cand = int_of(c.as_ref().unwrap(), "candidate")?;
                        let PTableValue::Expr(v) = v else { unreachable!() };
                        let s = const_val(v).ok_or_else(|| rfail("score must be a rational constant".into()))?;
                        if es.iter().any(|(x, _)| *x == cand) {
                            return Err(rfail(format!("candidate {cand} listed twice")));
                        }
                        es.push((cand, s));
                    }
                    score.rows.insert(key, es);
                }
                TableKind::Dist => {
                    let mut es = Vec::new();
                    for (c, v) in &row.entries {
                        let cand = int_of(c.as_ref().unwrap(), "value")?;
                        let PTableValue::Text(txt) = v else { unreachable!() };
                        let p = ExpRational::parse(txt)
                            .map_err(|e| rfail(format!("bad probability `{txt}`: {e}")))?;
                        if es.iter().any(|(x, _, _)| *x == cand) {
                            return Err(rfail(format!("value {cand} listed twice")));
                        }
                        es.push((cand, txt.clone(), p));
                    }
                    dist.rows.insert(key, es);
                }
                TableKind::Func => {
                    let PTableValue::Expr(v) = &row.entries[0].1 else { unreachable!() };
                    let val = match v {
                        PExpr::True => FnValue::Bool(true),
                        PExpr::False => FnValue::Bool(false),
                        e => FnValue::Dom(int_of(e, "value")?),
                    };
                    let b = matches!(val, FnValue::Bool(_));
                    if ri == 0 {
                        func.boolean = b;
                    } else if func.boolean != b {
                        return Err(rfail(format!("table `{}` mixes Bool and DOM values", t.name)));
                    }
                    func.rows.insert(key, val);
                }
            }
        }
        match t.kind {
            TableKind::Score => drop(scores.insert(t.name.clone(), score)),
            TableKind::Dist => drop(dists.insert(t.name.clone(), dist)),
            TableKind::Func => drop(funcs.insert(t.name.clone(), func)),
        }
    }
    Ok((scores, dists, funcs))
}

impl Elab<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, LangError> {
        Err(LangError::at(self.pos.line, self.pos.col, msg.into()))
    }

    fn fresh_label(&mut self, counter: &mut usize) -> String {
        fresh(&mut self.labels, counter)
    }

    fn block(&mut self, b: &[PStmt], counter: &mut usize) -> Result<Vec<Stmt>, LangError> {
        let mut out = Vec::new();
        for s in b {
            self.pos = s.pos.clone();
            let label = match &s.label {
                Some(l) => l.clone(),
                None => self.fresh_label(counter),
            };
            let kind = self.stmt(&s.kind, counter)?;
            out.push(Stmt {
                label,
                kind,
                line: s.pos.line,
            });
        }
        Ok(out)
    }

    fn resolve(&self, e: &PExpr) -> Result<Var, LangError> {
        let name = match e {
            PExpr::Name(n) => n.clone(),
            PExpr::Index(n, i) => {
                let Some(k) = const_val(i).filter(is_integer) else {
                    return self.err(format!("index of `{n}` must be a constant integer"));
                };
                format!("{n}[{k}]")
            }
            _ => return self.err("expected a variable"),
        };
        match self.names.get(&name) {
            Some(v) => Ok(*v),
            None => self.err(format!("undeclared variable `{name}`")),
        }
    }

    fn stmt(&mut self, k: &PStmtKind, counter: &mut usize) -> Result<StmtKind, LangError> {
        Ok(match k {
            PStmtKind::Assign(l, r) => {
                let dst = self.resolve(l)?;
                match self.vars[dst].ty {
                    Ty::Bool => self.bool_assign(dst, r)?,
                    Ty::Dom => StmtKind::Dom(dst, self.dom(r)?),
                    Ty::Real => {
                        let (e, c) = self.num(r)?;
                        if c == Class::Int {
                            return self.err(format!(
                                "real variable `{}` assigned an integer expression",
                                self.vars[dst].name
                            ));
                        }
                        StmtKind::Num(dst, e)
                    }
                    Ty::Int => {
                        let (e, c) = self.num(r)?;
                        if c == Class::Real || !integral(&e) {
                            return self.err(format!(
                                "integer variable `{}` assigned a non-integer expression",
                                self.vars[dst].name
                            ));
                        }
                        StmtKind::Num(dst, e)
                    }
                }
            }
            PStmtKind::Lap(l, a, m) | PStmtKind::DLap(l, a, m) => {
                let lap = matches!(k, PStmtKind::Lap(..));
                let dst = self.resolve(l)?;
                let want = if lap { Ty::Real } else { Ty::Int };
                if self.vars[dst].ty != want {
                    return self.err(format!(
                        "{} samples must be stored in {} variables",
                        if lap { "Lap" } else { "DLap" },
                        want.keyword()
                    ));
                }
                let scale = self.scale(a)?;
                let (mean, c) = self.num(m)?;
                if lap && c == Class::Int {
                    return self.err("Lap mean must be a real expression");
                }
                if !lap && (c == Class::Real || !integral(&mean)) {
                    return self.err("DLap mean must be an integer expression");
                }
                if lap {
                    StmtKind::Lap { dst, scale, mean }
                } else {
                    StmtKind::DLap { dst, scale, mean }
                }
            }
            PStmtKind::ExpMech(l, a, t, xs) | PStmtKind::Choose(l, a, t, xs) => {
                let em = matches!(k, PStmtKind::ExpMech(..));
                let dst = self.resolve(l)?;
                if self.vars[dst].ty != Ty::Dom {
                    return self.err("sampled DOM values must be stored in dom variables");
                }
                let scale = self.scale(a)?;
                let arity = if em {
                    self.scores.get(t).map(|s| s.arity)
                } else {
                    self.dists.get(t).map(|s| s.arity)
                };
                let Some(arity) = arity else {
                    return self.err(format!(
                        "unknown {} table `{t}`",
                        if em { "score" } else { "dist" }
                    ));
                };
                if arity != xs.len() && !self.table_empty(t, em) {
                    return self.err(format!("table `{t}` expects {arity} arguments"));
                }
                let args = xs.iter().map(|x| self.dom(x)).collect::<Result<Vec<_>, _>>()?;
                if em {
                    StmtKind::ExpMech {
                        dst,
                        scale,
                        table: t.clone(),
                        args,
                    }
                } else {
                    StmtKind::Choose {
                        dst,
                        scale,
                        table: t.clone(),
                        args,
                    }
                }
            }
            PStmtKind::If(c, t, e) => {
                let c = self.boolean(c)?;
                StmtKind::If(c, self.block(t, counter)?, self.block(e, counter)?)
            }
            PStmtKind::While(c, t) => {
                let c = self.boolean(c)?;
                StmtKind::While(c, self.block(t, counter)?)
            }
            PStmtKind::Exit => StmtKind::Exit,
            PStmtKind::For(..) => unreachable!("loops are unrolled before typing"),
        })
    }

    fn table_empty(&self, t: &str, em: bool) -> bool {
        if em {
            self.scores[t].rows.is_empty()
        } else {
            self.dists[t].rows.is_empty()
        }
    }

    fn scale(&self, a: &PExpr) -> Result<Rational, LangError> {
        match eps_scale(a) {
            Some(c) => Ok(c),
            None => self.err("noise parameter must have the form a*eps with rational a > 0"),
        }
    }

    fn bool_assign(&self, dst: Var, r: &PExpr) -> Result<StmtKind, LangError> {
        if let PExpr::Bin(op, a, b) = r {
            if op.is_cmp() {
                if let (Ok(_), Ok(_)) = (self.dom(a), self.dom(b)) {
                    return Ok(StmtKind::Bool(dst, self.boolean(r)?));
                }
                let (lhs, ca) = self.num(a)?;
                let (rhs, cb) = self.num(b)?;
                let domain = match (ca, cb) {
                    (Class::Real, Class::Int) | (Class::Int, Class::Real) => {
                        return self.err("comparison of a real expression with an integer expression")
                    }
                    (Class::Real, _) | (_, Class::Real) => CmpDomain::Real,
                    (Class::Int, _) | (_, Class::Int) => CmpDomain::Int,
                    _ => CmpDomain::Scalar,
                };
                let op = match op {
                    BinOp::Lt => CmpOp::Lt,
                    BinOp::Le => CmpOp::Le,
                    BinOp::Gt => CmpOp::Gt,
                    BinOp::Ge => CmpOp::Ge,
                    BinOp::Eq => CmpOp::Eq,
                    _ => return self.err("`!=` is not a comparison of numeric expressions; use not(...)"),
                };
                return Ok(StmtKind::Compare {
                    dst,
                    lhs,
                    op,
                    rhs,
                    domain,
                });
            }
        }
        Ok(StmtKind::Bool(dst, self.boolean(r)?))
    }

    fn boolean(&self, e: &PExpr) -> Result<BoolExpr, LangError> {
        Ok(match e {
            PExpr::True => BoolExpr::Lit(true),
            PExpr::False => BoolExpr::Lit(false),
            PExpr::Name(_) | PExpr::Index(..) => {
                let v = self.resolve(e)?;
                if self.vars[v].ty != Ty::Bool {
                    return self.err(format!("`{}` is not a Bool variable", self.vars[v].name));
                }
                BoolExpr::Var(v)
            }
            PExpr::Not(a) => BoolExpr::Not(Box::new(self.boolean(a)?)),
            PExpr::Call(f, xs) if f == "not" && xs.len() == 1 => BoolExpr::Not(Box::new(self.boolean(&xs[0])?)),
            PExpr::Bin(BinOp::And, a, b) => BoolExpr::And(Box::new(self.boolean(a)?), Box::new(self.boolean(b)?)),
            PExpr::Bin(BinOp::Or, a, b) => BoolExpr::Or(Box::new(self.boolean(a)?), Box::new(self.boolean(b)?)),
            PExpr::Bin(op, a, b) if op.is_cmp() => {
                let (x, y) = match (self.dom(a), self.dom(b)) {
                    (Ok(x), Ok(y)) => (x, y),
                    _ => {
                        return self.err(
                            "comparisons of real or integer expressions must be assigned to a Bool variable",
                        )
                    }
                };
                let call = |f, p: DomExpr, q: DomExpr| BoolExpr::Builtin(f, vec![p, q]);
                match op {
                    BinOp::Lt => call(BoolFn::Lt, x, y),
                    BinOp::Le => call(BoolFn::Le, x, y),
                    BinOp::Gt => call(BoolFn::Lt, y, x),
                    BinOp::Ge => call(BoolFn::Le, y, x),
                    BinOp::Eq => call(BoolFn::Eq, x, y),
                    _ => BoolExpr::Not(Box::new(call(BoolFn::Eq, x, y))),
                }
            }
            PExpr::Call(f, xs) => {
                let b = match f.as_str() {
                    "EQ" => Some(BoolFn::Eq),
                    "LT" => Some(BoolFn::Lt),
                    "LE" => Some(BoolFn::Le),
                    _ => None,
                };
                let args = xs.iter().map(|x| self.dom(x)).collect::<Result<Vec<_>, _>>()?;
                match b {
                    Some(b) => {
                        if args.len() != 2 {
                            return self.err(format!("`{f}` takes two arguments"));
                        }
                        BoolExpr::Builtin(b, args)
                    }
                    None => match self.funcs.get(f) {
                        Some(t) if t.boolean => {
                            if t.arity != args.len() {
                                return self.err(format!("table `{f}` expects {} arguments", t.arity));
                            }
                            BoolExpr::Table(f.clone(), args)
                        }
                        _ => return self.err(format!("unknown Bool function `{f}`")),
                    },
                }
            }
            _ => return self.err("expected a Bool expression"),
        })
    }

    fn dom(&self, e: &PExpr) -> Result<DomExpr, LangError> {
        Ok(match e {
            PExpr::Num(v, true) => match v.to_integer().to_i64() {
                Some(n) => DomExpr::Lit(n),
                None => return self.err("DOM literal out of range"),
            },
            PExpr::Num(..) => return self.err("DOM values are integers"),
            PExpr::Name(_) | PExpr::Index(..) => {
                let v = self.resolve(e)?;
                if self.vars[v].ty != Ty::Dom {
                    return self.err(format!("`{}` is not a DOM variable", self.vars[v].name));
                }
                DomExpr::Var(v)
            }
            PExpr::Bin(BinOp::Add, a, b) => DomExpr::Add(Box::new(self.dom(a)?), Box::new(self.dom(b)?)),
            PExpr::Bin(BinOp::Sub, a, b) => DomExpr::Sub(Box::new(self.dom(a)?), Box::new(self.dom(b)?)),
            PExpr::Call(f, xs) => {
                let args = xs.iter().map(|x| self.dom(x)).collect::<Result<Vec<_>, _>>()?;
                let b = match f.as_str() {
                    "MIN" => Some(DomFn::Min),
                    "MAX" => Some(DomFn::Max),
                    "ADD" => Some(DomFn::Add),
                    "SUB" => Some(DomFn::Sub),
                    _ => None,
                };
                match b {
                    Some(b) => {
                        if args.len() != 2 {
                            return self.err(format!("`{f}` takes two arguments"));
                        }
                        DomExpr::Builtin(b, args)
                    }
                    None => match self.funcs.get(f) {
                        Some(t) if !t.boolean => {
                            if t.arity != args.len() {
                                return self.err(format!("table `{f}` expects {} arguments", t.arity));
                            }
                            DomExpr::Table(f.clone(), args)
                        }
                        _ => return self.err(format!("unknown DOM function `{f}`")),
                    },
                }
            }
            _ => return self.err("expected a DOM expression"),
        })
    }

    fn num(&self, e: &PExpr) -> Result<(NumExpr, Class), LangError> {
        if let Some(v) = const_val(e) {
            return Ok((NumExpr::Const(v), Class::Scalar));
        }
        Ok(match e {
            PExpr::Name(_) | PExpr::Index(..) => {
                let v = self.resolve(e)?;
                match self.vars[v].ty {
                    Ty::Real => (NumExpr::Var(v), Class::Real),
                    Ty::Int => (NumExpr::Var(v), Class::Int),
                    Ty::Dom => (NumExpr::Dom(DomExpr::Var(v)), Class::Scalar),
                    Ty::Bool => return self.err(format!("Bool variable `{}` in a numeric expression", self.vars[v].name)),
                }
            }
            PExpr::Call(..) => (NumExpr::Dom(self.dom(e)?), Class::Scalar),
            PExpr::Neg(a) => {
                let (x, c) = self.num(a)?;
                (NumExpr::Neg(Box::new(x)), c)
            }
            PExpr::Bin(op @ (BinOp::Add | BinOp::Sub), a, b) => {
                let (x, p) = self.num(a)?;
                let (y, q) = self.num(b)?;
                let c = match (p, q) {
                    (Class::Real, Class::Int) | (Class::Int, Class::Real) => {
                        return self.err("real and integer expressions cannot be combined")
                    }
                    (Class::Scalar, c) | (c, Class::Scalar) => c,
                    (c, _) => c,
                };
                let (x, y) = (Box::new(x), Box::new(y));
                (if *op == BinOp::Add { NumExpr::Add(x, y) } else { NumExpr::Sub(x, y) }, c)
            }
            PExpr::Bin(BinOp::Mul, a, b) => {
                let (x, p) = self.num(a)?;
                let (y, q) = self.num(b)?;
                let c = match (p, q) {
                    (Class::Scalar, c) | (c, Class::Scalar) => c,
                    _ => return self.err("product of two random expressions"),
                };
                (NumExpr::Mul(Box::new(x), Box::new(y)), c)
            }
            PExpr::Bin(BinOp::Div, a, b) => {
                let Some(d) = const_val(b).filter(|d| !d.is_zero()) else {
                    return self.err("division only by a nonzero constant");
                };
                let (x, p) = self.num(a)?;
                (NumExpr::Mul(Box::new(x), Box::new(NumExpr::Const(d.recip()))), p)
            }
            PExpr::Eps => return self.err("`eps` may only appear in noise parameters"),
            _ => return self.err("expected a numeric expression"),
        })
    }
}

/// All constants integral, so the expression denotes an integer.
fn integral(e: &NumExpr) -> bool {
    match e {
        NumExpr::Const(c) => is_integer(c),
        NumExpr::Var(_) | NumExpr::Dom(_) => true,
        NumExpr::Neg(a) => integral(a),
        NumExpr::Add(a, b) | NumExpr::Sub(a, b) | NumExpr::Mul(a, b) => integral(a) && integral(b),
    }
}
