//! Finite parametric DTMC of a program at a fixed input, and exact
//! probabilities of output events.

mod event;

pub use event::{parse_event, EventComponent, OutAtom, OutputEvent};

use crate::integrator::{joint_probability, Entailment, IntegrationError, LinForm, NoiseKind, Region, RegionStatus, SampleRecord, VarId};
use crate::lang::eval::{comparison_constraint, compare_values, eval_args, eval_bool, eval_dom, num_linform, EvalError};
use crate::lang::{BoolExpr, OutValue, Program, Role, StmtKind, Stmt, Ty, Var};
use crate::symexp::rational::Rational;
use crate::symexp::{ExpRational, LaurentExpPoly, SymError};
use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt::Write;

/// Program counter of terminated states.
pub const EXIT: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SemError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("state space exceeds {0} states")]
    StateCap(usize),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error("absorption system is singular: {0}")]
    Singular(String),
    #[error("{0}")]
    Input(String),
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub state_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { state_cap: 200_000 }
    }
}

/// Symbolic state. Sample `i` has variable id `i`; `defs` holds the linear
/// forms of real and integer variables over the samples.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymState {
    pub pc: usize,
    pub bools: Vec<Option<bool>>,
    pub doms: Vec<Option<i64>>,
    pub samples: Vec<SampleRecord>,
    pub defs: Vec<Option<LinForm>>,
    pub constraints: Region,
}

impl SymState {
    fn is_int(&self, v: VarId) -> bool {
        self.samples.get(v).is_some_and(|s| s.kind == NoiseKind::DLap)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EdgeProb {
    /// deterministic step
    One,
    /// comparison split: conditional probability of the target's constraints
    Split,
    /// DOM sampling
    Discrete(ExpRational),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub to: usize,
    pub prob: EdgeProb,
}

#[derive(Clone, Debug)]
enum Instr {
    Step(StmtKind, usize),
    Branch(BoolExpr, usize, usize),
    Exit,
}

#[derive(Clone, Debug)]
pub struct ParamDtmc {
    pub program: Program,
    pub states: Vec<SymState>,
    pub edges: Vec<Vec<Edge>>,
    pub initial: usize,
    labels: Vec<String>,
}

impl ParamDtmc {
    pub fn label(&self, s: usize) -> &str {
        match self.states[s].pc {
            EXIT => "EXIT",
            pc => &self.labels[pc],
        }
    }

    pub fn exits(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.states.len()).filter(|&s| self.states[s].pc == EXIT)
    }

    /// Line-oriented dump: one `state` line per state and one `edge` line per
    /// transition.
    pub fn dump(&self) -> String {
        let p = &self.program;
        let mut out = String::new();
        let xn = |v: VarId| format!("x{v}");
        for (i, s) in self.states.iter().enumerate() {
            let mut vals = Vec::new();
            for (v, b) in s.bools.iter().enumerate() {
                if let Some(b) = b {
                    vals.push(format!("{}={b}", p.name(v)));
                }
            }
            for (v, d) in s.doms.iter().enumerate() {
                if let Some(d) = d {
                    vals.push(format!("{}={d}", p.name(v)));
                }
            }
            for (v, l) in s.defs.iter().enumerate() {
                if let Some(l) = l {
                    vals.push(format!("{}={}", p.name(v), l.fmt_with(&xn)));
                }
            }
            let samples: Vec<String> = s
                .samples
                .iter()
                .map(|r| {
                    let k = if r.kind == NoiseKind::Lap { "Lap" } else { "DLap" };
                    format!("x{}~{k}({}*eps, {})", r.var, r.scale, r.mean.fmt_with(&xn))
                })
                .collect();
            writeln!(
                out,
                "state {i} {} [{}] samples [{}] where {}",
                self.label(i),
                vals.join(", "),
                samples.join(", "),
                s.constraints.fmt_with(&xn)
            )
            .unwrap();
        }
        for (i, es) in self.edges.iter().enumerate() {
            for e in es {
                let w = match &e.prob {
                    EdgeProb::One => "1".to_string(),
                    EdgeProb::Split => "split".to_string(),
                    EdgeProb::Discrete(q) => q.to_string(),
                };
                writeln!(out, "edge {i} -> {} {w}", e.to).unwrap();
            }
        }
        out
    }
}

fn compile(b: &[Stmt], cont: usize, code: &mut Vec<Instr>, labels: &mut Vec<String>) -> usize {
    let mut next = cont;
    for s in b.iter().rev() {
        next = match &s.kind {
            StmtKind::If(c, t, e) => {
                let t = compile(t, next, code, labels);
                let e = compile(e, next, code, labels);
                emit(Instr::Branch(c.clone(), t, e), &s.label, code, labels)
            }
            StmtKind::While(c, body) => {
                let at = emit(Instr::Exit, &s.label, code, labels);
                let start = compile(body, at, code, labels);
                code[at] = Instr::Branch(c.clone(), start, next);
                at
            }
            StmtKind::Exit => emit(Instr::Exit, &s.label, code, labels),
            k => emit(Instr::Step(k.clone(), next), &s.label, code, labels),
        };
    }
    next
}

fn emit(i: Instr, label: &str, code: &mut Vec<Instr>, labels: &mut Vec<String>) -> usize {
    code.push(i);
    labels.push(label.to_string());
    code.len() - 1
}

/// Parametric DTMC of `p` at `input` (every input must be given).
pub fn build_dtmc(p: &Program, input: &[(Var, OutValue)], opts: &BuildOptions) -> Result<ParamDtmc, SemError> {
    let mut code = Vec::new();
    let mut labels = Vec::new();
    let entry = compile(&p.body, EXIT, &mut code, &mut labels);
    let n = p.vars.len();
    let mut init = SymState {
        pc: entry,
        bools: vec![None; n],
        doms: vec![None; n],
        samples: Vec::new(),
        defs: vec![None; n],
        constraints: Region::full(),
    };
    for v in p.inputs() {
        let Some((_, x)) = input.iter().find(|(w, _)| *w == v) else {
            return Err(SemError::Input(format!("no value for input `{}`", p.name(v))));
        };
        match (p.ty(v), x) {
            (Ty::Real, OutValue::Real(r)) => init.defs[v] = Some(LinForm::constant(r.clone())),
            (Ty::Dom, OutValue::Dom(d)) if p.clamp(*d) == *d => init.doms[v] = Some(*d),
            _ => return Err(SemError::Input(format!("bad value {x:?} for input `{}`", p.name(v)))),
        }
    }

    let mut b = Builder {
        p,
        code: &code,
        index: HashMap::new(),
        states: Vec::new(),
        edges: Vec::new(),
        cap: opts.state_cap,
    };
    let initial = b.intern(init)?;
    let mut next = 0;
    while next < b.states.len() {
        let succ = b.step(&b.states[next].clone())?;
        let mut es: Vec<Edge> = Vec::new();
        for (st, prob) in succ {
            let to = b.intern(st)?;
            match (es.iter_mut().find(|e| e.to == to), &prob) {
                (Some(e), EdgeProb::Discrete(q)) => {
                    if let EdgeProb::Discrete(w) = &mut e.prob {
                        *w = &*w + q;
                    }
                }
                _ => es.push(Edge { to, prob }),
            }
        }
        b.edges.push(es);
        next += 1;
    }
    log::debug!("dtmc: {} states", b.states.len());
    Ok(ParamDtmc {
        program: p.clone(),
        states: b.states,
        edges: b.edges,
        initial,
        labels,
    })
}

struct Builder<'a> {
    p: &'a Program,
    code: &'a [Instr],
    index: HashMap<SymState, usize>,
    states: Vec<SymState>,
    edges: Vec<Vec<Edge>>,
    cap: usize,
}

impl Builder<'_> {
    fn intern(&mut self, s: SymState) -> Result<usize, SemError> {
        if let Some(&i) = self.index.get(&s) {
            return Ok(i);
        }
        if self.states.len() >= self.cap {
            return Err(SemError::StateCap(self.cap));
        }
        self.states.push(s.clone());
        self.index.insert(s, self.states.len() - 1);
        Ok(self.states.len() - 1)
    }

    fn step(&self, st: &SymState) -> Result<Vec<(SymState, EdgeProb)>, SemError> {
        let p = self.p;
        if st.pc == EXIT {
            return Ok(Vec::new());
        }
        let doms = |v: Var| st.doms[v];
        let bools = |v: Var| st.bools[v];
        let nums = |v: Var| st.defs[v].clone();
        let det = |f: &dyn Fn(&mut SymState), pc: usize| {
            let mut s = st.clone();
            f(&mut s);
            s.pc = pc;
            vec![(s, EdgeProb::One)]
        };
        let (kind, next) = match &self.code[st.pc] {
            Instr::Exit => return Ok(det(&|_| {}, EXIT)),
            Instr::Branch(c, t, e) => {
                let to = if eval_bool(p, c, &bools, &doms)? { *t } else { *e };
                return Ok(det(&|_| {}, to));
            }
            Instr::Step(k, next) => (k, *next),
        };
        Ok(match kind {
            StmtKind::Bool(v, e) => {
                let x = eval_bool(p, e, &bools, &doms)?;
                det(&|s| s.bools[*v] = Some(x), next)
            }
            StmtKind::Dom(v, e) => {
                let x = eval_dom(p, e, &doms)?;
                det(&|s| s.doms[*v] = Some(x), next)
            }
            StmtKind::Num(v, e) => {
                let l = num_linform(p, e, &nums, &doms)?;
                det(&|s| s.defs[*v] = Some(l.clone()), next)
            }
            StmtKind::Lap { dst, scale, mean } | StmtKind::DLap { dst, scale, mean } => {
                let m = num_linform(p, mean, &nums, &doms)?;
                let id = st.samples.len();
                let rec = if matches!(kind, StmtKind::Lap { .. }) {
                    SampleRecord::lap(id, scale.clone(), m)
                } else {
                    SampleRecord::dlap(id, scale.clone(), m)
                };
                det(
                    &|s| {
                        s.samples.push(rec.clone());
                        s.defs[*dst] = Some(LinForm::var(id));
                    },
                    next,
                )
            }
            StmtKind::Compare { dst, lhs, op, rhs, .. } => {
                let l = num_linform(p, lhs, &nums, &doms)?;
                let r = num_linform(p, rhs, &nums, &doms)?;
                if l.is_constant() && r.is_constant() {
                    let x = compare_values(&l.constant, *op, &r.constant);
                    return Ok(det(&|s| s.bools[*dst] = Some(x), next));
                }
                let c = comparison_constraint(&l, *op, &r);
                let is_int = |v: VarId| st.is_int(v);
                match st.constraints.entails_mixed(&c, &is_int) {
                    Entailment::Yes => det(&|s| s.bools[*dst] = Some(true), next),
                    Entailment::No => det(&|s| s.bools[*dst] = Some(false), next),
                    Entailment::Neither => {
                        let mut out = Vec::new();
                        let branches = std::iter::once((c.clone(), true)).chain(c.negate().into_iter().map(|n| (n, false)));
                        for (k, val) in branches {
                            let region = st.constraints.with(k).canonical();
                            if region.status_mixed(&is_int) == RegionStatus::Empty {
                                continue;
                            }
                            let mut s = st.clone();
                            s.constraints = region;
                            s.bools[*dst] = Some(val);
                            s.pc = next;
                            out.push((s, EdgeProb::Split));
                        }
                        out
                    }
                }
            }
            StmtKind::ExpMech { dst, scale, table, args } => {
                let a = eval_args(p, args, &doms)?;
                let Some(row) = p.scores[table].rows.get(&a) else {
                    return Err(EvalError::MissingRow(table.clone(), a).into());
                };
                let top = row.iter().map(|(_, f)| f).max().cloned().unwrap_or_default();
                let w = |f: &Rational| LaurentExpPoly::exp(scale * (f - &top));
                let mut den = LaurentExpPoly::zero();
                for (_, f) in row {
                    den = &den + &w(f);
                }
                let mut out = Vec::new();
                for (v, f) in row {
                    let q = ExpRational::new(w(f), den.clone())?;
                    out.extend(det(&|s| s.doms[*dst] = Some(*v), next).into_iter().map(|(s, _)| (s, EdgeProb::Discrete(q.clone()))));
                }
                out
            }
            StmtKind::Choose { dst, scale, table, args } => {
                let a = eval_args(p, args, &doms)?;
                let Some(row) = p.dists[table].rows.get(&a) else {
                    return Err(EvalError::MissingRow(table.clone(), a).into());
                };
                let mut out = Vec::new();
                for (v, _, q) in row {
                    let q = q.rescale_eps(scale);
                    if q.is_zero() {
                        continue;
                    }
                    out.extend(det(&|s| s.doms[*dst] = Some(*v), next).into_iter().map(|(s, _)| (s, EdgeProb::Discrete(q.clone()))));
                }
                out
            }
            StmtKind::If(..) | StmtKind::While(..) | StmtKind::Exit => unreachable!("compiled away"),
        })
    }
}

/// Exact event probabilities over one DTMC, caching integrals.
pub struct Solver<'a> {
    pub d: &'a ParamDtmc,
    cache: RefCell<HashMap<(Vec<SampleRecord>, Region), ExpRational>>,
    order: Vec<Vec<usize>>,
}

impl<'a> Solver<'a> {
    pub fn new(d: &'a ParamDtmc) -> Self {
        let mut g = petgraph::graph::DiGraph::<(), ()>::new();
        let nodes: Vec<_> = (0..d.states.len()).map(|_| g.add_node(())).collect();
        for (i, es) in d.edges.iter().enumerate() {
            for e in es {
                g.add_edge(nodes[i], nodes[e.to], ());
            }
        }
        let order = petgraph::algo::tarjan_scc(&g)
            .into_iter()
            .map(|c| c.into_iter().map(|n| n.index()).collect())
            .collect();
        Solver {
            d,
            cache: RefCell::new(HashMap::new()),
            order,
        }
    }

    /// Probability that the samples of `s` land in its constraints and `extra`.
    pub fn mass(&self, s: usize, extra: &Region) -> Result<ExpRational, SemError> {
        let st = &self.d.states[s];
        let region = st.constraints.and(extra).canonical();
        let key = (st.samples.clone(), region);
        if let Some(v) = self.cache.borrow().get(&key) {
            return Ok(v.clone());
        }
        let v = if key.1.status_mixed(&|v| st.is_int(v)) == RegionStatus::Empty {
            ExpRational::zero()
        } else {
            joint_probability(&key.0, &key.1)?
        };
        self.cache.borrow_mut().insert(key, v.clone());
        Ok(v)
    }

    /// Conditional probability of an edge.
    pub fn edge_probability(&self, from: usize, e: &Edge) -> Result<ExpRational, SemError> {
        Ok(match &e.prob {
            EdgeProb::One => ExpRational::one(),
            EdgeProb::Discrete(q) => q.clone(),
            EdgeProb::Split => self.mass(e.to, &Region::full())?.div_positive(&self.mass(from, &Region::full())?)?,
        })
    }

    /// States whose outgoing probabilities do not sum to exactly 1.
    pub fn check_mass(&self) -> Result<Vec<usize>, SemError> {
        let mut bad = Vec::new();
        for (s, es) in self.d.edges.iter().enumerate() {
            if es.is_empty() {
                continue;
            }
            let mut split = ExpRational::zero();
            let mut disc = ExpRational::zero();
            let mut any_split = false;
            for e in es {
                match &e.prob {
                    EdgeProb::Split => {
                        any_split = true;
                        split = &split + &self.mass(e.to, &Region::full())?;
                    }
                    EdgeProb::One => disc = &disc + &ExpRational::one(),
                    EdgeProb::Discrete(q) => disc = &disc + q,
                }
            }
            let ok = if any_split {
                disc.is_zero() && split == self.mass(s, &Region::full())?
            } else {
                disc.is_one()
            };
            if !ok {
                bad.push(s);
            }
        }
        Ok(bad)
    }

    /// Unnormalized value at an exit state: mass of its constraints joined
    /// with the event.
    fn exit_value(&self, s: usize, e: &OutputEvent) -> Result<ExpRational, SemError> {
        let st = &self.d.states[s];
        let mut total = ExpRational::zero();
        for c in &e.components {
            if let Some(r) = c.at_state(&self.d.program, st) {
                total = &total + &self.mass(s, &r)?;
            }
        }
        Ok(total)
    }

    /// Probability that the program terminates with its outputs in `e`.
    ///
    /// Values are carried unnormalized (scaled by the mass of each state's
    /// constraints), so comparison splits have weight 1 and the
    /// probabilities along a path telescope into the exit integral. Cyclic
    /// components only contain DOM sampling and deterministic steps and are
    /// solved exactly.
    pub fn prob(&self, e: &OutputEvent) -> Result<ExpRational, SemError> {
        let n = self.d.states.len();
        let mut x: Vec<Option<ExpRational>> = vec![None; n];
        let weight = |e: &Edge| match &e.prob {
            EdgeProb::Discrete(q) => q.clone(),
            _ => ExpRational::one(),
        };
        for comp in &self.order {
            if comp.len() == 1 && !self.d.edges[comp[0]].iter().any(|e| e.to == comp[0]) {
                let s = comp[0];
                let v = if self.d.states[s].pc == EXIT {
                    self.exit_value(s, e)?
                } else {
                    let mut acc = ExpRational::zero();
                    for ed in &self.d.edges[s] {
                        acc = &acc + &(&weight(ed) * x[ed.to].as_ref().unwrap());
                    }
                    acc
                };
                x[s] = Some(v);
                continue;
            }
            let pos: HashMap<usize, usize> = comp.iter().enumerate().map(|(i, &s)| (s, i)).collect();
            let m = comp.len();
            let mut a = vec![vec![ExpRational::zero(); m]; m];
            let mut rhs = vec![ExpRational::zero(); m];
            for (i, &s) in comp.iter().enumerate() {
                a[i][i] = ExpRational::one();
                for ed in &self.d.edges[s] {
                    if matches!(ed.prob, EdgeProb::Split) {
                        return Err(SemError::Singular("comparison split inside a cycle".into()));
                    }
                    let w = weight(ed);
                    match pos.get(&ed.to) {
                        Some(&j) => a[i][j] = &a[i][j] - &w,
                        None => rhs[i] = &rhs[i] + &(&w * x[ed.to].as_ref().unwrap()),
                    }
                }
            }
            let sol = solve(a, rhs)?;
            for (i, &s) in comp.iter().enumerate() {
                x[s] = Some(sol[i].clone());
            }
        }
        let init = x[self.d.initial].take().unwrap();
        let m0 = self.mass(self.d.initial, &Region::full())?;
        if m0.is_one() {
            Ok(init)
        } else {
            Ok(init.div_positive(&m0)?)
        }
    }
}

/// Exact Gaussian elimination; pivots need a certified sign.
fn solve(mut a: Vec<Vec<ExpRational>>, mut b: Vec<ExpRational>) -> Result<Vec<ExpRational>, SemError> {
    let m = b.len();
    for k in 0..m {
        let Some(piv) = (k..m).find(|&r| !a[r][k].is_zero()) else {
            return Err(SemError::Singular(format!("no pivot in column {k}")));
        };
        a.swap(k, piv);
        b.swap(k, piv);
        let d = a[k][k].clone();
        let inv = |x: &ExpRational| {
            x.div_signed(&d)
                .map_err(|err| SemError::Singular(format!("pivot {d}: {err}")))
        };
        for j in k..m {
            a[k][j] = inv(&a[k][j])?;
        }
        b[k] = inv(&b[k])?;
        for r in 0..m {
            if r == k || a[r][k].is_zero() {
                continue;
            }
            let f = a[r][k].clone();
            for j in k..m {
                let t = &f * &a[k][j];
                a[r][j] = &a[r][j] - &t;
            }
            let t = &f * &b[k];
            b[r] = &b[r] - &t;
        }
    }
    Ok(b)
}

/// Convenience wrapper building a fresh [`Solver`].
pub fn output_event_prob(d: &ParamDtmc, e: &OutputEvent) -> Result<ExpRational, SemError> {
    Solver::new(d).prob(e)
}

/// Input valuation from `(name, value)` pairs.
pub fn input_by_name(p: &Program, vals: &[(&str, OutValue)]) -> Result<Vec<(Var, OutValue)>, SemError> {
    vals.iter()
        .map(|(n, x)| {
            p.var(n)
                .filter(|&v| p.vars[v].role == Role::Input)
                .map(|v| (v, x.clone()))
                .ok_or_else(|| SemError::Input(format!("`{n}` is not an input")))
        })
        .collect()
}
