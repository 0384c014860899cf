//! Concrete randomized interpreter and Monte Carlo estimation of output
//! events. Floating point throughout; used for cross-validation only.

use crate::lang::eval::{compare_f64, eval_args, eval_bool, eval_dom, num_f64, EvalError};
use crate::lang::{OutValue, Program, Stmt, StmtKind, Ty, Var};
use crate::semantics::{OutAtom, OutputEvent};
use crate::symexp::rational::{to_f64, Rational};
use crate::integrator::Rel;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use std::collections::HashMap;

/// Absolute slack (scaled by the magnitudes involved) applied when a double
/// lands on an event boundary: `=` and `<=` accept it, `<` rejects it.
pub const BOUNDARY_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("step budget of {0} exceeded")]
    StepBudget(u64),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Input(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub epsilon: Rational,
    pub samples: u64,
    pub seed: u64,
    /// statements executed per run before giving up
    pub step_budget: u64,
}

impl SimConfig {
    pub fn new(epsilon: Rational, samples: u64, seed: u64) -> Self {
        SimConfig {
            epsilon,
            samples: samples.max(1),
            seed,
            step_budget: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub p_hat: f64,
    pub stderr: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SimValue {
    Unset,
    Dom(i64),
    Real(f64),
}

/// Generator for run `index`: one ChaCha stream per run.
pub fn run_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// Uniform on the open interval (0, 1).
fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Laplace with density `(a*eps/2) exp(-a*eps|x - mu|)`, by inverse CDF.
pub fn sample_laplace(rng: &mut ChaCha8Rng, rate: f64, mu: f64) -> f64 {
    let d = uniform(rng) - 0.5;
    mu - d.signum() * (1.0 - 2.0 * d.abs()).ln() / rate
}

/// Two-sided geometric with mass proportional to `exp(-rate|z - mu|)`.
pub fn sample_dlap(rng: &mut ChaCha8Rng, rate: f64, mu: f64) -> f64 {
    let u = uniform(rng);
    let r = (-rate).exp();
    let lr = -rate;
    let k = if u <= r / (1.0 + r) {
        -((u * (1.0 + r)).ln() / lr).floor()
    } else {
        (((1.0 - u) * (1.0 + r)).ln() / lr).ceil().max(1.0) - 1.0
    };
    mu + k
}

fn pick(rng: &mut ChaCha8Rng, items: &[(i64, f64)]) -> Option<i64> {
    let total: f64 = items.iter().map(|(_, w)| w).sum();
    let mut u = uniform(rng) * total;
    for (x, w) in items {
        if u < *w {
            return Some(*x);
        }
        u -= w;
    }
    items.iter().rev().find(|(_, w)| *w > 0.0).map(|(x, _)| *x)
}

struct Machine<'a> {
    p: &'a Program,
    eps: f64,
    bools: HashMap<Var, bool>,
    doms: HashMap<Var, i64>,
    nums: HashMap<Var, f64>,
    steps: u64,
    budget: u64,
}

impl Machine<'_> {
    /// `Ok(false)` once `exit` runs.
    fn block(&mut self, b: &[Stmt], rng: &mut ChaCha8Rng) -> Result<bool, SimError> {
        for s in b {
            if !self.stmt(s, rng)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn stmt(&mut self, s: &Stmt, rng: &mut ChaCha8Rng) -> Result<bool, SimError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(SimError::StepBudget(self.budget));
        }
        let p = self.p;
        let doms_map = &self.doms;
        let doms = |v: Var| doms_map.get(&v).copied();
        let nums_map = &self.nums;
        let nums = |v: Var| nums_map.get(&v).copied();
        match &s.kind {
            StmtKind::Bool(v, e) => {
                let bools = |v: Var| self.bools.get(&v).copied();
                let b = eval_bool(p, e, &bools, &doms)?;
                self.bools.insert(*v, b);
            }
            StmtKind::Compare { dst, lhs, op, rhs, .. } => {
                let b = compare_f64(num_f64(p, lhs, &nums, &doms)?, *op, num_f64(p, rhs, &nums, &doms)?);
                self.bools.insert(*dst, b);
            }
            StmtKind::Dom(v, e) => {
                let x = eval_dom(p, e, &doms)?;
                self.doms.insert(*v, x);
            }
            StmtKind::Num(v, e) => {
                let x = num_f64(p, e, &nums, &doms)?;
                self.nums.insert(*v, x);
            }
            StmtKind::Lap { dst, scale, mean } => {
                let m = num_f64(p, mean, &nums, &doms)?;
                let x = sample_laplace(rng, to_f64(scale) * self.eps, m);
                self.nums.insert(*dst, x);
            }
            StmtKind::DLap { dst, scale, mean } => {
                let m = num_f64(p, mean, &nums, &doms)?;
                let x = sample_dlap(rng, to_f64(scale) * self.eps, m);
                self.nums.insert(*dst, x);
            }
            StmtKind::ExpMech { dst, scale, table, args } => {
                let a = eval_args(p, args, &doms)?;
                let row = p
                    .scores
                    .get(table)
                    .and_then(|t| t.rows.get(&a))
                    .ok_or_else(|| SimError::Input(format!("score table `{table}` has no row {a:?}")))?;
                let top = row.iter().map(|(_, f)| to_f64(f)).fold(f64::NEG_INFINITY, f64::max);
                let rate = to_f64(scale) * self.eps;
                let w: Vec<(i64, f64)> = row.iter().map(|(c, f)| (*c, (rate * (to_f64(f) - top)).exp())).collect();
                let x = pick(rng, &w).ok_or_else(|| SimError::Input(format!("empty row in `{table}`")))?;
                self.doms.insert(*dst, p.clamp(x));
            }
            StmtKind::Choose { dst, scale, table, args } => {
                let a = eval_args(p, args, &doms)?;
                let row = p
                    .dists
                    .get(table)
                    .and_then(|t| t.rows.get(&a))
                    .ok_or_else(|| SimError::Input(format!("distribution `{table}` has no row {a:?}")))?;
                let e = to_f64(scale) * self.eps;
                let w: Vec<(i64, f64)> = row.iter().map(|(x, _, q)| (*x, q.eval_f64(e).max(0.0))).collect();
                let x = pick(rng, &w).ok_or_else(|| SimError::Input(format!("empty row in `{table}`")))?;
                self.doms.insert(*dst, p.clamp(x));
            }
            StmtKind::If(c, t, e) => {
                let bools = |v: Var| self.bools.get(&v).copied();
                let b = eval_bool(p, c, &bools, &doms)?;
                return self.block(if b { t } else { e }, rng);
            }
            StmtKind::While(c, body) => loop {
                let bools = |v: Var| self.bools.get(&v).copied();
                let doms = |v: Var| self.doms.get(&v).copied();
                if !eval_bool(p, c, &bools, &doms)? {
                    break;
                }
                if !self.block(body, rng)? {
                    return Ok(false);
                }
                self.steps += 1;
                if self.steps > self.budget {
                    return Err(SimError::StepBudget(self.budget));
                }
            },
            StmtKind::Exit => return Ok(false),
        }
        Ok(true)
    }
}

/// One concrete run; output values in declaration order of outputs.
pub fn run_once(
    p: &Program,
    input: &[(Var, OutValue)],
    eps: f64,
    rng: &mut ChaCha8Rng,
    step_budget: u64,
) -> Result<Vec<(Var, SimValue)>, SimError> {
    let mut m = Machine {
        p,
        eps,
        bools: HashMap::new(),
        doms: HashMap::new(),
        nums: HashMap::new(),
        steps: 0,
        budget: step_budget,
    };
    for (v, x) in input {
        match x {
            OutValue::Dom(d) => drop(m.doms.insert(*v, *d)),
            OutValue::Real(r) => drop(m.nums.insert(*v, to_f64(r))),
            OutValue::Unset => return Err(SimError::Input(format!("input `{}` has no value", p.name(*v)))),
        }
    }
    m.block(&p.body, rng)?;
    Ok(p.outputs()
        .into_iter()
        .map(|o| {
            let v = match p.ty(o) {
                Ty::Real | Ty::Int => m.nums.get(&o).map_or(SimValue::Unset, |x| SimValue::Real(*x)),
                _ => m.doms.get(&o).map_or(SimValue::Unset, |x| SimValue::Dom(*x)),
            };
            (o, v)
        })
        .collect())
}

/// Membership of a concrete output in an event.
pub fn event_holds(ev: &OutputEvent, out: &[(Var, SimValue)]) -> bool {
    let get = |v: Var| out.iter().find(|(w, _)| *w == v).map_or(SimValue::Unset, |(_, x)| *x);
    ev.components.iter().any(|c| {
        let atoms = c.atoms.iter().all(|(v, a)| match (a, get(*v)) {
            (OutAtom::Dom(x), SimValue::Dom(y)) => *x == y,
            (OutAtom::Unset, SimValue::Unset) => true,
            _ => false,
        });
        atoms
            && c.region.cons.iter().all(|con| {
                let mut val = to_f64(&con.lhs.constant);
                let mut mag = val.abs();
                for (v, k) in con.lhs.coeffs() {
                    let SimValue::Real(x) = get(v) else { return false };
                    let t = to_f64(k) * x;
                    val += t;
                    mag += t.abs();
                }
                let tol = BOUNDARY_SLACK * (1.0 + mag);
                match con.rel {
                    Rel::Lt => val < -tol,
                    Rel::Le => val <= tol,
                    Rel::Eq => val.abs() <= tol,
                }
            })
    })
}

const CHUNK: u64 = 4096;

/// Fraction of `cfg.samples` independent runs whose output lies in `ev`.
/// Run `i` uses [`run_rng`]`(seed, i)`, so the result does not depend on
/// the thread count.
pub fn estimate_event(p: &Program, input: &[(Var, OutValue)], ev: &OutputEvent, cfg: &SimConfig) -> Result<Estimate, SimError> {
    let eps = to_f64(&cfg.epsilon);
    let chunks = cfg.samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut n = 0u64;
            for i in c * CHUNK..((c + 1) * CHUNK).min(cfg.samples) {
                let mut rng = run_rng(cfg.seed, i);
                let out = run_once(p, input, eps, &mut rng, cfg.step_budget)?;
                n += u64::from(event_holds(ev, &out));
            }
            Ok(n)
        })
        .collect::<Result<Vec<u64>, SimError>>()?
        .into_iter()
        .sum();
    let p_hat = hits as f64 / cfg.samples as f64;
    Ok(Estimate {
        p_hat,
        stderr: (p_hat * (1.0 - p_hat) / cfg.samples as f64).sqrt(),
        n: cfg.samples,
        seed: cfg.seed,
    })
}
