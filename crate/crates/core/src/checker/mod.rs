//! Accuracy checks at an input: instrument the ball event, build beta at the
//! interesting (alpha, gamma), and decide `p >= 1 - beta` on all eps > 0.

pub mod report;
pub mod spec;

use crate::decide::{check_inequality, DecideOptions, SignVerdict};
use crate::integrator::{Constraint, LinForm, VarId};
use crate::lang::{det_cells, DetError, DetOptions, DetSpec, OutValue, Program, Ty, Var};
use crate::metrics::{dd_at_point, det_output, Extended, InputMetric, MetricError, OutputContext, OutputMetric};
use crate::regions::{sup, AlphaMode, GammaMode, Monotonicity, RegionError, RegionSpec, ALPHA, GAMMA};
use crate::semantics::{build_dtmc, BuildOptions, OutputEvent, SemError, Solver};
use crate::symexp::rational::{fmt_rational, Rational};
use crate::symexp::{Dyadic, Encloser, ExpRational, Interval, LaurentExpPoly};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::time::Instant;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CheckError {
    #[error("bad input: {0}")]
    Input(String),
    #[error(transparent)]
    Det(#[from] DetError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Semantics(#[from] SemError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("beta is not anti-monotone: term {0}")]
    NotAntimonotone(String),
    #[error("{0} inputs exceed the cap of {1}")]
    TooManyInputs(u128, usize),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DdComparison {
    /// alpha <= dd
    #[default]
    Inclusive,
    /// alpha < dd
    Strict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyQuery {
    pub program: Program,
    pub det: DetSpec,
    pub input_metric: InputMetric,
    pub output_metric: OutputMetric,
    pub region: RegionSpec,
    /// values of the program inputs in declaration order
    pub input: Vec<OutValue>,
    pub dd_comparison: DdComparison,
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub decide: DecideOptions,
    pub build: BuildOptions,
    pub det: DetOptions,
    /// bits for the reported beta enclosure
    pub precision: u32,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            decide: DecideOptions::default(),
            build: BuildOptions::default(),
            det: DetOptions::default(),
            precision: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Verified,
    Vacuous,
    Unknown,
    Refuted,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Verified => "VERIFIED",
            Status::Vacuous => "VACUOUS",
            Status::Unknown => "UNKNOWN",
            Status::Refuted => "REFUTED",
        }
    }
}

/// `(eps0, alpha, beta(eps0), gamma)` with `p(eps0) - (1 - beta(eps0)) <= margin < 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub eps0: Rational,
    pub alpha: Extended,
    pub beta_value: Interval,
    pub gamma: Extended,
    pub margin: Dyadic,
}

/// One inequality check: a fixed-gamma query has one, a finite-output query
/// one per admissible level.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelCheck {
    /// smallest gamma of the level
    pub level: Rational,
    pub alpha: Extended,
    pub gamma: Extended,
    pub status: Status,
    pub beta: String,
    pub probability: String,
    pub message: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Timings {
    pub det_ms: f64,
    pub probability_ms: f64,
    pub decide_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub counterexample: Option<Counterexample>,
    pub input: Vec<OutValue>,
    pub dd: Option<Extended>,
    pub checks: Vec<LevelCheck>,
    pub timings: Timings,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Program-side view of a query input.
struct Prepared {
    input: Vec<(Var, OutValue)>,
    reals: Vec<Rational>,
    doms: Vec<i64>,
    /// det(P)(u) over the randomized program's outputs
    v: Vec<(Var, OutValue)>,
    dd: Extended,
}

fn prepare(q: &AccuracyQuery, opts: &CheckOptions) -> Result<Prepared, CheckError> {
    let p = &q.program;
    let ins = p.inputs();
    if ins.len() != q.input.len() {
        return Err(CheckError::Input(format!("expected {} inputs, got {}", ins.len(), q.input.len())));
    }
    let (mut input, mut reals, mut doms) = (Vec::new(), Vec::new(), Vec::new());
    for (&v, x) in ins.iter().zip(&q.input) {
        match (p.ty(v), x) {
            (Ty::Real, OutValue::Real(r)) => reals.push(r.clone()),
            (Ty::Int, OutValue::Real(r)) if r.is_integer() => reals.push(r.clone()),
            (Ty::Dom, OutValue::Dom(d)) if d.abs() <= p.dom_bound => doms.push(*d),
            _ => return Err(CheckError::Input(format!("value {x:?} does not fit input `{}`", p.name(v)))),
        }
        input.push((v, x.clone()));
    }
    let (cells, point, v) = match &q.det {
        DetSpec::Program(d) => {
            let mut dom_inputs = Vec::new();
            let mut point = Vec::new();
            for (&rv, x) in ins.iter().zip(&q.input) {
                let dv = d
                    .var(p.name(rv))
                    .filter(|&dv| d.inputs().contains(&dv) && d.ty(dv) == p.ty(rv))
                    .ok_or_else(|| CheckError::Input(format!("reference program lacks input `{}`", p.name(rv))))?;
                match x {
                    OutValue::Dom(k) => dom_inputs.push((dv, *k)),
                    OutValue::Real(r) => point.push((dv, r.clone())),
                    OutValue::Unset => unreachable!("checked above"),
                }
            }
            let cells = det_cells(&q.det, &dom_inputs, &opts.det)?;
            let out = det_output(&cells, &point)?;
            let douts = d.outputs();
            let mut v = Vec::new();
            for o in p.outputs() {
                let k = douts
                    .iter()
                    .position(|&w| d.name(w) == p.name(o))
                    .ok_or_else(|| CheckError::Input(format!("reference program lacks output `{}`", p.name(o))))?;
                v.push((o, out[k].clone()));
            }
            (cells, point, v)
        }
        DetSpec::Table(_) => {
            let point: Vec<(VarId, Rational)> = q
                .input
                .iter()
                .enumerate()
                .map(|(i, x)| match x {
                    OutValue::Real(r) => (i, r.clone()),
                    OutValue::Dom(k) => (i, Rational::from_integer((*k).into())),
                    OutValue::Unset => unreachable!("checked above"),
                })
                .collect();
            let cells = det_cells(&q.det, &[], &opts.det)?;
            let out = det_output(&cells, &point)?;
            let outs = p.outputs();
            if out.len() != outs.len() {
                return Err(CheckError::Input(format!("table rows have {} outputs, program has {}", out.len(), outs.len())));
            }
            (cells, point, outs.into_iter().zip(out).collect())
        }
    };
    let dd = dd_at_point(&cells, &point, &q.input_metric)?;
    Ok(Prepared { input, reals, doms, v, dd })
}

fn alpha_bound(dd: &Extended, cmp: DdComparison) -> Vec<Constraint> {
    match dd {
        Extended::Infinity => vec![],
        Extended::Finite(d) => {
            let l = LinForm::var(ALPHA).add_constant(&-d.clone());
            vec![match cmp {
                DdComparison::Inclusive => Constraint::le(l),
                DdComparison::Strict => Constraint::lt(l),
            }]
        }
    }
}

fn fix(var: VarId, x: &Rational) -> Constraint {
    Constraint::eq(LinForm::var(var).add_constant(&-x.clone()))
}

/// Interesting alpha for gamma constraints `extra`, or `None` when no
/// admissible pair remains.
fn interesting_alpha(q: &AccuracyQuery, dd: &Extended, extra: &[Constraint]) -> Option<Extended> {
    let mut cons = alpha_bound(dd, q.dd_comparison);
    cons.extend(extra.iter().cloned());
    match &q.region.alpha_mode {
        AlphaMode::Fixed(a) => {
            cons.push(fix(ALPHA, a));
            sup(&q.region.tag.region(&cons), &LinForm::var(ALPHA))
        }
        AlphaMode::Dd => sup(&q.region.tag.region(&cons), &LinForm::var(ALPHA)),
    }
}

fn require_antimonotone(r: &RegionSpec) -> Result<(), CheckError> {
    match r.beta.validate_antimonotone() {
        Monotonicity::Ok => Ok(()),
        Monotonicity::Violation(t) => Err(CheckError::NotAntimonotone(t)),
    }
}

struct Decided {
    check: LevelCheck,
    counterexample: Option<Counterexample>,
}

fn decide_level(
    p: &ExpRational,
    beta: &LaurentExpPoly,
    level: Rational,
    alpha: Extended,
    gamma: Extended,
    opts: &CheckOptions,
) -> Decided {
    let verdict = check_inequality(p, beta, &opts.decide);
    let (status, counterexample, message) = match verdict {
        SignVerdict::NonNeg => (Status::Verified, None, None),
        SignVerdict::FoundNeg { eps0, upper } => {
            let beta_value = Encloser::new(beta).point(&eps0, opts.precision.max(16));
            let cx = Counterexample {
                eps0,
                alpha: alpha.clone(),
                beta_value,
                gamma: gamma.clone(),
                margin: upper,
            };
            (Status::Refuted, Some(cx), None)
        }
        SignVerdict::Unknown(why) => (Status::Unknown, None, Some(why)),
    };
    Decided {
        check: LevelCheck {
            level,
            alpha,
            gamma,
            status,
            beta: beta.to_string(),
            probability: p.to_string(),
            message,
        },
        counterexample,
    }
}

/// Accuracy at the query input, dispatching on the gamma mode.
pub fn check_at_input(q: &AccuracyQuery, opts: &CheckOptions) -> Result<Verdict, CheckError> {
    match q.region.gamma_mode {
        GammaMode::Fixed(_) => check_at_input_fixed_gamma(q, opts),
        GammaMode::FiniteOutputSweep => check_at_input_finite_outputs(q, opts),
    }
}

pub fn check_at_input_fixed_gamma(q: &AccuracyQuery, opts: &CheckOptions) -> Result<Verdict, CheckError> {
    let GammaMode::Fixed(c) = &q.region.gamma_mode else {
        return Err(CheckError::Input("gamma mode is not fixed".into()));
    };
    if q.region.alpha_mode == AlphaMode::Dd {
        require_antimonotone(&q.region)?;
    }
    let t0 = Instant::now();
    let prep = prepare(q, opts)?;
    let mut timings = Timings {
        det_ms: ms(t0),
        ..Timings::default()
    };
    let vacuous = |timings: Timings| Verdict {
        status: Status::Vacuous,
        counterexample: None,
        input: q.input.clone(),
        dd: Some(prep.dd.clone()),
        checks: vec![],
        timings,
    };
    let Some(alpha) = interesting_alpha(q, &prep.dd, &[fix(GAMMA, c)]) else {
        timings.total_ms = ms(t0);
        return Ok(vacuous(timings));
    };
    let t1 = Instant::now();
    let ctx = OutputContext {
        program: &q.program,
        reals: &prep.reals,
        doms: &prep.doms,
    };
    let ball = ctx.ball(&q.output_metric, &prep.v, c)?;
    let d = build_dtmc(&q.program, &prep.input, &opts.build)?;
    let p = Solver::new(&d).prob(&ball)?;
    timings.probability_ms = ms(t1);
    let beta = q.region.beta.substitute(&alpha, &Extended::Finite(c.clone()))?;
    let t2 = Instant::now();
    let dec = decide_level(&p, &beta, c.clone(), alpha, Extended::Finite(c.clone()), opts);
    timings.decide_ms = ms(t2);
    timings.total_ms = ms(t0);
    Ok(Verdict {
        status: dec.check.status,
        counterexample: dec.counterexample,
        input: q.input.clone(),
        dd: Some(prep.dd),
        checks: vec![dec.check],
        timings,
    })
}

/// Distinct DOM output tuples over the exit states.
fn reachable_outputs(d: &crate::semantics::ParamDtmc) -> Vec<Vec<(Var, OutValue)>> {
    let outs = d.program.outputs();
    let mut seen = BTreeSet::new();
    for s in d.exits() {
        let st = &d.states[s];
        let t: Vec<(Var, OutValue)> = outs
            .iter()
            .map(|&o| (o, st.doms[o].map_or(OutValue::Unset, OutValue::Dom)))
            .collect();
        seen.insert(t);
    }
    seen.into_iter().collect()
}

pub fn check_at_input_finite_outputs(q: &AccuracyQuery, opts: &CheckOptions) -> Result<Verdict, CheckError> {
    let p = &q.program;
    if p.outputs().iter().any(|&o| p.ty(o) != Ty::Dom) {
        return Err(MetricError::InfiniteOutputs.into());
    }
    require_antimonotone(&q.region)?;
    let t0 = Instant::now();
    let prep = prepare(q, opts)?;
    let mut timings = Timings {
        det_ms: ms(t0),
        ..Timings::default()
    };
    let t1 = Instant::now();
    let d = build_dtmc(p, &prep.input, &opts.build)?;
    let solver = Solver::new(&d);
    let ctx = OutputContext {
        program: p,
        reals: &prep.reals,
        doms: &prep.doms,
    };
    let mut outputs = reachable_outputs(&d);
    if !outputs.contains(&prep.v) {
        outputs.push(prep.v.clone());
    }
    let levels = ctx.distinct_distances(&q.output_metric, &prep.v, &outputs)?;
    timings.probability_ms = ms(t1);
    let mut checks = Vec::new();
    let mut counterexample = None;
    for (i, (c, _)) in levels.iter().enumerate() {
        let mut extra = vec![Constraint::le(LinForm::constant(c.clone()).sub(&LinForm::var(GAMMA)))];
        if let Some((next, _)) = levels.get(i + 1) {
            extra.push(Constraint::lt(LinForm::var(GAMMA).add_constant(&-next.clone())));
        }
        let Some(alpha) = interesting_alpha(q, &prep.dd, &extra) else { continue };
        let mut cons = alpha_bound(&prep.dd, q.dd_comparison);
        cons.extend(extra);
        if let AlphaMode::Fixed(a) = &q.region.alpha_mode {
            cons.push(fix(ALPHA, a));
        }
        let gamma = sup(&q.region.tag.region(&cons), &LinForm::var(GAMMA)).expect("region is nonempty");
        let t = Instant::now();
        let ball: OutputEvent = ctx.ball(&q.output_metric, &prep.v, c)?;
        let pr = solver.prob(&ball)?;
        timings.probability_ms += ms(t);
        let beta = q.region.beta.substitute(&alpha, &gamma)?;
        let t = Instant::now();
        let dec = decide_level(&pr, &beta, c.clone(), alpha, gamma, opts);
        timings.decide_ms += ms(t);
        if counterexample.is_none() {
            counterexample = dec.counterexample;
        }
        checks.push(dec.check);
    }
    let status = if checks.is_empty() {
        Status::Vacuous
    } else {
        checks.iter().map(|c| c.status).max().expect("nonempty")
    };
    timings.total_ms = ms(t0);
    Ok(Verdict {
        status,
        counterexample,
        input: q.input.clone(),
        dd: Some(prep.dd),
        checks,
        timings,
    })
}

/// Inputs to enumerate in a batch.
#[derive(Clone, Debug, PartialEq)]
pub enum InputSet {
    List(Vec<Vec<OutValue>>),
    /// inclusive integer range per program input
    Ranges(Vec<(i64, i64)>),
}

/// All inputs of the set, in lexicographic order for ranges.
pub fn enumerate_inputs(p: &Program, set: &InputSet, cap: usize) -> Result<Vec<Vec<OutValue>>, CheckError> {
    match set {
        InputSet::List(l) => {
            if l.len() > cap {
                return Err(CheckError::TooManyInputs(l.len() as u128, cap));
            }
            Ok(l.clone())
        }
        InputSet::Ranges(rs) => {
            let ins = p.inputs();
            if rs.len() != ins.len() {
                return Err(CheckError::Input(format!("expected {} ranges, got {}", ins.len(), rs.len())));
            }
            let mut total: u128 = 1;
            for (lo, hi) in rs {
                if hi < lo {
                    return Ok(vec![]);
                }
                total = total.saturating_mul((hi - lo + 1) as u128);
            }
            if total > cap as u128 {
                return Err(CheckError::TooManyInputs(total, cap));
            }
            let mut out = vec![vec![]];
            for (&v, &(lo, hi)) in ins.iter().zip(rs) {
                let mut next = Vec::with_capacity(out.len() * (hi - lo + 1) as usize);
                for prefix in &out {
                    for x in lo..=hi {
                        let mut t = prefix.clone();
                        t.push(match p.ty(v) {
                            Ty::Dom => OutValue::Dom(x),
                            _ => OutValue::Real(Rational::from_integer(x.into())),
                        });
                        next.push(t);
                    }
                }
                out = next;
            }
            Ok(out)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchSummary {
    pub status: Status,
    pub total: usize,
    pub verified: usize,
    pub refuted: usize,
    pub unknown: usize,
    pub vacuous: usize,
    pub errors: usize,
    /// first refuting input and its counterexample
    pub counterexample: Option<(Vec<OutValue>, Counterexample)>,
}

#[derive(Clone, Debug)]
pub struct BatchResult {
    pub results: Vec<Result<Verdict, CheckError>>,
    pub summary: BatchSummary,
}

/// Summary status: REFUTED, then UNKNOWN (including errors), then VACUOUS;
/// VERIFIED only when every input verified. An empty batch is VACUOUS.
pub fn summarize(results: &[Result<Verdict, CheckError>]) -> BatchSummary {
    let mut s = BatchSummary {
        status: Status::Vacuous,
        total: results.len(),
        verified: 0,
        refuted: 0,
        unknown: 0,
        vacuous: 0,
        errors: 0,
        counterexample: None,
    };
    let mut worst: Option<Status> = None;
    for r in results {
        let st = match r {
            Ok(v) => {
                if let (Status::Refuted, None, Some(cx)) = (v.status, &s.counterexample, &v.counterexample) {
                    s.counterexample = Some((v.input.clone(), cx.clone()));
                }
                v.status
            }
            Err(_) => {
                s.errors += 1;
                Status::Unknown
            }
        };
        match st {
            Status::Verified => s.verified += 1,
            Status::Refuted => s.refuted += 1,
            Status::Unknown => s.unknown += r.is_ok() as usize,
            Status::Vacuous => s.vacuous += 1,
        }
        worst = Some(worst.map_or(st, |w| w.max(st)));
    }
    s.status = worst.unwrap_or(Status::Vacuous);
    s
}

/// Checks every input with the template query on `jobs` worker threads.
pub fn batch_all_inputs(template: &AccuracyQuery, inputs: &[Vec<OutValue>], opts: &CheckOptions, jobs: usize) -> BatchResult {
    let run = |u: &Vec<OutValue>| {
        let q = AccuracyQuery {
            input: u.clone(),
            ..template.clone()
        };
        let r = check_at_input(&q, opts);
        if let Ok(v) = &r {
            log::info!("{} at {}: {}", v.status.name(), fmt_input(u), v.timings.total_ms);
        }
        r
    };
    let results: Vec<_> = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(pool) => pool.install(|| inputs.par_iter().map(run).collect()),
        Err(_) => inputs.iter().map(run).collect(),
    };
    let summary = summarize(&results);
    BatchResult { results, summary }
}

pub fn fmt_value(x: &OutValue) -> String {
    match x {
        OutValue::Unset => "unset".into(),
        OutValue::Dom(d) => d.to_string(),
        OutValue::Real(r) => fmt_rational(r),
    }
}

pub fn fmt_input(u: &[OutValue]) -> String {
    format!("[{}]", u.iter().map(fmt_value).collect::<Vec<_>>().join(", "))
}

/// `det(u)` and `dd(u)` for a reference program on its own inputs.
pub fn reference_dd(
    d: &Program,
    input: &[OutValue],
    metric: &InputMetric,
    opts: &DetOptions,
) -> Result<(Vec<OutValue>, Extended), CheckError> {
    let ins = d.inputs();
    if ins.len() != input.len() {
        return Err(CheckError::Input(format!("expected {} inputs, got {}", ins.len(), input.len())));
    }
    let (mut dom_inputs, mut point) = (Vec::new(), Vec::new());
    for (&v, x) in ins.iter().zip(input) {
        match x {
            OutValue::Dom(k) => dom_inputs.push((v, *k)),
            OutValue::Real(r) => point.push((v, r.clone())),
            OutValue::Unset => return Err(CheckError::Input(format!("input `{}` is unset", d.name(v)))),
        }
    }
    let cells = det_cells(&DetSpec::Program(d.clone()), &dom_inputs, opts)?;
    let out = det_output(&cells, &point)?;
    let dd = dd_at_point(&cells, &point, metric)?;
    Ok((out, dd))
}
