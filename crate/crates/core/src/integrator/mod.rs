//! Exact probabilities of polyhedral events under products of Laplace and
//! discrete Laplace densities.

pub mod integrand;
pub mod linform;
pub mod lp;
pub mod region;

pub use integrand::{Bound, Integrand, IntegrandError};
pub use linform::{Constraint, LinForm, Rel, VarId};
pub use lp::{maximize, minimize, LpOutcome};
pub use region::{point_distance_linf, Entailment, Region, RegionStatus};

use crate::symexp::rational::{int, Rational};
use crate::symexp::{ExpRational, LaurentExpPoly};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NoiseKind {
    Lap,
    DLap,
}

/// `var ~ kind(scale * eps, mean)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SampleRecord {
    pub var: VarId,
    pub kind: NoiseKind,
    pub scale: Rational,
    pub mean: LinForm,
}

impl SampleRecord {
    pub fn lap(var: VarId, scale: Rational, mean: LinForm) -> Self {
        SampleRecord {
            var,
            kind: NoiseKind::Lap,
            scale,
            mean,
        }
    }

    pub fn dlap(var: VarId, scale: Rational, mean: LinForm) -> Self {
        SampleRecord {
            var,
            kind: NoiseKind::DLap,
            scale,
            mean,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum IntegrationError {
    #[error("variable x{0} is not a sampled variable")]
    UndeclaredVariable(VarId),
    #[error("invalid sample record for x{0}: {1}")]
    InvalidSample(VarId, String),
    #[error(transparent)]
    NonDecaying(#[from] IntegrandError),
    #[error("unsupported constraint shape: {0}")]
    Unsupported(String),
}

#[derive(Clone, Debug)]
pub struct IntegrationOptions {
    /// Skip integration of groups of samples the event does not constrain.
    pub factor_free_components: bool,
    /// Record a line-oriented trace of the elimination.
    pub trace: bool,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            factor_free_components: true,
            trace: false,
        }
    }
}

pub fn joint_probability(samples: &[SampleRecord], event: &Region) -> Result<ExpRational, IntegrationError> {
    joint_probability_with(samples, event, &IntegrationOptions::default()).map(|r| r.0)
}

/// Probability and the elimination trace (empty unless requested).
pub fn joint_probability_with(
    samples: &[SampleRecord],
    event: &Region,
    opts: &IntegrationOptions,
) -> Result<(ExpRational, Vec<String>), IntegrationError> {
    let mut trace = Vec::new();
    let pos: HashMap<VarId, usize> = samples.iter().enumerate().map(|(i, s)| (s.var, i)).collect();
    for s in samples {
        if !s.scale.is_positive() {
            return Err(IntegrationError::InvalidSample(s.var, "scale must be positive".into()));
        }
        for v in s.mean.vars() {
            if !pos.contains_key(&v) {
                return Err(IntegrationError::UndeclaredVariable(v));
            }
        }
        if s.kind == NoiseKind::DLap
            && (!s.mean.is_integral() || s.mean.vars().any(|v| samples[pos[&v]].kind != NoiseKind::DLap))
        {
            return Err(IntegrationError::InvalidSample(
                s.var,
                "discrete Laplace mean must be an integer form over integer variables".into(),
            ));
        }
    }
    let is_int = |v: VarId| pos.get(&v).is_some_and(|&i| samples[i].kind == NoiseKind::DLap);
    let mut cons = Vec::new();
    for c in &event.cons {
        for v in c.vars() {
            if !pos.contains_key(&v) {
                return Err(IntegrationError::UndeclaredVariable(v));
            }
        }
        match c.constant_truth() {
            Some(true) => continue,
            Some(false) => return Ok((ExpRational::zero(), trace)),
            None => {}
        }
        if c.rel == Rel::Eq && c.vars().any(|v| !is_int(v)) {
            // a hyperplane through a continuous coordinate has measure zero
            return Ok((ExpRational::zero(), trace));
        }
        let n = normalize(c, &is_int);
        match n.constant_truth() {
            Some(true) => continue,
            Some(false) => return Ok((ExpRational::zero(), trace)),
            None => cons.push(n),
        }
    }

    // connected components over samples (means and constraints link variables)
    let mut uf: Vec<usize> = (0..samples.len()).collect();
    fn find(uf: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while uf[r] != r {
            r = uf[r];
        }
        let mut i = i;
        while uf[i] != r {
            let n = uf[i];
            uf[i] = r;
            i = n;
        }
        r
    }
    let union = |uf: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(uf, a), find(uf, b));
        if ra != rb {
            uf[ra] = rb;
        }
    };
    for (i, s) in samples.iter().enumerate() {
        for v in s.mean.vars() {
            union(&mut uf, i, pos[&v]);
        }
    }
    for c in &cons {
        let vs: Vec<usize> = c.vars().map(|v| pos[&v]).collect();
        for w in vs.windows(2) {
            union(&mut uf, w[0], w[1]);
        }
    }
    let mut comps: BTreeMap<usize, (Vec<&SampleRecord>, Vec<Constraint>)> = BTreeMap::new();
    for (i, s) in samples.iter().enumerate() {
        let r = find(&mut uf, i);
        comps.entry(r).or_default().0.push(s);
    }
    for c in &cons {
        let r = find(&mut uf, pos[&c.vars().next().unwrap()]);
        comps.get_mut(&r).unwrap().1.push(c.clone());
    }
    let mut result = ExpRational::one();
    for (_, (ss, cs)) in comps {
        if cs.is_empty() && opts.factor_free_components {
            continue;
        }
        let p = integrate_component(&ss, cs, &is_int, opts.trace.then_some(&mut trace))?;
        if p.is_zero() {
            return Ok((ExpRational::zero(), trace));
        }
        result = &result * &p;
    }
    Ok((result, trace))
}

/// Continuous constraints become closed; integer-only ones are tightened.
fn normalize(c: &Constraint, is_int: &dyn Fn(VarId) -> bool) -> Constraint {
    if c.lhs.is_constant() {
        return c.clone();
    }
    if c.vars().all(is_int) {
        return c.tighten_integer();
    }
    let rel = if c.rel == Rel::Lt { Rel::Le } else { c.rel };
    Constraint::new(c.lhs.clone(), rel).canonical()
}

/// Normalized, sorted key; `None` when some constraint is constant false.
fn piece_key(cons: Vec<Constraint>, is_int: &dyn Fn(VarId) -> bool) -> Option<Vec<Constraint>> {
    let mut out = Vec::with_capacity(cons.len());
    for c in cons {
        let n = normalize(&c, is_int);
        match n.constant_truth() {
            Some(true) => {}
            Some(false) => return None,
            None => out.push(n),
        }
    }
    let r = Region::new(out).canonical();
    Some(r.cons)
}

/// Positive measure is possible (sound: false only when the measure is zero).
fn viable(cons: &[Constraint], is_int: &dyn Fn(VarId) -> bool) -> bool {
    if cons.is_empty() {
        return true;
    }
    let r = Region::new(cons.to_vec());
    if r.vars().iter().any(|&v| is_int(v)) {
        r.status() == RegionStatus::Nonempty
    } else {
        r.has_interior()
    }
}

type Pieces = HashMap<Vec<Constraint>, Integrand>;

fn add_piece(pieces: &mut Pieces, key: Vec<Constraint>, f: Integrand) {
    if f.is_zero() {
        return;
    }
    match pieces.get_mut(&key) {
        Some(g) => {
            g.add_assign(&f);
            if g.is_zero() {
                pieces.remove(&key);
            }
        }
        None => {
            pieces.insert(key, f);
        }
    }
}

fn integrate_component(
    samples: &[&SampleRecord],
    cons: Vec<Constraint>,
    is_int: &dyn Fn(VarId) -> bool,
    mut trace: Option<&mut Vec<String>>,
) -> Result<ExpRational, IntegrationError> {
    let mut c0 = Rational::one();
    let mut k0 = 0;
    for s in samples {
        if s.kind == NoiseKind::Lap {
            c0 *= &s.scale / int(2);
            k0 += 1;
        }
    }
    let mut pieces: Pieces = HashMap::new();
    match piece_key(cons, is_int) {
        Some(key) => {
            if viable(&key, is_int) {
                pieces.insert(key, Integrand::constant(c0, k0));
            }
        }
        None => return Ok(ExpRational::zero()),
    }
    let mut order: Vec<&SampleRecord> = samples.iter().rev().filter(|s| s.kind == NoiseKind::Lap).copied().collect();
    order.extend(samples.iter().rev().filter(|s| s.kind == NoiseKind::DLap).copied());
    let mut pending: Vec<&SampleRecord> = samples.to_vec();
    for s in &order {
        let v = s.var;
        let (now, later): (Vec<&SampleRecord>, Vec<&SampleRecord>) =
            pending.into_iter().partition(|p| p.var == v || p.mean.has_var(v));
        pending = later;
        for p in now {
            pieces = split_abs(pieces, p, is_int);
        }
        let before = pieces.len();
        pieces = eliminate(pieces, s, is_int)?;
        if let Some(t) = trace.as_deref_mut() {
            t.push(format!("eliminate x{v} ({:?}): {before} -> {} pieces", s.kind, pieces.len()));
            let mut keys: Vec<_> = pieces.iter().collect();
            keys.sort_by(|a, b| a.0.cmp(b.0));
            for (k, f) in keys {
                t.push(format!("  [{}] {} terms", Region::new(k.clone()), f.len()));
            }
        }
    }
    let mut total = Integrand::zero();
    for (key, f) in pieces {
        debug_assert!(key.is_empty(), "constraints left after elimination");
        total.add_assign(&f);
    }
    assemble(&total, samples)
}

fn split_abs(pieces: Pieces, s: &SampleRecord, is_int: &dyn Fn(VarId) -> bool) -> Pieces {
    let d = LinForm::var(s.var).sub(&s.mean);
    let mut out = Pieces::new();
    let plus_c = Constraint::le(d.neg());
    let minus_c = match s.kind {
        NoiseKind::Lap => Constraint::le(d.clone()),
        NoiseKind::DLap => Constraint::le(d.add_constant(&Rational::one())),
    };
    let plus_f = d.scale(&-s.scale.clone());
    let minus_f = d.scale(&s.scale);
    for (cons, f) in pieces {
        for (c, e) in [(&plus_c, &plus_f), (&minus_c, &minus_f)] {
            let mut cs = cons.clone();
            cs.push(c.clone());
            let Some(key) = piece_key(cs, is_int) else { continue };
            if !viable(&key, is_int) {
                continue;
            }
            add_piece(&mut out, key, f.mul_exp(e));
        }
    }
    out
}

fn eliminate(pieces: Pieces, s: &SampleRecord, is_int: &dyn Fn(VarId) -> bool) -> Result<Pieces, IntegrationError> {
    let v = s.var;
    let discrete = s.kind == NoiseKind::DLap;
    let mut out = Pieces::new();
    for (cons, f) in pieces {
        let (with, others): (Vec<Constraint>, Vec<Constraint>) = cons.into_iter().partition(|c| c.lhs.has_var(v));
        if discrete {
            if let Some(eq) = with.iter().find(|c| c.rel == Rel::Eq) {
                let (a, rest) = eq.lhs.split_var(v);
                if a.abs() != Rational::one() {
                    return Err(IntegrationError::Unsupported(format!("non-unit coefficient in {eq}")));
                }
                let b = rest.scale(&-a.recip());
                let mut cs = others.clone();
                cs.extend(with.iter().map(|c| Constraint::new(c.lhs.substitute(v, &b), c.rel)));
                let Some(key) = piece_key(cs, is_int) else { continue };
                if viable(&key, is_int) {
                    add_piece(&mut out, key, f.substitute(v, &b));
                }
                continue;
            }
        }
        let mut lowers: Vec<LinForm> = Vec::new();
        let mut uppers: Vec<LinForm> = Vec::new();
        for c in &with {
            let (a, rest) = c.lhs.split_var(v);
            if discrete && a.abs() != Rational::one() {
                return Err(IntegrationError::Unsupported(format!("non-unit coefficient in {c}")));
            }
            let b = rest.scale(&-a.recip());
            let list = if a.is_positive() { &mut uppers } else { &mut lowers };
            if !list.contains(&b) {
                list.push(b);
            }
        }
        let lo_choices: Vec<Option<usize>> = if lowers.is_empty() { vec![None] } else { (0..lowers.len()).map(Some).collect() };
        let hi_choices: Vec<Option<usize>> = if uppers.is_empty() { vec![None] } else { (0..uppers.len()).map(Some).collect() };
        for &j in &lo_choices {
            for &k in &hi_choices {
                let mut cs = others.clone();
                if let Some(j) = j {
                    for (j2, l2) in lowers.iter().enumerate() {
                        if j2 != j {
                            let rel = if j2 < j { Rel::Lt } else { Rel::Le };
                            cs.push(Constraint::new(l2.sub(&lowers[j]), rel));
                        }
                    }
                }
                if let Some(k) = k {
                    for (k2, u2) in uppers.iter().enumerate() {
                        if k2 != k {
                            let rel = if k2 < k { Rel::Lt } else { Rel::Le };
                            cs.push(Constraint::new(uppers[k].sub(u2), rel));
                        }
                    }
                }
                if let (Some(j), Some(k)) = (j, k) {
                    cs.push(Constraint::le(lowers[j].sub(&uppers[k])));
                }
                let Some(key) = piece_key(cs, is_int) else { continue };
                if !viable(&key, is_int) {
                    continue;
                }
                let lo = j.map_or(Bound::NegInf, |j| Bound::At(lowers[j].clone()));
                let hi = k.map_or(Bound::PosInf, |k| Bound::At(uppers[k].clone()));
                let g = if discrete { f.sum(v, &lo, &hi)? } else { f.integrate(v, &lo, &hi)? };
                add_piece(&mut out, key, g);
            }
        }
    }
    Ok(out)
}

/// Clear the `(1 - exp(-s eps))` factors into one quotient and attach the
/// discrete Laplace normalizers.
fn assemble(total: &Integrand, samples: &[&SampleRecord]) -> Result<ExpRational, IntegrationError> {
    let mut rmax: BTreeMap<Rational, u32> = BTreeMap::new();
    for (key, _) in total.terms() {
        debug_assert!(key.mono.is_empty() && key.expo.is_constant());
        for (s, r) in &key.den {
            let e = rmax.entry(s.clone()).or_insert(0);
            *e = (*e).max(*r);
        }
    }
    let mut num = LaurentExpPoly::zero();
    for (key, c) in total.terms() {
        let mut t = LaurentExpPoly::term(c.clone(), key.k, key.expo.constant.clone());
        for (s, rm) in &rmax {
            let r = key.den.iter().find(|(s2, _)| s2 == s).map_or(0, |p| p.1);
            if rm > &r {
                t = &t * &LaurentExpPoly::one_minus_exp(s).pow(rm - r);
            }
        }
        num = &num + &t;
    }
    let mut plus_factors = Vec::new();
    for s in samples {
        if s.kind == NoiseKind::DLap {
            match rmax.get_mut(&s.scale) {
                Some(r) if *r > 0 => *r -= 1,
                _ => num = &num * &LaurentExpPoly::one_minus_exp(&s.scale),
            }
            plus_factors.push(s.scale.clone());
        }
    }
    for (s, r) in rmax.iter_mut() {
        while *r > 0 {
            match div_one_minus_exp(&num, s) {
                Some(q) => {
                    num = q;
                    *r -= 1;
                }
                None => break,
            }
        }
    }
    let mut den = LaurentExpPoly::one();
    for (s, r) in &rmax {
        if *r > 0 {
            den = &den * &LaurentExpPoly::one_minus_exp(s).pow(*r);
        }
    }
    for a in plus_factors {
        let mut p = LaurentExpPoly::one();
        p.add_term(Rational::one(), 0, -a);
        den = &den * &p;
    }
    Ok(ExpRational::from_parts(num, den))
}

/// Exact quotient `f / (1 - exp(-s eps))` when it is again a Laurent
/// exponential polynomial.
pub fn div_one_minus_exp(f: &LaurentExpPoly, s: &Rational) -> Option<LaurentExpPoly> {
    if f.is_zero() {
        return Some(LaurentExpPoly::zero());
    }
    let l = f
        .terms()
        .map(|(_, _, q)| q.denom().clone())
        .fold(s.denom().clone(), |a, d| a.lcm(&d));
    let lq = Rational::from_integer(l.clone());
    let m = (s * &lq).to_integer().to_i64()?;
    let mut groups: BTreeMap<i32, BTreeMap<i64, Rational>> = BTreeMap::new();
    for (c, k, q) in f.terms() {
        let e = (q * &lq).to_integer().to_i64()?;
        groups.entry(k).or_default().insert(e, c.clone());
    }
    let mut out = LaurentExpPoly::zero();
    for (k, mut p) in groups {
        // f_k = sum c u^e with u = exp(eps / L); f_k / (1 - u^-m) = u^m f_k / (u^m - 1)
        let mut quot: BTreeMap<i64, Rational> = BTreeMap::new();
        let emin = *p.keys().next().unwrap();
        let mut guard = 0usize;
        while let Some((&d, _)) = p.iter().next_back() {
            guard += 1;
            if guard > 1_000_000 {
                return None;
            }
            let c = p.remove(&d).unwrap();
            if d - m < emin {
                return None;
            }
            *quot.entry(d - m).or_insert_with(Rational::zero) += &c;
            let e = p.entry(d - m).or_insert_with(Rational::zero);
            *e += &c;
            if e.is_zero() {
                p.remove(&(d - m));
            }
        }
        for (e, c) in quot {
            out.add_term(c, k, Rational::new(BigInt::from(e + m), l.clone()));
        }
    }
    Some(out)
}
