use super::linform::{Constraint, LinForm, Rel, VarId};
use super::lp::{maximize, minimize, LpOutcome};
use crate::symexp::rational::Rational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionStatus {
    Empty,
    Nonempty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entailment {
    Yes,
    No,
    Neither,
}

/// Auxiliary variable id used by the strict-feasibility programs.
const SLACK: VarId = usize::MAX;

/// Conjunction of linear constraints `lhs rel 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub cons: Vec<Constraint>,
}

impl Region {
    pub fn new(cons: Vec<Constraint>) -> Self {
        Region { cons }
    }

    pub fn full() -> Self {
        Self::default()
    }

    pub fn push(&mut self, c: Constraint) {
        self.cons.push(c);
    }

    pub fn with(&self, c: Constraint) -> Region {
        let mut r = self.clone();
        r.push(c);
        r
    }

    pub fn and(&self, o: &Region) -> Region {
        let mut r = self.clone();
        r.cons.extend(o.cons.iter().cloned());
        r
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.cons.iter().flat_map(|c| c.vars()).collect()
    }

    /// Sorted, deduplicated canonical constraints; constant-true constraints dropped.
    pub fn canonical(&self) -> Region {
        let mut v: Vec<Constraint> = self
            .cons
            .iter()
            .filter(|c| c.constant_truth() != Some(true))
            .map(|c| c.canonical())
            .collect();
        v.sort();
        v.dedup();
        drop_parallel(&mut v);
        Region { cons: v }
    }

    /// Integer tightening of every constraint whose variables are all integer.
    pub fn tightened(&self, is_int: &dyn Fn(VarId) -> bool) -> Region {
        Region {
            cons: self
                .cons
                .iter()
                .map(|c| {
                    if !c.lhs.is_constant() && c.vars().all(is_int) {
                        c.tighten_integer()
                    } else {
                        c.clone()
                    }
                })
                .collect(),
        }
    }

    /// Exact emptiness over the reals.
    pub fn status(&self) -> RegionStatus {
        if self.cons.iter().any(|c| c.constant_truth() == Some(false)) {
            return RegionStatus::Empty;
        }
        let strict: Vec<&Constraint> = self.cons.iter().filter(|c| c.rel == Rel::Lt).collect();
        if strict.is_empty() {
            return match maximize(&LinForm::zero(), &self.cons) {
                LpOutcome::Infeasible => RegionStatus::Empty,
                _ => RegionStatus::Nonempty,
            };
        }
        let t = LinForm::var(SLACK);
        let mut cons: Vec<Constraint> = self
            .cons
            .iter()
            .map(|c| match c.rel {
                Rel::Lt => Constraint::le(c.lhs.add(&t)),
                _ => c.clone(),
            })
            .collect();
        cons.push(Constraint::le(t.add_constant(&-Rational::one())));
        match maximize(&t, &cons) {
            LpOutcome::Optimal(v) if v.is_positive() => RegionStatus::Nonempty,
            LpOutcome::Unbounded => RegionStatus::Nonempty,
            _ => RegionStatus::Empty,
        }
    }

    /// Status with integer variables: exact for pure-real regions, a sound
    /// relaxation (EMPTY only when truly empty) otherwise.
    pub fn status_mixed(&self, is_int: &dyn Fn(VarId) -> bool) -> RegionStatus {
        if self.vars().iter().any(|&v| is_int(v)) {
            self.tightened(is_int).status()
        } else {
            self.status()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.status() == RegionStatus::Empty
    }

    /// Nonempty interior in the space of its own variables.
    pub fn has_interior(&self) -> bool {
        if self.cons.iter().any(|c| c.constant_truth() == Some(false)) {
            return false;
        }
        if self
            .cons
            .iter()
            .any(|c| c.rel == Rel::Eq && !c.lhs.is_constant())
        {
            return false;
        }
        let t = LinForm::var(SLACK);
        let mut cons: Vec<Constraint> = self
            .cons
            .iter()
            .filter(|c| !c.lhs.is_constant())
            .map(|c| Constraint::le(c.lhs.add(&t)))
            .collect();
        cons.push(Constraint::le(t.add_constant(&-Rational::one())));
        matches!(maximize(&t, &cons), LpOutcome::Optimal(v) if v.is_positive())
    }

    pub fn sup(&self, l: &LinForm) -> LpOutcome {
        maximize(l, &self.cons)
    }

    pub fn inf(&self, l: &LinForm) -> LpOutcome {
        minimize(l, &self.cons)
    }

    /// Entailment over real variables, measure-theoretic when the region has
    /// interior (boundaries of the constraint are ignored).
    pub fn entails(&self, c: &Constraint) -> Entailment {
        self.entails_mixed(c, &|_| false)
    }

    /// Entailment where variables satisfying `is_int` are integer-valued.
    /// Constraints over integer variables only keep their strictness exactly;
    /// any constraint touching a real variable is decided up to measure zero.
    pub fn entails_mixed(&self, c: &Constraint, is_int: &dyn Fn(VarId) -> bool) -> Entailment {
        if let Some(t) = c.constant_truth() {
            return if t { Entailment::Yes } else { Entailment::No };
        }
        let has_int = self.vars().iter().chain(c.lhs.vars().collect::<Vec<_>>().iter()).any(|&v| is_int(v));
        let base = if has_int { self.tightened(is_int) } else { self.clone() };
        if c.vars().all(is_int) {
            // exact reasoning on the tightened relaxation
            let ct = c.tighten_integer();
            let neg_empty = c
                .negate()
                .iter()
                .all(|n| base.with(n.tighten_integer()).relaxed_empty());
            if neg_empty {
                return Entailment::Yes;
            }
            if base.with(ct).relaxed_empty() {
                return Entailment::No;
            }
            return Entailment::Neither;
        }
        if !has_int && !self.has_interior() {
            return self.entails_exact(c);
        }
        if c.rel == Rel::Eq {
            return Entailment::No;
        }
        let sup = base.sup(&c.lhs);
        match sup {
            LpOutcome::Infeasible => return Entailment::Yes,
            LpOutcome::Optimal(ref v) if !v.is_positive() => return Entailment::Yes,
            _ => {}
        }
        match base.inf(&c.lhs) {
            LpOutcome::Optimal(v) if !v.is_negative() => Entailment::No,
            _ => Entailment::Neither,
        }
    }

    /// Exact set-theoretic entailment over the reals.
    pub fn entails_exact(&self, c: &Constraint) -> Entailment {
        if let Some(t) = c.constant_truth() {
            return if t { Entailment::Yes } else { Entailment::No };
        }
        if c.negate().iter().all(|n| self.with(n.clone()).is_empty()) {
            return Entailment::Yes;
        }
        if self.with(c.clone()).is_empty() {
            return Entailment::No;
        }
        Entailment::Neither
    }

    fn relaxed_empty(&self) -> bool {
        if self.cons.iter().any(|c| c.constant_truth() == Some(false)) {
            return true;
        }
        self.status() == RegionStatus::Empty
    }

    pub fn holds(&self, x: &dyn Fn(VarId) -> Rational) -> bool {
        self.cons.iter().all(|c| c.holds(x))
    }

    pub fn fmt_with(&self, name: &dyn Fn(VarId) -> String) -> String {
        if self.cons.is_empty() {
            return "true".into();
        }
        self.cons
            .iter()
            .map(|c| c.fmt_with(name))
            .collect::<Vec<_>>()
            .join(" & ")
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_with(&|v| format!("x{v}")))
    }
}

/// Among canonical inequalities with identical variable part keep the tightest.
fn drop_parallel(v: &mut Vec<Constraint>) {
    let mut keep = vec![true; v.len()];
    for i in 0..v.len() {
        if v[i].rel == Rel::Eq || !keep[i] {
            continue;
        }
        for j in 0..v.len() {
            if i == j || v[j].rel == Rel::Eq || !keep[j] {
                continue;
            }
            let (a, b) = (&v[i].lhs, &v[j].lhs);
            if a.add_constant(&-a.constant.clone()) != b.add_constant(&-b.constant.clone()) {
                continue;
            }
            // j is implied by i when i's constant is larger (or equal and at least as strict)
            let implied = a.constant > b.constant
                || (a.constant == b.constant && (v[i].rel == Rel::Lt || v[j].rel == Rel::Le));
            if implied {
                keep[j] = false;
            }
        }
    }
    let mut it = keep.iter();
    v.retain(|_| *it.next().unwrap());
}

/// Infimum of the L-infinity distance from `u` to the closure of `r`; `None`
/// when `r` is empty.
pub fn point_distance_linf(u: &[(VarId, Rational)], r: &Region) -> Option<Rational> {
    if r.is_empty() {
        return None;
    }
    let t = LinForm::var(SLACK);
    let mut cons: Vec<Constraint> = r
        .cons
        .iter()
        .map(|c| match c.rel {
            Rel::Lt => Constraint::le(c.lhs.clone()),
            _ => c.clone(),
        })
        .collect();
    for (v, x) in u {
        let d = LinForm::var(*v).add_constant(&-x.clone());
        cons.push(Constraint::le(d.sub(&t)));
        cons.push(Constraint::le(d.neg().sub(&t)));
    }
    cons.push(Constraint::le(t.neg()));
    match minimize(&t, &cons) {
        LpOutcome::Optimal(v) => Some(v),
        LpOutcome::Unbounded => Some(Rational::zero()),
        LpOutcome::Infeasible => None,
    }
}
