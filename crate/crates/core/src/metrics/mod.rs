//! Input and output distances, distance to disagreement, and output balls.

use crate::integrator::{point_distance_linf, Constraint, LinForm, Region, Rel, VarId};
use crate::lang::{CellValue, DetCell, OutValue, Program, Ty, Var};
use crate::semantics::{EventComponent, OutAtom, OutputEvent};
use crate::symexp::rational::{fmt_rational, parse_rational, Rational};
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Nonnegative rational or infinity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Extended {
    Finite(Rational),
    Infinity,
}

impl Extended {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Extended::Finite(r) => Some(r),
            Extended::Infinity => None,
        }
    }

    pub fn parse(s: &str) -> Option<Extended> {
        match s.trim() {
            "inf" | "infinity" | "INFINITY" => Some(Extended::Infinity),
            t => parse_rational(t).ok().map(Extended::Finite),
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(r) => f.write_str(&fmt_rational(r)),
            Extended::Infinity => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("input is not covered by any cell")]
    Uncovered,
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("{0}")]
    Mismatch(String),
    #[error("output space is infinite")]
    InfiniteOutputs,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputMetric {
    Discrete01,
    Linf,
    /// L-infinity, but infinite when some coordinate at or above the
    /// threshold in both points differs.
    NumericSparse(Rational),
}

impl InputMetric {
    pub fn parse(s: &str) -> Result<Self, MetricError> {
        let s = s.trim();
        match s {
            "discrete01" => return Ok(InputMetric::Discrete01),
            "linf" => return Ok(InputMetric::Linf),
            _ => {}
        }
        if let Some(t) = s.strip_prefix("numeric_sparse:") {
            if let Ok(t) = parse_rational(t.trim()) {
                return Ok(InputMetric::NumericSparse(t));
            }
        }
        Err(MetricError::UnknownMetric(s.into()))
    }

    pub fn name(&self) -> String {
        match self {
            InputMetric::Discrete01 => "discrete01".into(),
            InputMetric::Linf => "linf".into(),
            InputMetric::NumericSparse(t) => format!("numeric_sparse:{}", fmt_rational(t)),
        }
    }

    pub fn distance(&self, u: &[Rational], w: &[Rational]) -> Extended {
        let linf = u.iter().zip(w).map(|(a, b)| (a - b).abs()).max().unwrap_or_default();
        match self {
            InputMetric::Discrete01 => Extended::Finite(if u == w { Rational::zero() } else { Rational::one() }),
            InputMetric::Linf => Extended::Finite(linf),
            InputMetric::NumericSparse(t) => {
                if u.iter().zip(w).any(|(a, b)| a >= t && b >= t && a != b) {
                    Extended::Infinity
                } else {
                    Extended::Finite(linf)
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutputMetric {
    Eq01,
    /// max difference of real outputs; DOM outputs act as tags
    LinfReal,
    /// `|u_i - u_j|` between chosen indices
    ValueDiff,
    /// `|F(u, v) - F(u, v')|` for a score table `F`
    UtilityDiff(String),
}

impl OutputMetric {
    pub fn parse(s: &str) -> Result<Self, MetricError> {
        let s = s.trim();
        match s {
            "eq01" => Ok(OutputMetric::Eq01),
            "linf_real" => Ok(OutputMetric::LinfReal),
            "value_diff" => Ok(OutputMetric::ValueDiff),
            _ => match s.strip_prefix("utility_diff:") {
                Some(f) if !f.trim().is_empty() => Ok(OutputMetric::UtilityDiff(f.trim().into())),
                _ => Err(MetricError::UnknownMetric(s.into())),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            OutputMetric::Eq01 => "eq01".into(),
            OutputMetric::LinfReal => "linf_real".into(),
            OutputMetric::ValueDiff => "value_diff".into(),
            OutputMetric::UtilityDiff(f) => format!("utility_diff:{f}"),
        }
    }
}

fn lookup(u: &[(VarId, Rational)], v: VarId) -> Rational {
    u.iter().find(|(w, _)| *w == v).map(|(_, x)| x.clone()).unwrap_or_default()
}

/// Output of the cell containing `u`.
pub fn det_output(cells: &[DetCell], u: &[(VarId, Rational)]) -> Result<Vec<OutValue>, MetricError> {
    let x = |v: VarId| lookup(u, v);
    cells
        .iter()
        .find(|c| c.guard.holds(&x))
        .map(|c| c.outputs.iter().map(|o| o.at(&x)).collect())
        .ok_or(MetricError::Uncovered)
}

/// Pieces of `cell` on which the output differs from `v`.
fn differing(cell: &DetCell, v: &[OutValue]) -> Vec<Region> {
    let mut mismatch = false;
    let mut pieces = Vec::new();
    for (o, want) in cell.outputs.iter().zip(v) {
        match (o, want) {
            (CellValue::Unset, OutValue::Unset) => {}
            (CellValue::Dom(a), OutValue::Dom(b)) if a == b => {}
            (CellValue::Real(l), OutValue::Real(r)) => {
                let d = l.add_constant(&-r.clone());
                if d.is_constant() && d.constant.is_zero() {
                    continue;
                }
                for c in [Constraint::lt(d.clone()), Constraint::lt(d.neg())] {
                    pieces.push(cell.guard.with(c));
                }
            }
            _ => mismatch = true,
        }
    }
    if mismatch {
        return vec![cell.guard.clone()];
    }
    pieces.retain(|r| !r.is_empty());
    pieces
}

/// Distance to disagreement at `u` over the given cells.
pub fn dd_at_point(cells: &[DetCell], u: &[(VarId, Rational)], m: &InputMetric) -> Result<Extended, MetricError> {
    let v = det_output(cells, u)?;
    let mut best = Extended::Infinity;
    for c in cells {
        for piece in differing(c, &v) {
            let d = match m {
                InputMetric::Discrete01 => Some(Rational::one()),
                InputMetric::Linf => point_distance_linf(u, &piece),
                InputMetric::NumericSparse(t) => numeric_sparse_distance(u, &piece, t),
            };
            if let Some(d) = d {
                best = best.min(Extended::Finite(d));
            }
        }
    }
    Ok(best)
}

/// Finite-distance infimum under the threshold metric: every coordinate at
/// or above `t` must either stay put or drop below `t`.
fn numeric_sparse_distance(u: &[(VarId, Rational)], piece: &Region, t: &Rational) -> Option<Rational> {
    let high: Vec<&(VarId, Rational)> = u.iter().filter(|(_, x)| x >= t).collect();
    let mut best: Option<Rational> = None;
    for mask in 0u64..(1 << high.len()) {
        let mut r = piece.clone();
        for (i, (v, x)) in high.iter().enumerate() {
            let lv = LinForm::var(*v);
            if mask >> i & 1 == 1 {
                r.push(Constraint::eq(lv.add_constant(&-x.clone())));
            } else {
                r.push(Constraint::new(lv.add_constant(&-t.clone()), Rel::Lt));
            }
        }
        if let Some(d) = point_distance_linf(u, &r) {
            best = Some(best.map_or(d.clone(), |b: Rational| b.min(d)));
        }
    }
    best
}

/// Evaluation context for output metrics at input `u`.
pub struct OutputContext<'a> {
    pub program: &'a Program,
    /// real inputs in declaration order
    pub reals: &'a [Rational],
    /// DOM inputs in declaration order
    pub doms: &'a [i64],
}

impl OutputContext<'_> {
    fn single_dom(&self, v: &[(Var, OutValue)]) -> Result<(Var, i64), MetricError> {
        match v {
            [(o, OutValue::Dom(x))] if self.program.ty(*o) == Ty::Dom => Ok((*o, *x)),
            _ => Err(MetricError::Mismatch("metric needs exactly one DOM output with a value".into())),
        }
    }

    fn value_at(&self, i: i64) -> Result<&Rational, MetricError> {
        usize::try_from(i - 1)
            .ok()
            .and_then(|k| self.reals.get(k))
            .ok_or_else(|| MetricError::Mismatch(format!("index {i} is not a query index")))
    }

    fn score(&self, f: &str, x: i64) -> Result<Rational, MetricError> {
        let t = self
            .program
            .scores
            .get(f)
            .ok_or_else(|| MetricError::Mismatch(format!("no score table `{f}`")))?;
        let row = t
            .rows
            .get(self.doms)
            .ok_or_else(|| MetricError::Mismatch(format!("score table `{f}` has no row {:?}", self.doms)))?;
        row.iter()
            .find(|(c, _)| *c == x)
            .map(|(_, s)| s.clone())
            .ok_or_else(|| MetricError::Mismatch(format!("{x} is not a candidate of `{f}`")))
    }

    fn candidates(&self, m: &OutputMetric) -> Result<Vec<i64>, MetricError> {
        match m {
            OutputMetric::ValueDiff => Ok((1..=self.reals.len() as i64).collect()),
            OutputMetric::UtilityDiff(f) => match self.program.scores.get(f).and_then(|t| t.rows.get(self.doms)) {
                Some(row) => Ok(row.iter().map(|(c, _)| *c).collect()),
                None => Err(MetricError::Mismatch(format!("score table `{f}` has no row {:?}", self.doms))),
            },
            _ => unreachable!(),
        }
    }

    /// `d'_u(v, w)`.
    pub fn distance(&self, m: &OutputMetric, v: &[(Var, OutValue)], w: &[(Var, OutValue)]) -> Result<Extended, MetricError> {
        match m {
            OutputMetric::Eq01 => Ok(Extended::Finite(if v == w { Rational::zero() } else { Rational::one() })),
            OutputMetric::LinfReal => {
                let mut d = Rational::zero();
                for ((_, a), (_, b)) in v.iter().zip(w) {
                    match (a, b) {
                        (OutValue::Real(x), OutValue::Real(y)) => d = d.max((x - y).abs()),
                        _ if a == b => {}
                        _ => return Ok(Extended::Infinity),
                    }
                }
                Ok(Extended::Finite(d))
            }
            OutputMetric::ValueDiff => {
                let (_, i) = self.single_dom(v)?;
                let (_, j) = self.single_dom(w)?;
                Ok(Extended::Finite((self.value_at(i)? - self.value_at(j)?).abs()))
            }
            OutputMetric::UtilityDiff(f) => {
                let (_, i) = self.single_dom(v)?;
                let (_, j) = self.single_dom(w)?;
                Ok(Extended::Finite((self.score(f, i)? - self.score(f, j)?).abs()))
            }
        }
    }

    /// The event `{w : d'_u(v, w) <= gamma}`.
    pub fn ball(&self, m: &OutputMetric, v: &[(Var, OutValue)], gamma: &Rational) -> Result<OutputEvent, MetricError> {
        let p = self.program;
        match m {
            OutputMetric::Eq01 | OutputMetric::LinfReal => {
                if *m == OutputMetric::Eq01 && *gamma >= Rational::one() {
                    return Ok(OutputEvent::terminated());
                }
                let radius = if *m == OutputMetric::Eq01 { Rational::zero() } else { gamma.clone() };
                let mut c = EventComponent::default();
                for (o, x) in v {
                    match (p.ty(*o), x) {
                        (_, OutValue::Unset) => c.atoms.push((*o, OutAtom::Unset)),
                        (Ty::Dom, OutValue::Dom(d)) => c.atoms.push((*o, OutAtom::Dom(*d))),
                        (Ty::Real, OutValue::Real(r)) => {
                            let d = LinForm::var(*o).add_constant(&-r.clone());
                            if radius.is_zero() {
                                c.region.push(Constraint::eq(d));
                            } else {
                                c.region.push(Constraint::le(d.add_constant(&-radius.clone())));
                                c.region.push(Constraint::le(d.neg().add_constant(&-radius.clone())));
                            }
                        }
                        _ => return Err(MetricError::Mismatch(format!("value {x:?} does not fit output `{}`", p.name(*o)))),
                    }
                }
                Ok(OutputEvent::single(c))
            }
            OutputMetric::ValueDiff | OutputMetric::UtilityDiff(_) => {
                let (o, _) = self.single_dom(v)?;
                let mut ev = OutputEvent::default();
                for j in self.candidates(m)? {
                    let w = [(o, OutValue::Dom(j))];
                    if let Extended::Finite(d) = self.distance(m, v, &w)? {
                        if d <= *gamma {
                            ev.components.push(EventComponent {
                                atoms: vec![(o, OutAtom::Dom(j))],
                                region: Region::full(),
                            });
                        }
                    }
                }
                Ok(ev)
            }
        }
    }

    /// Sorted distinct finite distances from `v` to `outputs`, each with the
    /// indices of the outputs in the ball of that radius.
    pub fn distinct_distances(
        &self,
        m: &OutputMetric,
        v: &[(Var, OutValue)],
        outputs: &[Vec<(Var, OutValue)>],
    ) -> Result<Vec<(Rational, Vec<usize>)>, MetricError> {
        if self.program.outputs().iter().any(|&o| self.program.ty(o) == Ty::Real) {
            return Err(MetricError::InfiniteOutputs);
        }
        let ds: Vec<Extended> = outputs.iter().map(|w| self.distance(m, v, w)).collect::<Result<_, _>>()?;
        let mut cs: Vec<Rational> = ds.iter().filter_map(|d| d.finite().cloned()).collect();
        cs.push(Rational::zero());
        cs.sort();
        cs.dedup();
        Ok(cs
            .into_iter()
            .map(|c| {
                let inside = (0..outputs.len())
                    .filter(|&i| matches!(&ds[i], Extended::Finite(d) if *d <= c))
                    .collect();
                (c, inside)
            })
            .collect())
    }
}
