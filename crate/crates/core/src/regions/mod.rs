//! Admissible regions: beta expressions in (alpha, gamma, eps) and linear
//! tags restricting the admissible (alpha, gamma) pairs.

use crate::integrator::{maximize, Constraint, LinForm, LpOutcome, Region, RegionStatus, Rel};
use crate::lang::syntax::{BinOp, PExpr, Parser};
use crate::metrics::Extended;
use crate::symexp::rational::{fmt_rational, Rational};
use crate::symexp::text::{parse_general, GenKey, GenSum, TextError};
use crate::symexp::LaurentExpPoly;
use num_traits::{Signed, Zero};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RegionError {
    #[error(transparent)]
    Text(#[from] TextError),
    #[error("beta diverges as {0} grows: term {1}")]
    Divergent(&'static str, String),
    #[error("bad tag: {0}")]
    Tag(String),
}

/// `sum c * eps^k * exp((q0 + qa*alpha + qg*gamma)*eps)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaExpr {
    pub terms: GenSum,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Ok,
    Violation(String),
}

fn term_text(k: &GenKey, c: &Rational) -> String {
    let mut s = fmt_rational(c);
    if k.k != 0 {
        s.push_str(&format!("*eps^{}", k.k));
    }
    if !(k.q0.is_zero() && k.qa.is_zero() && k.qg.is_zero()) {
        s.push_str(&format!(
            "*exp(({} + {}*alpha + {}*gamma)*eps)",
            fmt_rational(&k.q0),
            fmt_rational(&k.qa),
            fmt_rational(&k.qg)
        ));
    }
    s
}

impl fmt::Display for BetaExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let ts: Vec<String> = self.terms.iter().map(|(k, c)| term_text(k, c)).collect();
        f.write_str(&ts.join(" + "))
    }
}

impl BetaExpr {
    pub fn parse(s: &str) -> Result<Self, RegionError> {
        Ok(BetaExpr { terms: parse_general(s)? })
    }

    pub fn scale(&self, l: &Rational) -> Self {
        let mut terms = GenSum::new();
        if !l.is_zero() {
            for (k, c) in &self.terms {
                terms.insert(k.clone(), c * l);
            }
        }
        BetaExpr { terms }
    }

    /// Exact instantiation; an infinite argument takes the pointwise limit.
    pub fn substitute(&self, alpha: &Extended, gamma: &Extended) -> Result<LaurentExpPoly, RegionError> {
        let mut out = LaurentExpPoly::zero();
        for (k, c) in &self.terms {
            let mut q = k.q0.clone();
            let mut vanish = false;
            for (name, coeff, x) in [("alpha", &k.qa, alpha), ("gamma", &k.qg, gamma)] {
                match x {
                    Extended::Finite(v) => q += coeff * v,
                    Extended::Infinity if coeff.is_positive() => {
                        return Err(RegionError::Divergent(name, term_text(k, c)))
                    }
                    Extended::Infinity if coeff.is_negative() => vanish = true,
                    Extended::Infinity => {}
                }
            }
            if !vanish {
                out.add_term(c.clone(), k.k, q);
            }
        }
        Ok(out)
    }

    /// Sufficient syntactic test for beta being nonincreasing in alpha and gamma.
    pub fn validate_antimonotone(&self) -> Monotonicity {
        for (k, c) in &self.terms {
            let ok = if c.is_positive() {
                !k.qa.is_positive() && !k.qg.is_positive()
            } else {
                !k.qa.is_negative() && !k.qg.is_negative()
            };
            if !ok {
                return Monotonicity::Violation(term_text(k, c));
            }
        }
        Monotonicity::Ok
    }

    pub fn mentions_alpha(&self) -> bool {
        self.terms.keys().any(|k| !k.qa.is_zero())
    }
}

/// Variable ids of alpha and gamma in tag constraints.
pub const ALPHA: usize = 0;
pub const GAMMA: usize = 1;

/// Conjunction of linear constraints over (alpha, gamma); empty means all
/// pairs with alpha, gamma >= 0.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tag {
    pub cons: Vec<Constraint>,
}

impl Tag {
    /// Comma-separated comparisons such as `alpha <= 2*gamma, gamma < 3`.
    pub fn parse(s: &str) -> Result<Self, RegionError> {
        let mut cons = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let e = Parser::expr_only(part).map_err(|e| RegionError::Tag(e.message))?;
            let PExpr::Bin(op, l, r) = e else {
                return Err(RegionError::Tag(format!("`{part}` is not a comparison")));
            };
            let (a, b) = (tag_linear(&l)?, tag_linear(&r)?);
            cons.push(match op {
                BinOp::Lt => Constraint::cmp(&a, Rel::Lt, &b),
                BinOp::Le => Constraint::cmp(&a, Rel::Le, &b),
                BinOp::Gt => Constraint::cmp(&b, Rel::Lt, &a),
                BinOp::Ge => Constraint::cmp(&b, Rel::Le, &a),
                BinOp::Eq => Constraint::cmp(&a, Rel::Eq, &b),
                _ => return Err(RegionError::Tag(format!("unsupported relation in `{part}`"))),
            });
        }
        Ok(Tag { cons })
    }

    pub fn text(&self) -> String {
        let name = |v: usize| if v == ALPHA { "alpha".to_string() } else { "gamma".to_string() };
        self.cons.iter().map(|c| c.fmt_with(&name)).collect::<Vec<_>>().join(", ")
    }

    /// Admissible pairs together with `extra`.
    pub fn region(&self, extra: &[Constraint]) -> Region {
        let mut cons = self.cons.clone();
        cons.push(Constraint::le(LinForm::var(ALPHA).neg()));
        cons.push(Constraint::le(LinForm::var(GAMMA).neg()));
        cons.extend(extra.iter().cloned());
        Region::new(cons)
    }
}

fn tag_linear(e: &PExpr) -> Result<LinForm, RegionError> {
    Ok(match e {
        PExpr::Num(c, _) => LinForm::constant(c.clone()),
        PExpr::Name(n) if n == "alpha" => LinForm::var(ALPHA),
        PExpr::Name(n) if n == "gamma" => LinForm::var(GAMMA),
        PExpr::Neg(a) => tag_linear(a)?.neg(),
        PExpr::Bin(BinOp::Add, a, b) => tag_linear(a)?.add(&tag_linear(b)?),
        PExpr::Bin(BinOp::Sub, a, b) => tag_linear(a)?.sub(&tag_linear(b)?),
        PExpr::Bin(BinOp::Mul, a, b) => {
            let (x, y) = (tag_linear(a)?, tag_linear(b)?);
            if x.is_constant() {
                y.scale(&x.constant)
            } else if y.is_constant() {
                x.scale(&y.constant)
            } else {
                return Err(RegionError::Tag("nonlinear tag".into()));
            }
        }
        PExpr::Bin(BinOp::Div, a, b) => {
            let y = tag_linear(b)?;
            if !y.is_constant() || y.constant.is_zero() {
                return Err(RegionError::Tag("division by a non-constant".into()));
            }
            tag_linear(a)?.scale(&y.constant.recip())
        }
        _ => return Err(RegionError::Tag("only alpha, gamma and rationals may appear".into())),
    })
}

/// Supremum of `obj` over a region, or `None` when the region is empty.
pub fn sup(region: &Region, obj: &LinForm) -> Option<Extended> {
    if region.status() == RegionStatus::Empty {
        return None;
    }
    let closed: Vec<Constraint> = region
        .cons
        .iter()
        .map(|c| match c.rel {
            Rel::Lt => Constraint::le(c.lhs.clone()),
            _ => c.clone(),
        })
        .collect();
    match maximize(obj, &closed) {
        LpOutcome::Optimal(v) => Some(Extended::Finite(v)),
        LpOutcome::Unbounded => Some(Extended::Infinity),
        LpOutcome::Infeasible => None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AlphaMode {
    Fixed(Rational),
    /// alpha ranges up to the distance to disagreement
    Dd,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GammaMode {
    Fixed(Rational),
    FiniteOutputSweep,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionSpec {
    pub beta: BetaExpr,
    pub alpha_mode: AlphaMode,
    pub gamma_mode: GammaMode,
    pub tag: Tag,
}
