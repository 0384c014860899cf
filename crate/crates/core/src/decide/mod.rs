//! Certified sign determination for functions of eps on (0, inf).

use crate::symexp::rational::{int, Rational};
use crate::symexp::{
    dominant_term_at_infinity, vanishing_order_at_zero, Dyadic, Encloser, ExpRational,
    LaurentExpPoly, Vanishing,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPolicy {
    #[default]
    Strict,
    SymbolicFactor,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecideOptions {
    pub schedule: Vec<u32>,
    pub max_depth: u32,
    pub policy: ZeroPolicy,
    pub max_intervals: usize,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            schedule: vec![20, 40, 80],
            max_depth: 60,
            policy: ZeroPolicy::Strict,
            max_intervals: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SignVerdict {
    NonNeg,
    FoundNeg { eps0: Rational, upper: Dyadic },
    Unknown(String),
}

impl SignVerdict {
    pub fn is_nonneg(&self) -> bool {
        matches!(self, SignVerdict::NonNeg)
    }
    pub fn is_found_neg(&self) -> bool {
        matches!(self, SignVerdict::FoundNeg { .. })
    }
}

/// Sign of `f` on all of (0, inf). The denominator is positive by construction,
/// so only the numerator is analysed.
pub fn sign_on_positive_reals(f: &ExpRational, opts: &DecideOptions) -> SignVerdict {
    sign_laurent(f.num(), opts)
}

/// Sign of `p - (1 - beta)`.
pub fn check_inequality(p: &ExpRational, beta: &LaurentExpPoly, opts: &DecideOptions) -> SignVerdict {
    let num = p.num() - p.den() + beta * p.den();
    sign_laurent(&num, opts)
}

pub fn sign_laurent(g: &LaurentExpPoly, opts: &DecideOptions) -> SignVerdict {
    let g = match opts.policy {
        ZeroPolicy::Strict => g.clone(),
        ZeroPolicy::SymbolicFactor => remove_factors(g),
    };
    Analysis::new(&g, opts, false).run()
}

/// True when `g > 0` everywhere on (0, inf) is certified.
pub fn certify_positive(g: &LaurentExpPoly) -> bool {
    if g.is_zero() {
        return false;
    }
    if g.terms().all(|(c, _, _)| c.is_positive()) {
        return true;
    }
    let opts = DecideOptions::default();
    matches!(Analysis::new(g, &opts, true).run(), SignVerdict::NonNeg)
}

struct Analysis<'a> {
    g: &'a LaurentExpPoly,
    enc: Encloser,
    opts: &'a DecideOptions,
    strict: bool,
}

impl<'a> Analysis<'a> {
    fn new(g: &'a LaurentExpPoly, opts: &'a DecideOptions, strict: bool) -> Self {
        Analysis {
            g,
            enc: Encloser::new(g),
            opts,
            strict,
        }
    }

    /// Negative at `x` at every precision of the schedule.
    fn certify_neg(&self, x: &Rational) -> Option<Dyadic> {
        let mut up = None;
        for &p in &self.opts.schedule {
            let e = self.enc.point(x, p);
            if e.hi.signum() >= 0 {
                return None;
            }
            up = Some(e.hi);
        }
        up
    }

    fn find_neg(&self, x: &Rational) -> Option<SignVerdict> {
        self.certify_neg(x).map(|upper| SignVerdict::FoundNeg {
            eps0: x.clone(),
            upper,
        })
    }

    fn run(&self) -> SignVerdict {
        if self.g.is_zero() {
            return if self.strict {
                SignVerdict::Unknown("identically zero".into())
            } else {
                SignVerdict::NonNeg
            };
        }
        if let Some(c) = self.g.as_constant() {
            return if c.is_negative() {
                SignVerdict::FoundNeg {
                    eps0: Rational::one(),
                    upper: Dyadic::from_rational(&c, 64, crate::symexp::Dir::Up),
                }
            } else {
                SignVerdict::NonNeg
            };
        }
        let (order, coeff) = match vanishing_order_at_zero(self.g) {
            Vanishing::Order { order, coeff } => (order, coeff),
            Vanishing::IdenticallyZero => return SignVerdict::NonNeg,
        };
        let _ = order;
        let delta = zero_side_delta(self.g, &coeff);
        if coeff.is_negative() {
            let mut x = delta.clone();
            for _ in 0..80 {
                if let Some(v) = self.find_neg(&x) {
                    return v;
                }
                x /= int(2);
            }
            return SignVerdict::Unknown("negative at 0+ but no certified witness".into());
        }
        let dom = dominant_term_at_infinity(self.g).expect("nonzero");
        if dom.c.is_negative() {
            let mut x = (&dom.e_safe + Rational::one()).ceil();
            for _ in 0..40 {
                if let Some(v) = self.find_neg(&x) {
                    return v;
                }
                x *= int(2);
            }
            return SignVerdict::Unknown("negative at infinity but no certified witness".into());
        }
        if dom.e_safe <= delta {
            return SignVerdict::NonNeg;
        }
        self.bisect(delta, dom.e_safe)
    }

    fn bisect(&self, a: Rational, b: Rational) -> SignVerdict {
        let mut stack = vec![(a, b, 0u32)];
        let mut unresolved = 0usize;
        let mut count = 0usize;
        while let Some((lo, hi, depth)) = stack.pop() {
            count += 1;
            if count > self.opts.max_intervals {
                return SignVerdict::Unknown(format!(
                    "interval budget of {} exhausted",
                    self.opts.max_intervals
                ));
            }
            let mut done = false;
            for &p in &self.opts.schedule {
                let e = self.enc.enclose(&lo, &hi, p);
                let s = e.lo.signum();
                if s > 0 || (s == 0 && !self.strict) {
                    done = true;
                    break;
                }
                if e.hi.signum() < 0 {
                    break;
                }
            }
            if done {
                continue;
            }
            let mid = split_point(&lo, &hi);
            if let Some(v) = self.find_neg(&mid) {
                return if self.strict {
                    SignVerdict::Unknown("negative point".into())
                } else {
                    v
                };
            }
            if depth >= self.opts.max_depth {
                unresolved += 1;
                continue;
            }
            stack.push((mid.clone(), hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
        if unresolved > 0 {
            SignVerdict::Unknown(format!(
                "{unresolved} subintervals unresolved at depth {}",
                self.opts.max_depth
            ))
        } else {
            SignVerdict::NonNeg
        }
    }
}

/// delta in (0, 1] such that g / eps^m keeps the sign of its leading coefficient on (0, delta].
fn zero_side_delta(g: &LaurentExpPoly, coeff: &Rational) -> Rational {
    let s = g.abs_mass_bound();
    let d0 = (coeff.abs() / (int(2) * s)).min(Rational::one());
    // largest power of two not exceeding d0
    let mut d = Rational::one();
    while d > d0 {
        d /= int(2);
    }
    d
}

fn split_point(lo: &Rational, hi: &Rational) -> Rational {
    let r = hi / lo;
    let four = int(4);
    if r > four {
        let bits = r.to_integer().bits() as i64 - 1;
        let j = (bits / 2).max(1);
        lo * crate::symexp::rational::pow(&int(2), j as i32)
    } else {
        (lo + hi) / int(2)
    }
}

/// Divide out factors exp(eps/L) - 1, which are positive on (0, inf), from a
/// pure exponential sum (all eps powers zero).
pub fn remove_factors(g: &LaurentExpPoly) -> LaurentExpPoly {
    if g.is_zero() || g.terms().any(|(_, k, _)| k != 0) {
        return g.clone();
    }
    let l = g
        .terms()
        .fold(BigInt::one(), |acc, (_, _, q)| acc.lcm(q.denom()));
    let lq = Rational::from_integer(l.clone());
    let qmin = g.terms().next().unwrap().2.clone();
    let mut poly: BTreeMap<usize, Rational> = BTreeMap::new();
    for (c, _, q) in g.terms() {
        let e = ((q - &qmin) * &lq).to_integer().to_usize().unwrap();
        poly.insert(e, c.clone());
    }
    let deg = *poly.keys().max().unwrap();
    let mut coeffs: Vec<Rational> = (0..=deg)
        .map(|i| poly.get(&i).cloned().unwrap_or_else(Rational::zero))
        .collect();
    while coeffs.len() > 1 && coeffs.iter().fold(Rational::zero(), |a, c| a + c).is_zero() {
        // synthetic division by (u - 1)
        let n = coeffs.len() - 1;
        let mut q = vec![Rational::zero(); n];
        let mut carry = Rational::zero();
        for i in (1..=n).rev() {
            carry += &coeffs[i];
            q[i - 1] = carry.clone();
        }
        coeffs = q;
    }
    let mut out = LaurentExpPoly::zero();
    for (i, c) in coeffs.into_iter().enumerate() {
        out.add_term(c, 0, &qmin + Rational::new(BigInt::from(i), l.clone()));
    }
    out
}
