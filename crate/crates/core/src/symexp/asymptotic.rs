use super::enclose::Encloser;
use super::laurent::LaurentExpPoly;
use super::rational::{int, Rational};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Vanishing {
    Order { order: i32, coeff: Rational },
    IdenticallyZero,
}

/// Leading behaviour `coeff * eps^order` of `f` as eps -> 0+.
pub fn vanishing_order_at_zero(f: &LaurentExpPoly) -> Vanishing {
    let Some(kmin) = f.min_k() else {
        return Vanishing::IdenticallyZero;
    };
    // zero bound: sum over exponent groups of (degree + 1), minus one
    let mut deg: BTreeMap<&Rational, i32> = BTreeMap::new();
    for (_, k, q) in f.terms() {
        let e = deg.entry(q).or_insert(0);
        *e = (*e).max(k - kmin);
    }
    let bound: i32 = deg.values().map(|d| d + 1).sum::<i32>() - 1;
    for n in kmin..=kmin + bound {
        let c = f.taylor_coeff(n);
        if !c.is_zero() {
            return Vanishing::Order { order: n, coeff: c };
        }
    }
    Vanishing::IdenticallyZero
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dominant {
    pub q: Rational,
    pub k: i32,
    pub c: Rational,
    /// For every eps > e_safe, sign f(eps) = sign c.
    pub e_safe: Rational,
}

/// Dominant term as eps -> inf with a certified threshold beyond which it fixes the sign.
pub fn dominant_term_at_infinity(f: &LaurentExpPoly) -> Option<Dominant> {
    let (c, k, q) = f.terms().next_back()?;
    let (c, k, q) = (c.clone(), k, q.clone());
    let others: Vec<_> = f.terms().rev().skip(1).collect();
    let n = others.len();
    if n == 0 {
        return Some(Dominant {
            q,
            k,
            c,
            e_safe: Rational::zero(),
        });
    }
    let target = c.abs() / int(2 * n as i64);
    let mut e_safe = Rational::zero();
    for (ci, ki, qi) in others {
        let d = ki - k;
        let delta = &q - qi;
        // ratio g(eps) = |ci| eps^d exp(-delta eps); decreasing beyond `start`
        let start = if delta.is_zero() {
            Rational::one()
        } else if d > 0 {
            (int(d as i64) / &delta).ceil().max(Rational::one())
        } else {
            Rational::one()
        };
        let g = LaurentExpPoly::term(ci.abs(), d, -delta.clone());
        let enc = Encloser::new(&g);
        let mut e = start;
        let mut guard = 0;
        loop {
            let v = enc.point(&e, 40);
            if v.hi.to_rational() <= target {
                break;
            }
            e *= int(2);
            guard += 1;
            assert!(guard < 4000, "dominance threshold search diverged");
        }
        if e > e_safe {
            e_safe = e;
        }
    }
    Some(Dominant { q, k, c, e_safe })
}
