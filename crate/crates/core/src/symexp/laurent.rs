use super::rational::{factorial, fmt_rational, int, pow, to_f64, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Key of one term `eps^k * exp(q*eps)`. Ordered by `q`, then `k`, so the
/// last key of a map is the dominant term as eps grows.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermKey {
    pub q: Rational,
    pub k: i32,
}

/// Finite sum of `c * eps^k * exp(q*eps)`, stored canonically.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LaurentExpPoly {
    terms: BTreeMap<TermKey, Rational>,
}

impl LaurentExpPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, 0, Rational::zero())
    }

    pub fn term(c: Rational, k: i32, q: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(c, k, q);
        p
    }

    /// The function `eps`.
    pub fn eps() -> Self {
        Self::term(Rational::one(), 1, Rational::zero())
    }

    /// The function `exp(q*eps)`.
    pub fn exp(q: Rational) -> Self {
        Self::term(Rational::one(), 0, q)
    }

    /// `1 - exp(-s*eps)`.
    pub fn one_minus_exp(s: &Rational) -> Self {
        let mut p = Self::one();
        p.add_term(-Rational::one(), 0, -s.clone());
        p
    }

    pub fn add_term(&mut self, c: Rational, k: i32, q: Rational) {
        if c.is_zero() {
            return;
        }
        let key = TermKey { q, k };
        match self.terms.get_mut(&key) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (k, c) = self.terms.iter().next().unwrap();
                (k.k == 0 && k.q.is_zero()).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// Terms as `(coefficient, k, q)` in increasing `(q, k)` order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Rational, i32, &Rational)> + '_ {
        self.terms.iter().map(|(key, c)| (c, key.k, &key.q))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    /// Multiply by `eps^k * exp(q*eps)`.
    pub fn shift(&self, k: i32, q: &Rational) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(key, v)| {
                    (
                        TermKey {
                            q: &key.q + q,
                            k: key.k + k,
                        },
                        v.clone(),
                    )
                })
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for (c, k, q) in self.terms() {
            if k != 0 {
                out.add_term(c * int(k as i64), k - 1, q.clone());
            }
            if !q.is_zero() {
                out.add_term(c * q, k, q.clone());
            }
        }
        out
    }

    pub fn min_k(&self) -> Option<i32> {
        self.terms.keys().map(|k| k.k).min()
    }

    pub fn max_abs_q(&self) -> Rational {
        self.terms
            .keys()
            .map(|k| k.q.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Exact Taylor coefficient of `eps^n` in the expansion at `0+`.
    pub fn taylor_coeff(&self, n: i32) -> Rational {
        let mut acc = Rational::zero();
        for (c, k, q) in self.terms() {
            let j = n - k;
            if j < 0 {
                continue;
            }
            if q.is_zero() {
                if j == 0 {
                    acc += c;
                }
                continue;
            }
            let f = Rational::from_integer(factorial(j as u32));
            acc += c * pow(q, j) / f;
        }
        acc
    }

    /// Rough floating-point evaluation, for diagnostics and oracles.
    pub fn eval_f64(&self, eps: f64) -> f64 {
        self.terms()
            .map(|(c, k, q)| to_f64(c) * eps.powi(k) * (to_f64(q) * eps).exp())
            .sum()
    }

    /// Substitute `eps := t*eps` for a positive rational `t`.
    pub fn rescale_eps(&self, t: &Rational) -> Self {
        let mut out = Self::zero();
        for (c, k, q) in self.terms() {
            out.add_term(c * pow(t, k), k, q * t);
        }
        out
    }

    /// Sum of `|c| * exp(|q|)` over terms, bounded from above by a rational.
    pub fn abs_mass_bound(&self) -> Rational {
        let mut s = Rational::zero();
        for (c, _, q) in self.terms() {
            s += c.abs() * exp_upper_rational(&q.abs());
        }
        s
    }
}

/// A rational upper bound on `exp(x)` for `x >= 0` (loose, within a few percent).
pub fn exp_upper_rational(x: &Rational) -> Rational {
    // exp(x) = exp(x/2^s)^(2^s) with a short series plus a geometric tail bound.
    let mut s = 0u32;
    let mut y = x.clone();
    let half = Rational::new(BigInt::from(1), BigInt::from(2));
    while y > half {
        y /= int(2);
        s += 1;
    }
    let mut term = Rational::one();
    let mut sum = Rational::one();
    for i in 1..=12 {
        term = term * &y / int(i);
        sum += &term;
    }
    // tail <= 2 * next term for y <= 1/2
    sum += term * &y / int(13) * int(2);
    let mut r = sum;
    for _ in 0..s {
        r = &r * &r;
        // keep the representation small
        r = round_up_rational(&r, 64);
    }
    r
}

fn round_up_rational(r: &Rational, bits: u64) -> Rational {
    let nb = r.numer().bits();
    let db = r.denom().bits();
    if nb + db < 2 * bits + 8 {
        return r.clone();
    }
    let shift = bits as i64 - (nb as i64 - db as i64);
    let two = int(2);
    let s = pow(&two, shift as i32);
    (r * &s).ceil() / s
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&LaurentExpPoly> for &LaurentExpPoly {
            type Output = LaurentExpPoly;
            fn $m(self, rhs: &LaurentExpPoly) -> LaurentExpPoly {
                let f: fn(&LaurentExpPoly, &LaurentExpPoly) -> LaurentExpPoly = $body;
                f(self, rhs)
            }
        }
        impl $tr<LaurentExpPoly> for LaurentExpPoly {
            type Output = LaurentExpPoly;
            fn $m(self, rhs: LaurentExpPoly) -> LaurentExpPoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&LaurentExpPoly> for LaurentExpPoly {
            type Output = LaurentExpPoly;
            fn $m(self, rhs: &LaurentExpPoly) -> LaurentExpPoly {
                (&self).$m(rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| {
    let mut out = a.clone();
    for (c, k, q) in b.terms() {
        out.add_term(c.clone(), k, q.clone());
    }
    out
});

binop!(Sub, sub, |a, b| {
    let mut out = a.clone();
    for (c, k, q) in b.terms() {
        out.add_term(-c.clone(), k, q.clone());
    }
    out
});

binop!(Mul, mul, |a, b| {
    let mut out = LaurentExpPoly::zero();
    for (c1, k1, q1) in a.terms() {
        for (c2, k2, q2) in b.terms() {
            out.add_term(c1 * c2, k1 + k2, q1 + q2);
        }
    }
    out
});

impl Neg for &LaurentExpPoly {
    type Output = LaurentExpPoly;
    fn neg(self) -> LaurentExpPoly {
        self.scale(&-Rational::one())
    }
}

impl Neg for LaurentExpPoly {
    type Output = LaurentExpPoly;
    fn neg(self) -> LaurentExpPoly {
        -&self
    }
}

impl fmt::Display for LaurentExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (c, k, q) in self.terms().rev() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            f.write_str(&fmt_term(c, k, q))?;
        }
        Ok(())
    }
}

pub(crate) fn fmt_term(c: &Rational, k: i32, q: &Rational) -> String {
    let mut s = fmt_rational(c);
    if k != 0 {
        s.push_str(&format!(" * eps^{k}"));
    }
    if !q.is_zero() {
        s.push_str(&format!(" * exp({}*eps)", fmt_rational(q)));
    }
    s
}
