//! Sums of `c * eps^k * prod x^e * exp(eps * L(x)) * prod (1 - exp(-s eps))^-r`.

use super::linform::{LinForm, VarId};
use crate::symexp::rational::{binomial, factorial, int, pow, Rational};
use crate::symexp::LaurentExpPoly;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;
use std::fmt;

/// Sorted `(var, exponent)` pairs, exponents positive.
pub type Monomial = Vec<(VarId, u32)>;

pub type Poly = HashMap<Monomial, Rational>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegrandKey {
    pub k: i32,
    pub mono: Monomial,
    pub expo: LinForm,
    /// `(s, r)` sorted by `s`: the factor `(1 - exp(-s eps))^-r`.
    pub den: Vec<(Rational, u32)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Integrand {
    terms: HashMap<IntegrandKey, Rational>,
}

pub fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push(b[j]);
            j += 1;
        } else {
            out.push((a[i].0, a[i].1 + b[j].1));
            i += 1;
            j += 1;
        }
    }
    out
}

fn poly_add_term(p: &mut Poly, m: Monomial, c: Rational) {
    if c.is_zero() {
        return;
    }
    let e = p.entry(m.clone()).or_insert_with(Rational::zero);
    *e += c;
    if e.is_zero() {
        p.remove(&m);
    }
}

pub fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            poly_add_term(&mut out, mono_mul(ma, mb), ca * cb);
        }
    }
    out
}

pub fn poly_one() -> Poly {
    let mut p = Poly::new();
    p.insert(Vec::new(), Rational::one());
    p
}

pub fn linform_poly(l: &LinForm) -> Poly {
    let mut p = Poly::new();
    poly_add_term(&mut p, Vec::new(), l.constant.clone());
    for (v, c) in l.coeffs() {
        poly_add_term(&mut p, vec![(v, 1)], c.clone());
    }
    p
}

pub fn linform_pow(l: &LinForm, n: u32) -> Poly {
    let base = linform_poly(l);
    let mut out = poly_one();
    for _ in 0..n {
        out = poly_mul(&out, &base);
    }
    out
}

fn den_mul(a: &[(Rational, u32)], b: &[(Rational, u32)]) -> Vec<(Rational, u32)> {
    let mut out: Vec<(Rational, u32)> = a.to_vec();
    for (s, r) in b {
        match out.iter_mut().find(|(t, _)| t == s) {
            Some(e) => e.1 += r,
            None => out.push((s.clone(), *r)),
        }
    }
    out.sort();
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    NegInf,
    PosInf,
    At(LinForm),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum IntegrandError {
    #[error("integral of a non-decaying term over an unbounded range: {0}")]
    NonDecaying(String),
}

impl Integrand {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational, k: i32) -> Self {
        let mut i = Self::zero();
        i.add_term(
            IntegrandKey {
                k,
                mono: Vec::new(),
                expo: LinForm::zero(),
                den: Vec::new(),
            },
            c,
        );
        i
    }

    pub fn add_term(&mut self, key: IntegrandKey, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(e) => {
                *e += c;
                if e.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    pub fn add_assign(&mut self, o: &Integrand) {
        for (k, c) in &o.terms {
            self.add_term(k.clone(), c.clone());
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

    pub fn terms(&self) -> impl Iterator<Item = (&IntegrandKey, &Rational)> {
        self.terms.iter()
    }

    /// Multiply every term by `exp(eps * l)`.
    pub fn mul_exp(&self, l: &LinForm) -> Integrand {
        let mut out = Integrand::zero();
        for (k, c) in &self.terms {
            let mut k2 = k.clone();
            k2.expo = k2.expo.add(l);
            out.add_term(k2, c.clone());
        }
        out
    }

    /// Replace variable `v` by the linear form `by`.
    pub fn substitute(&self, v: VarId, by: &LinForm) -> Integrand {
        let mut out = Integrand::zero();
        for (key, c) in &self.terms {
            let (lam, rest) = key.expo.split_var(v);
            let expo = rest.add(&by.scale(&lam));
            let e = key.mono.iter().find(|(x, _)| *x == v).map(|p| p.1).unwrap_or(0);
            let mono: Monomial = key.mono.iter().filter(|(x, _)| *x != v).copied().collect();
            for (m, pc) in linform_pow(by, e) {
                out.add_term(
                    IntegrandKey {
                        k: key.k,
                        mono: mono_mul(&mono, &m),
                        expo: expo.clone(),
                        den: key.den.clone(),
                    },
                    c * &pc,
                );
            }
        }
        out
    }

    /// Integral over real `v` from `lo` to `hi`.
    pub fn integrate(&self, v: VarId, lo: &Bound, hi: &Bound) -> Result<Integrand, IntegrandError> {
        let mut out = Integrand::zero();
        for (key, c) in &self.terms {
            let (lam, rest_expo) = key.expo.split_var(v);
            let m = key.mono.iter().find(|(x, _)| *x == v).map(|p| p.1).unwrap_or(0);
            let rest_mono: Monomial = key.mono.iter().filter(|(x, _)| *x != v).copied().collect();
            for (b, sign) in [(hi, 1i64), (lo, -1i64)] {
                let bl = match b {
                    Bound::At(l) => l,
                    Bound::PosInf if lam.is_negative() => continue,
                    Bound::NegInf if lam.is_positive() => continue,
                    _ => {
                        return Err(IntegrandError::NonDecaying(format!(
                            "x{v}^{m} * exp({lam}*eps*x{v})"
                        )))
                    }
                };
                let sgn = int(sign);
                if lam.is_zero() {
                    let coef = c * &sgn / int(m as i64 + 1);
                    for (pm, pc) in linform_pow(bl, m + 1) {
                        out.add_term(
                            IntegrandKey {
                                k: key.k,
                                mono: mono_mul(&rest_mono, &pm),
                                expo: rest_expo.clone(),
                                den: key.den.clone(),
                            },
                            &coef * pc,
                        );
                    }
                    continue;
                }
                let expo = rest_expo.add(&bl.scale(&lam));
                for j in 0..=m {
                    let falling = Rational::from_integer(factorial(m) / factorial(m - j));
                    let alt = if j % 2 == 0 { int(1) } else { int(-1) };
                    let coef = c * &sgn * alt * falling * pow(&lam, -(j as i32 + 1));
                    for (pm, pc) in linform_pow(bl, m - j) {
                        out.add_term(
                            IntegrandKey {
                                k: key.k - (j as i32 + 1),
                                mono: mono_mul(&rest_mono, &pm),
                                expo: expo.clone(),
                                den: key.den.clone(),
                            },
                            &coef * pc,
                        );
                    }
                }
            }
        }
        Ok(out)
    }

    /// Sum over integer `v` from `lo` to `hi` inclusive.
    pub fn sum(&self, v: VarId, lo: &Bound, hi: &Bound) -> Result<Integrand, IntegrandError> {
        let mut out = Integrand::zero();
        for (key, c) in &self.terms {
            let (lam, rest_expo) = key.expo.split_var(v);
            let m = key.mono.iter().find(|(x, _)| *x == v).map(|p| p.1).unwrap_or(0);
            let rest_mono: Monomial = key.mono.iter().filter(|(x, _)| *x != v).copied().collect();
            let qs = if lam.is_zero() { Vec::new() } else { geometric_q(m, &lam) };
            for (b, sign) in [(hi, 1i64), (lo, -1i64)] {
                let bl = match b {
                    Bound::At(l) => l,
                    Bound::PosInf if lam.is_negative() => continue,
                    Bound::NegInf if lam.is_positive() => continue,
                    _ => {
                        return Err(IntegrandError::NonDecaying(format!(
                            "k{v}^{m} * exp({lam}*eps*k{v})"
                        )))
                    }
                };
                let sgn = int(sign);
                if lam.is_zero() {
                    // S_m(hi) - S_m(lo - 1)
                    let at = if sign > 0 { bl.clone() } else { bl.add_constant(&-Rational::one()) };
                    for (j, fc) in faulhaber(m).into_iter().enumerate() {
                        if fc.is_zero() {
                            continue;
                        }
                        for (pm, pc) in linform_pow(&at, j as u32) {
                            out.add_term(
                                IntegrandKey {
                                    k: key.k,
                                    mono: mono_mul(&rest_mono, &pm),
                                    expo: rest_expo.clone(),
                                    den: key.den.clone(),
                                },
                                c * &sgn * &fc * pc,
                            );
                        }
                    }
                    continue;
                }
                // F(hi + 1) - F(lo), F(i) = t^i * sum_n q_n i^n
                let at = if sign > 0 { bl.add_constant(&Rational::one()) } else { bl.clone() };
                let expo = rest_expo.add(&at.scale(&lam));
                for (n, (pn, r)) in qs.iter().enumerate() {
                    let (extra, den_sign, s) = if lam.is_negative() {
                        (Rational::zero(), if r % 2 == 0 { 1 } else { -1 }, -lam.clone())
                    } else {
                        (-&lam * int(*r as i64), 1, lam.clone())
                    };
                    let den = den_mul(&key.den, &[(s, *r)]);
                    let bpow = linform_pow(&at, n as u32);
                    for (pc_t, pk, pq) in pn.terms() {
                        debug_assert_eq!(pk, 0);
                        let e2 = expo.add_constant(&(pq + &extra));
                        for (pm, pc) in &bpow {
                            out.add_term(
                                IntegrandKey {
                                    k: key.k,
                                    mono: mono_mul(&rest_mono, pm),
                                    expo: e2.clone(),
                                    den: den.clone(),
                                },
                                c * &sgn * int(den_sign) * pc_t * pc,
                            );
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Value when no variables remain: `(num terms, den factors)` grouped.
    pub fn is_closed(&self) -> bool {
        self.terms.keys().all(|k| k.mono.is_empty() && k.expo.is_constant())
    }

    pub fn eval_f64(&self, eps: f64, x: &dyn Fn(VarId) -> f64) -> f64 {
        let mut s = 0.0;
        for (k, c) in &self.terms {
            let mut v = crate::symexp::rational::to_f64(c) * eps.powi(k.k);
            for (x0, e) in &k.mono {
                v *= x(*x0).powi(*e as i32);
            }
            v *= (eps * k.expo.eval_f64(x)).exp();
            for (s0, r) in &k.den {
                v /= (1.0 - (-crate::symexp::rational::to_f64(s0) * eps).exp()).powi(*r as i32);
            }
            s += v;
        }
        s
    }
}

impl fmt::Display for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort_by(|a, b| a.0.cmp(b.0));
        let parts: Vec<String> = keys
            .into_iter()
            .map(|(k, c)| {
                let mut s = format!("{}", crate::symexp::rational::R(c));
                if k.k != 0 {
                    s += &format!("*eps^{}", k.k);
                }
                for (v, e) in &k.mono {
                    s += &format!("*x{v}^{e}");
                }
                if !k.expo.is_zero_form() {
                    s += &format!("*exp(eps*({}))", k.expo);
                }
                for (sv, r) in &k.den {
                    s += &format!("/(1-exp(-{}*eps))^{r}", crate::symexp::rational::R(sv));
                }
                s
            })
            .collect();
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

impl LinForm {
    fn is_zero_form(&self) -> bool {
        self.is_constant() && self.constant.is_zero()
    }
}

/// `(P_n, m - n + 1)` with `q_n = P_n(t) / (t - 1)^(m-n+1)`, `t = exp(lam eps)`,
/// solving `t Q(i+1) - Q(i) = i^m`.
fn geometric_q(m: u32, lam: &Rational) -> Vec<(LaurentExpPoly, u32)> {
    let m = m as usize;
    let t = LaurentExpPoly::exp(lam.clone());
    let tm1 = &t - &LaurentExpPoly::one();
    let mut p: Vec<LaurentExpPoly> = vec![LaurentExpPoly::zero(); m + 1];
    p[m] = LaurentExpPoly::one();
    for n in (0..m).rev() {
        let mut acc = LaurentExpPoly::zero();
        for j in n + 1..=m {
            let f = tm1.pow((j - n - 1) as u32);
            acc = &acc + &(&p[j] * &f).scale(&Rational::from_integer(binomial(j as u32, n as u32)));
        }
        p[n] = -&(&acc * &t);
    }
    p.into_iter()
        .enumerate()
        .map(|(n, pn)| (pn, (m - n + 1) as u32))
        .collect()
}

/// Coefficients of `S_m(n) = sum_{i=1}^n i^m` as a polynomial in n.
fn faulhaber(m: u32) -> Vec<Rational> {
    let m = m as usize;
    // S(n) - S(n-1) = n^m with S(0) = 0; solve for coefficients of degree 1..=m+1
    let d = m + 1;
    let mut a = vec![Rational::zero(); d + 1];
    // the coefficient of n^j in S(n) - S(n-1) is sum_{i>j} a_i C(i,j) (-1)^(i-j+1)
    for j in (0..=m).rev() {
        let target = if j == m { Rational::one() } else { Rational::zero() };
        let mut s = Rational::zero();
        for i in j + 2..=d {
            let sg = if (i - j) % 2 == 0 { int(-1) } else { int(1) };
            s += &a[i] * Rational::from_integer(binomial(i as u32, j as u32)) * sg;
        }
        // a_{j+1} * (j+1) contributes with sign +1
        a[j + 1] = (target - s) / int(j as i64 + 1);
    }
    a
}

