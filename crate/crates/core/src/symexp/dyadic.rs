//! Dyadic rationals `m * 2^e` and outward-rounded interval arithmetic.

use super::rational::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    Down,
    Up,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    pub m: BigInt,
    pub e: i64,
}

fn pow2(s: u64) -> BigInt {
    BigInt::one() << s
}

fn div_dir(n: &BigInt, d: &BigInt, dir: Dir) -> BigInt {
    match dir {
        Dir::Down => n.div_floor(d),
        Dir::Up => n.div_ceil(d),
    }
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { m: BigInt::zero(), e: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic { m: BigInt::from(n), e: 0 }
    }

    pub fn new(m: BigInt, e: i64) -> Self {
        Dyadic { m, e }
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn signum(&self) -> i32 {
        if self.m.is_positive() {
            1
        } else if self.m.is_negative() {
            -1
        } else {
            0
        }
    }

    pub fn neg(&self) -> Self {
        Dyadic { m: -&self.m, e: self.e }
    }

    pub fn abs(&self) -> Self {
        Dyadic { m: self.m.abs(), e: self.e }
    }

    pub fn mul_pow2(&self, n: i64) -> Self {
        Dyadic { m: self.m.clone(), e: self.e + n }
    }

    pub fn round(&self, prec: u32, dir: Dir) -> Self {
        let bits = self.m.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let s = bits - prec as u64;
        Dyadic {
            m: div_dir(&self.m, &pow2(s), dir),
            e: self.e + s as i64,
        }
    }

    pub fn add_exact(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let e = self.e.min(o.e);
        let a = &self.m << (self.e - e) as u64;
        let b = &o.m << (o.e - e) as u64;
        Dyadic { m: a + b, e }
    }

    pub fn sub_exact(&self, o: &Self) -> Self {
        self.add_exact(&o.neg())
    }

    pub fn mul_exact(&self, o: &Self) -> Self {
        Dyadic { m: &self.m * &o.m, e: self.e + o.e }
    }

    pub fn from_rational(r: &Rational, prec: u32, dir: Dir) -> Self {
        let n = r.numer();
        let d = r.denom();
        if n.is_zero() {
            return Self::zero();
        }
        if d.is_one() {
            return Dyadic { m: n.clone(), e: 0 }.round(prec, dir);
        }
        let mag = n.bits() as i64 - d.bits() as i64;
        let s = prec as i64 + 2 - mag;
        let (num, den) = if s >= 0 {
            (n << s as u64, d.clone())
        } else {
            (n.clone(), d << (-s) as u64)
        };
        Dyadic { m: div_dir(&num, &den, dir), e: -s }.round(prec, dir)
    }

    pub fn to_rational(&self) -> Rational {
        if self.e >= 0 {
            Rational::from_integer(&self.m << self.e as u64)
        } else {
            Rational::new(self.m.clone(), pow2((-self.e) as u64))
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.m.bits() as i64;
        let shift = (bits - 60).max(0);
        let top = (&self.m >> shift as u64).to_f64().unwrap_or(0.0);
        let ex = self.e + shift;
        if ex > 2000 {
            return top.signum() * f64::INFINITY;
        }
        if ex < -2200 {
            return 0.0;
        }
        top * 2f64.powi(ex as i32)
    }

    /// Division by a positive integer with directed rounding.
    pub fn div_int(&self, n: u64, prec: u32, dir: Dir) -> Self {
        let extra = prec as u64 + 64;
        let num = &self.m << extra;
        let q = div_dir(&num, &BigInt::from(n), dir);
        Dyadic { m: q, e: self.e - extra as i64 }.round(prec, dir)
    }

    /// `1/self` for nonzero self with directed rounding.
    pub fn recip(&self, prec: u32, dir: Dir) -> Self {
        let extra = prec as u64 + self.m.bits() + 4;
        let num = pow2(extra);
        let q = div_dir(&num, &self.m, dir);
        Dyadic { m: q, e: -(extra as i64) - self.e }.round(prec, dir)
    }

    /// `floor(log2 |self|)` for nonzero values.
    pub fn log2_floor(&self) -> i64 {
        self.m.bits() as i64 - 1 + self.e
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, o: &Self) -> Ordering {
        let s1 = self.signum();
        let s2 = o.signum();
        if s1 != s2 || s1 == 0 {
            return s1.cmp(&s2);
        }
        let l1 = self.log2_floor();
        let l2 = o.log2_floor();
        if l1 != l2 {
            return if s1 > 0 { l1.cmp(&l2) } else { l2.cmp(&l1) };
        }
        let e = self.e.min(o.e);
        let a = &self.m << (self.e - e) as u64;
        let b = &o.m << (o.e - e) as u64;
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

/// Closed interval with dyadic endpoints, `lo <= hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl Interval {
    pub fn point(d: Dyadic) -> Self {
        Interval { lo: d.clone(), hi: d }
    }

    pub fn zero() -> Self {
        Self::point(Dyadic::zero())
    }

    pub fn one() -> Self {
        Self::point(Dyadic::from_int(1))
    }

    pub fn from_rational(r: &Rational, prec: u32) -> Self {
        Interval {
            lo: Dyadic::from_rational(r, prec, Dir::Down),
            hi: Dyadic::from_rational(r, prec, Dir::Up),
        }
    }

    pub fn from_bounds(lo: &Rational, hi: &Rational, prec: u32) -> Self {
        Interval {
            lo: Dyadic::from_rational(lo, prec, Dir::Down),
            hi: Dyadic::from_rational(hi, prec, Dir::Up),
        }
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub_exact(&self.lo)
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.signum() <= 0 && self.hi.signum() >= 0
    }

    pub fn contains_f64(&self, x: f64, slack: f64) -> bool {
        self.lo.to_f64() - slack <= x && x <= self.hi.to_f64() + slack
    }

    pub fn add(&self, o: &Self, prec: u32) -> Self {
        Interval {
            lo: self.lo.add_exact(&o.lo).round(prec, Dir::Down),
            hi: self.hi.add_exact(&o.hi).round(prec, Dir::Up),
        }
    }

    pub fn neg(&self) -> Self {
        Interval {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
        }
    }

    pub fn sub(&self, o: &Self, prec: u32) -> Self {
        self.add(&o.neg(), prec)
    }

    pub fn mul(&self, o: &Self, prec: u32) -> Self {
        let c = [
            self.lo.mul_exact(&o.lo),
            self.lo.mul_exact(&o.hi),
            self.hi.mul_exact(&o.lo),
            self.hi.mul_exact(&o.hi),
        ];
        let lo = c.iter().min().unwrap().round(prec, Dir::Down);
        let hi = c.iter().max().unwrap().round(prec, Dir::Up);
        Interval { lo, hi }
    }

    pub fn scale_rational(&self, r: &Rational, prec: u32) -> Self {
        self.mul(&Interval::from_rational(r, prec + 8), prec)
    }

    pub fn mul_pow2(&self, n: i64) -> Self {
        Interval {
            lo: self.lo.mul_pow2(n),
            hi: self.hi.mul_pow2(n),
        }
    }

    pub fn intersect(&self, o: &Self) -> Option<Self> {
        let lo = if self.lo >= o.lo { self.lo.clone() } else { o.lo.clone() };
        let hi = if self.hi <= o.hi { self.hi.clone() } else { o.hi.clone() };
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn hull(&self, o: &Self) -> Self {
        Interval {
            lo: self.lo.clone().min(o.lo.clone()),
            hi: self.hi.clone().max(o.hi.clone()),
        }
    }

    /// Integer power for an interval of positive reals.
    pub fn powi_pos(&self, k: i32, prec: u32) -> Self {
        debug_assert!(self.lo.signum() > 0);
        if k == 0 {
            return Interval::one();
        }
        let n = k.unsigned_abs();
        let mut lo = Dyadic::from_int(1);
        let mut hi = Dyadic::from_int(1);
        for _ in 0..n {
            lo = lo.mul_exact(&self.lo).round(prec + 8, Dir::Down);
            hi = hi.mul_exact(&self.hi).round(prec + 8, Dir::Up);
        }
        if k > 0 {
            Interval {
                lo: lo.round(prec, Dir::Down),
                hi: hi.round(prec, Dir::Up),
            }
        } else {
            Interval {
                lo: hi.recip(prec, Dir::Down),
                hi: lo.recip(prec, Dir::Up),
            }
        }
    }

    pub fn exp(&self, prec: u32) -> Self {
        Interval {
            lo: exp_dir(&self.lo, prec, Dir::Down),
            hi: exp_dir(&self.hi, prec, Dir::Up),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

fn ln2_cache() -> &'static Mutex<HashMap<u32, Interval>> {
    static C: OnceLock<Mutex<HashMap<u32, Interval>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// ln 2 = sum_{k>=1} 1/(k 2^k), with the tail after K terms below 2^-K.
pub fn ln2(prec: u32) -> Interval {
    let key = prec.div_ceil(64) * 64;
    if let Some(v) = ln2_cache().lock().unwrap().get(&key) {
        return v.clone();
    }
    let w = key + 16;
    let mut lo = Dyadic::zero();
    let mut hi = Dyadic::zero();
    let kmax = w as u64 + 4;
    for k in 1..=kmax {
        let t = Dyadic::from_int(1).mul_pow2(-(k as i64));
        lo = lo.add_exact(&t.div_int(k, w, Dir::Down)).round(w, Dir::Down);
        hi = hi.add_exact(&t.div_int(k, w, Dir::Up)).round(w, Dir::Up);
    }
    hi = hi
        .add_exact(&Dyadic::from_int(1).mul_pow2(-(kmax as i64)))
        .round(w, Dir::Up);
    let v = Interval { lo, hi };
    ln2_cache().lock().unwrap().insert(key, v.clone());
    v
}

/// Directed-rounding bound on exp(x): a lower bound for `Down`, an upper bound for `Up`.
pub fn exp_dir(x: &Dyadic, prec: u32, dir: Dir) -> Dyadic {
    if x.is_zero() {
        return Dyadic::from_int(1);
    }
    let xf = x.to_f64();
    if !xf.is_finite() || xf.abs() > 1e15 {
        // Far outside any range reached by the checker; return safe bounds.
        return match (dir, xf > 0.0) {
            (Dir::Down, false) => Dyadic::zero(),
            (Dir::Up, false) => Dyadic::from_int(1).mul_pow2(-(1 << 40)),
            (Dir::Down, true) => Dyadic::from_int(1).mul_pow2(1 << 40),
            (Dir::Up, true) => panic!("exp overflow"),
        };
    }
    let n = (xf / std::f64::consts::LN_2).round() as i64;
    let nbits = 64 - n.unsigned_abs().leading_zeros();
    let w = prec + 24 + nbits;
    let l2 = ln2(w + 8);
    let nd = Dyadic::from_int(n);
    let xi = Interval::point(x.clone());
    let nl = Interval::point(nd).mul(&l2, w + 8);
    let r = xi.sub(&nl, w);
    let rp = match dir {
        Dir::Down => r.lo.clone(),
        Dir::Up => r.hi.clone(),
    };
    let s = taylor_exp(&rp, w, dir);
    s.mul_pow2(n).round(prec, dir)
}

/// exp(r) for small |r| (below 1/2) via Taylor series with a Lagrange remainder bound.
fn taylor_exp(r: &Dyadic, w: u32, dir: Dir) -> Dyadic {
    let ri = Interval::point(r.clone());
    let mut term = Interval::one();
    let mut sum = Interval::one();
    let rabs = r.abs().to_f64().max(1e-300);
    debug_assert!(rabs < 0.75);
    let mut i: u64 = 0;
    // Choose N with |r|^{N+1}/(N+1)! < 2^{-w-4}.
    let target = -(w as f64) - 4.0;
    let mut logterm = 0.0f64;
    loop {
        i += 1;
        term = term.mul(&ri, w).div_int_interval(i, w);
        sum = sum.add(&term, w);
        logterm += rabs.log2() - (i as f64).log2();
        if logterm < target && i >= 2 {
            break;
        }
        if i > 4 * w as u64 + 64 {
            break;
        }
    }
    // remainder <= 2 |r|^{N+1}/(N+1)! (since exp(|r|) <= 2)
    let ra = Interval::point(r.abs());
    let mut rem = Interval::one();
    for j in 1..=(i + 1) {
        rem = rem.mul(&ra, w).div_int_interval(j, w);
    }
    let rem = rem.hi.mul_pow2(1);
    match dir {
        Dir::Down => sum.lo.sub_exact(&rem).round(w, Dir::Down),
        Dir::Up => sum.hi.add_exact(&rem).round(w, Dir::Up),
    }
}

impl Interval {
    fn div_int_interval(&self, n: u64, prec: u32) -> Self {
        Interval {
            lo: self.lo.div_int(n, prec, Dir::Down),
            hi: self.hi.div_int(n, prec, Dir::Up),
        }
    }
}
