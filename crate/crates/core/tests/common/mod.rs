#![allow(dead_code)]

use accucheck::symexp::rational::{int, Rational};
use accucheck::symexp::LaurentExpPoly;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

const FRAC_BITS: u64 = 900;

fn fixed_one() -> BigInt {
    BigInt::one() << FRAC_BITS
}

fn to_fixed(r: &Rational) -> BigInt {
    (r.numer() << FRAC_BITS) / r.denom()
}

/// Reference exp(x) in 900-bit fixed point: halve until |x| < 1/4, sum 200 terms, square back.
fn ref_exp_fixed(x: &Rational) -> BigInt {
    let mut s = 0u32;
    let mut y = x.clone();
    let quarter = Rational::new(1.into(), 4.into());
    while y.abs() > quarter {
        y /= int(2);
        s += 1;
    }
    let yf = to_fixed(&y);
    let one = fixed_one();
    let mut term = one.clone();
    let mut sum = one.clone();
    for i in 1..200u32 {
        term = (&term * &yf >> FRAC_BITS) / BigInt::from(i);
        if term.is_zero() {
            break;
        }
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum >> FRAC_BITS;
    }
    sum
}

/// Reference value of f(eps) (about 250 correct digits for moderate arguments).
pub fn ref_eval(f: &LaurentExpPoly, eps: &Rational) -> Rational {
    let mut acc = Rational::zero();
    for (c, k, q) in f.terms() {
        let e = ref_exp_fixed(&(q * eps));
        let ev = Rational::new(e, fixed_one());
        let pk = if k >= 0 {
            num_traits::pow(eps.clone(), k as usize)
        } else {
            num_traits::pow(eps.recip(), (-k) as usize)
        };
        acc += c * pk * ev;
    }
    acc
}

pub fn ref_eval_f64(f: &LaurentExpPoly, eps: &Rational) -> f64 {
    let r = ref_eval(f, eps);
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap();
        let d = r.denom().to_f64().unwrap();
        n / d
    })
}

/// Deterministic xorshift for test data generation.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }
    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.next() % ((hi - lo + 1) as u64)) as i64
    }
    pub fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}

pub fn random_poly(rng: &mut Lcg, terms: usize, qmax: i64, kmax: i64) -> LaurentExpPoly {
    let mut f = LaurentExpPoly::zero();
    for _ in 0..terms {
        let c = Rational::new(rng.range(-9, 9).into(), rng.range(1, 4).into());
        let k = rng.range(-kmax, kmax) as i32;
        let q = Rational::new(rng.range(-qmax * 4, qmax * 4).into(), 4.into());
        f.add_term(c, k, q);
    }
    f
}
