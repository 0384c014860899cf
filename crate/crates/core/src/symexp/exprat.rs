use super::dyadic::{Dir, Interval};
use super::enclose::Encloser;
use super::laurent::LaurentExpPoly;
use super::rational::Rational;
use super::text::{parse_quotient, TextError};
use crate::decide::certify_positive;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymError {
    #[error("denominator `{0}` is not certified positive on (0, inf)")]
    NonPositiveDenominator(String),
    #[error("division by the zero function")]
    DivisionByZero,
    #[error(transparent)]
    Text(#[from] TextError),
}

/// Quotient `num / den` with `den > 0` on (0, inf).
#[derive(Clone, Debug)]
pub struct ExpRational {
    num: LaurentExpPoly,
    den: LaurentExpPoly,
}

impl ExpRational {
    pub fn zero() -> Self {
        Self::from_laurent(LaurentExpPoly::zero())
    }

    pub fn one() -> Self {
        Self::from_laurent(LaurentExpPoly::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_laurent(LaurentExpPoly::constant(c))
    }

    pub fn from_laurent(num: LaurentExpPoly) -> Self {
        ExpRational {
            num,
            den: LaurentExpPoly::one(),
        }
    }

    /// Checked construction: the denominator must be certified positive.
    pub fn new(num: LaurentExpPoly, den: LaurentExpPoly) -> Result<Self, SymError> {
        if den.is_zero() || !certify_positive(&den) {
            return Err(SymError::NonPositiveDenominator(den.to_string()));
        }
        Ok(Self::from_parts(num, den))
    }

    /// Construction from a denominator already known positive (products and sums
    /// of certified-positive functions).
    pub(crate) fn from_parts(num: LaurentExpPoly, den: LaurentExpPoly) -> Self {
        debug_assert!(!den.is_zero());
        ExpRational { num, den }.normalize()
    }

    pub fn parse(s: &str) -> Result<Self, SymError> {
        let (n, d) = parse_quotient(s)?;
        Self::new(n, d)
    }

    fn normalize(self) -> Self {
        if self.den.is_one() {
            return self;
        }
        if self.num.is_zero() {
            return Self::zero();
        }
        if self.den.len() == 1 {
            let (c, k, q) = self.den.terms().next().unwrap();
            let num = self.num.scale(&c.recip()).shift(-k, &-q.clone());
            return Self::from_laurent(num);
        }
        if self.num == self.den {
            return Self::one();
        }
        self
    }

    pub fn num(&self) -> &LaurentExpPoly {
        &self.num
    }

    pub fn den(&self) -> &LaurentExpPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    pub fn as_laurent(&self) -> Option<&LaurentExpPoly> {
        self.den.is_one().then_some(&self.num)
    }

    pub fn into_laurent(self) -> Option<LaurentExpPoly> {
        self.den.is_one().then_some(self.num)
    }

    /// Quotient by `o`, which must be certified positive.
    pub fn div_positive(&self, o: &ExpRational) -> Result<Self, SymError> {
        if o.num.is_zero() {
            return Err(SymError::DivisionByZero);
        }
        if !certify_positive(&o.num) {
            return Err(SymError::NonPositiveDenominator(o.num.to_string()));
        }
        Ok(Self::from_parts(&self.num * &o.den, &self.den * &o.num))
    }

    /// Quotient by `o`, whose numerator must have a certified constant sign.
    pub fn div_signed(&self, o: &ExpRational) -> Result<Self, SymError> {
        if o.num.is_zero() {
            return Err(SymError::DivisionByZero);
        }
        if certify_positive(&o.num) {
            return Ok(Self::from_parts(&self.num * &o.den, &self.den * &o.num));
        }
        let neg = -&o.num;
        if certify_positive(&neg) {
            return Ok(Self::from_parts(-(&self.num * &o.den), &self.den * &neg));
        }
        Err(SymError::NonPositiveDenominator(o.num.to_string()))
    }

    pub fn eval_f64(&self, eps: f64) -> f64 {
        self.num.eval_f64(eps) / self.den.eval_f64(eps)
    }

    /// Certified enclosure at a rational point.
    pub fn enclose_at(&self, eps: &Rational, prec: u32) -> Interval {
        let n = Encloser::new(&self.num).point(eps, prec + 8);
        if self.den.is_one() {
            return n;
        }
        let d = Encloser::new(&self.den).point(eps, prec + 8);
        assert!(d.lo.signum() > 0, "denominator enclosure must be positive");
        let inv = Interval {
            lo: d.hi.recip(prec + 8, Dir::Down),
            hi: d.lo.recip(prec + 8, Dir::Up),
        };
        let r = n.mul(&inv, prec + 4);
        Interval {
            lo: r.lo.round(prec, Dir::Down),
            hi: r.hi.round(prec, Dir::Up),
        }
    }

    /// Substitute `eps := t*eps` for a positive rational `t`.
    pub fn rescale_eps(&self, t: &Rational) -> Self {
        Self::from_parts(self.num.rescale_eps(t), self.den.rescale_eps(t))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_parts(self.num.scale(c), self.den.clone())
    }
}

impl PartialEq for ExpRational {
    fn eq(&self, o: &Self) -> bool {
        if self.den == o.den {
            return self.num == o.num;
        }
        &self.num * &o.den == &o.num * &self.den
    }
}

impl Eq for ExpRational {}

impl From<LaurentExpPoly> for ExpRational {
    fn from(p: LaurentExpPoly) -> Self {
        Self::from_laurent(p)
    }
}

impl Add<&ExpRational> for &ExpRational {
    type Output = ExpRational;
    fn add(self, o: &ExpRational) -> ExpRational {
        if self.den == o.den {
            return ExpRational::from_parts(&self.num + &o.num, self.den.clone());
        }
        if o.den.is_one() {
            return ExpRational::from_parts(&self.num + &(&o.num * &self.den), self.den.clone());
        }
        if self.den.is_one() {
            return ExpRational::from_parts(&(&self.num * &o.den) + &o.num, o.den.clone());
        }
        ExpRational::from_parts(
            &(&self.num * &o.den) + &(&o.num * &self.den),
            &self.den * &o.den,
        )
    }
}

impl Sub<&ExpRational> for &ExpRational {
    type Output = ExpRational;
    fn sub(self, o: &ExpRational) -> ExpRational {
        self + &(-o)
    }
}

impl Mul<&ExpRational> for &ExpRational {
    type Output = ExpRational;
    fn mul(self, o: &ExpRational) -> ExpRational {
        if self.num.is_zero() || o.num.is_zero() {
            return ExpRational::zero();
        }
        if self.num == o.den {
            return ExpRational::from_parts(o.num.clone(), self.den.clone());
        }
        if o.num == self.den {
            return ExpRational::from_parts(self.num.clone(), o.den.clone());
        }
        ExpRational::from_parts(&self.num * &o.num, &self.den * &o.den)
    }
}

impl Neg for &ExpRational {
    type Output = ExpRational;
    fn neg(self) -> ExpRational {
        ExpRational {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl fmt::Display for ExpRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl Default for ExpRational {
    fn default() -> Self {
        Self::zero()
    }
}
