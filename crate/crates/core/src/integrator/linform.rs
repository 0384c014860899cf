use crate::symexp::rational::{fmt_rational, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

pub type VarId = usize;

/// `constant + sum coeffs[v] * v` with no zero coefficients stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinForm {
    pub constant: Rational,
    coeffs: BTreeMap<VarId, Rational>,
}

impl LinForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        LinForm {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn var(v: VarId) -> Self {
        Self::term(v, Rational::one())
    }

    pub fn term(v: VarId, c: Rational) -> Self {
        let mut l = Self::zero();
        l.add_coeff(v, c);
        l
    }

    pub fn from_parts(constant: Rational, coeffs: impl IntoIterator<Item = (VarId, Rational)>) -> Self {
        let mut l = Self::constant(constant);
        for (v, c) in coeffs {
            l.add_coeff(v, c);
        }
        l
    }

    pub fn add_coeff(&mut self, v: VarId, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(v).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&v);
        }
    }

    pub fn coeff(&self, v: VarId) -> Rational {
        self.coeffs.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn has_var(&self, v: VarId) -> bool {
        self.coeffs.contains_key(&v)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (VarId, &Rational)> + '_ {
        self.coeffs.iter().map(|(v, c)| (*v, c))
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn num_vars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &LinForm) -> LinForm {
        let mut r = self.clone();
        r.constant += &o.constant;
        for (v, c) in &o.coeffs {
            r.add_coeff(*v, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &LinForm) -> LinForm {
        self.add(&o.scale(&-Rational::one()))
    }

    pub fn neg(&self) -> LinForm {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, s: &Rational) -> LinForm {
        if s.is_zero() {
            return LinForm::zero();
        }
        LinForm {
            constant: &self.constant * s,
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * s)).collect(),
        }
    }

    pub fn add_constant(&self, c: &Rational) -> LinForm {
        let mut r = self.clone();
        r.constant += c;
        r
    }

    /// Drop variable `v`, returning (coefficient of v, remainder).
    pub fn split_var(&self, v: VarId) -> (Rational, LinForm) {
        let mut r = self.clone();
        let c = r.coeffs.remove(&v).unwrap_or_else(Rational::zero);
        (c, r)
    }

    pub fn substitute(&self, v: VarId, by: &LinForm) -> LinForm {
        let (c, rest) = self.split_var(v);
        if c.is_zero() {
            return rest;
        }
        rest.add(&by.scale(&c))
    }

    pub fn substitute_all(&self, f: &dyn Fn(VarId) -> Option<LinForm>) -> LinForm {
        let mut out = LinForm::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            match f(*v) {
                Some(l) => out = out.add(&l.scale(c)),
                None => out.add_coeff(*v, c.clone()),
            }
        }
        out
    }

    pub fn rename(&self, f: &dyn Fn(VarId) -> VarId) -> LinForm {
        let mut out = LinForm::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            out.add_coeff(f(*v), c.clone());
        }
        out
    }

    pub fn eval(&self, x: &dyn Fn(VarId) -> Rational) -> Rational {
        let mut s = self.constant.clone();
        for (v, c) in &self.coeffs {
            s += c * x(*v);
        }
        s
    }

    pub fn eval_f64(&self, x: &dyn Fn(VarId) -> f64) -> f64 {
        let mut s = crate::symexp::rational::to_f64(&self.constant);
        for (v, c) in &self.coeffs {
            s += crate::symexp::rational::to_f64(c) * x(*v);
        }
        s
    }

    /// Positive factor making every coefficient and the constant coprime integers.
    pub fn primitive_scale(&self) -> Rational {
        let all = self.coeffs.values().chain(std::iter::once(&self.constant));
        primitive_factor(all)
    }

    /// Positive factor making the variable coefficients coprime integers.
    pub fn var_primitive_scale(&self) -> Rational {
        primitive_factor(self.coeffs.values())
    }

    pub fn is_integral(&self) -> bool {
        self.constant.is_integer() && self.coeffs.values().all(|c| c.is_integer())
    }

    pub fn first_coeff_sign(&self) -> i32 {
        match self.coeffs.values().next() {
            Some(c) if c.is_positive() => 1,
            Some(c) if c.is_negative() => -1,
            _ => 0,
        }
    }

    pub fn fmt_with(&self, name: &dyn Fn(VarId) -> String) -> String {
        let mut parts = Vec::new();
        for (v, c) in &self.coeffs {
            let n = name(*v);
            if c.is_one() {
                parts.push(n);
            } else if *c == -Rational::one() {
                parts.push(format!("-{n}"));
            } else {
                parts.push(format!("{}*{n}", fmt_rational(c)));
            }
        }
        if !self.constant.is_zero() || parts.is_empty() {
            parts.push(fmt_rational(&self.constant));
        }
        parts.join(" + ")
    }
}

fn primitive_factor<'a>(it: impl Iterator<Item = &'a Rational>) -> Rational {
    let mut den_lcm = BigInt::one();
    let mut num_gcd = BigInt::zero();
    for c in it {
        if c.is_zero() {
            continue;
        }
        den_lcm = den_lcm.lcm(c.denom());
        num_gcd = num_gcd.gcd(c.numer());
    }
    if num_gcd.is_zero() {
        return Rational::one();
    }
    Rational::new(den_lcm, num_gcd)
}

impl fmt::Display for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_with(&|v| format!("x{v}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Lt,
    Le,
    Eq,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
        }
    }
}

/// `lhs rel 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    pub lhs: LinForm,
    pub rel: Rel,
}

impl Constraint {
    pub fn new(lhs: LinForm, rel: Rel) -> Self {
        Constraint { lhs, rel }
    }

    pub fn le(lhs: LinForm) -> Self {
        Self::new(lhs, Rel::Le)
    }

    pub fn lt(lhs: LinForm) -> Self {
        Self::new(lhs, Rel::Lt)
    }

    pub fn eq(lhs: LinForm) -> Self {
        Self::new(lhs, Rel::Eq)
    }

    /// `a rel b` as `a - b rel 0`.
    pub fn cmp(a: &LinForm, rel: Rel, b: &LinForm) -> Self {
        Self::new(a.sub(b), rel)
    }

    /// Scaled to coprime integer coefficients (positive factor), equalities
    /// sign-normalized.
    pub fn canonical(&self) -> Self {
        let s = self.lhs.primitive_scale();
        let mut lhs = self.lhs.scale(&s);
        if self.rel == Rel::Eq && (lhs.first_coeff_sign() < 0 || (lhs.is_constant() && lhs.constant.is_negative())) {
            lhs = lhs.neg();
        }
        Constraint { lhs, rel: self.rel }
    }

    /// Truth value when the constraint has no variables.
    pub fn constant_truth(&self) -> Option<bool> {
        if !self.lhs.is_constant() {
            return None;
        }
        let c = &self.lhs.constant;
        Some(match self.rel {
            Rel::Lt => c.is_negative(),
            Rel::Le => !c.is_positive(),
            Rel::Eq => c.is_zero(),
        })
    }

    /// The complement as a disjunction of constraints.
    pub fn negate(&self) -> Vec<Constraint> {
        match self.rel {
            Rel::Lt => vec![Constraint::le(self.lhs.neg())],
            Rel::Le => vec![Constraint::lt(self.lhs.neg())],
            Rel::Eq => vec![Constraint::lt(self.lhs.clone()), Constraint::lt(self.lhs.neg())],
        }
    }

    pub fn holds(&self, x: &dyn Fn(VarId) -> Rational) -> bool {
        let v = self.lhs.eval(x);
        match self.rel {
            Rel::Lt => v.is_negative(),
            Rel::Le => !v.is_positive(),
            Rel::Eq => v.is_zero(),
        }
    }

    pub fn holds_f64(&self, x: &dyn Fn(VarId) -> f64, slack: f64) -> bool {
        let v = self.lhs.eval_f64(x);
        match self.rel {
            Rel::Lt => v < slack,
            Rel::Le => v <= slack,
            Rel::Eq => v.abs() <= slack,
        }
    }

    /// Integer tightening for constraints over integer-valued variables:
    /// coprime integer coefficients, strict turned into `<= -1` form.
    pub fn tighten_integer(&self) -> Constraint {
        if self.lhs.is_constant() {
            return self.canonical();
        }
        let s = self.lhs.var_primitive_scale();
        let l = self.lhs.scale(&s);
        let c = l.constant.clone();
        let vars = l.add_constant(&-c.clone());
        match self.rel {
            Rel::Le => Constraint::le(vars.add_constant(&c.ceil())),
            Rel::Lt => Constraint::le(vars.add_constant(&(c.floor() + Rational::one()))),
            Rel::Eq => {
                if c.is_integer() {
                    Constraint::eq(vars.add_constant(&c)).canonical()
                } else {
                    Constraint::eq(LinForm::constant(Rational::one()))
                }
            }
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.lhs.vars()
    }

    pub fn fmt_with(&self, name: &dyn Fn(VarId) -> String) -> String {
        format!("{} {} 0", self.lhs.fmt_with(name), self.rel.symbol())
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} 0", self.lhs, self.rel.symbol())
    }
}
