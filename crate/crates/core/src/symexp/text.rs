//! Parser for the textual forms of eps-expressions, shared by LaurentExpPoly,
//! ExpRational and beta expressions.

use super::laurent::LaurentExpPoly;
use super::rational::{parse_rational, Rational};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("expression error at byte {pos}: {msg}")]
pub struct TextError {
    pub pos: usize,
    pub msg: String,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, TextError> {
    Err(TextError {
        pos,
        msg: msg.into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sym {
    Eps,
    Alpha,
    Gamma,
}

#[derive(Clone, Debug)]
enum Ast {
    Num(Rational),
    Sym(Sym, usize),
    Exp(Box<Ast>, usize),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>, usize),
    Pow(Box<Ast>, i32, usize),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<(Tok, usize)>, TextError> {
    let b = s.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && i + 1 < b.len() && (b[i + 1] as char).is_ascii_digit()) {
            let st = i;
            while i < b.len() && ((b[i] as char).is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            out.push((Tok::Num(s[st..i].to_string()), st));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let st = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(s[st..i].to_string()), st));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return err(i, format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

struct P {
    toks: Vec<(Tok, usize)>,
    i: usize,
    end: usize,
}

impl P {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.0)
    }
    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|t| t.1).unwrap_or(self.end)
    }
    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.i += 1;
            true
        } else {
            false
        }
    }
    fn expr(&mut self) -> Result<Ast, TextError> {
        let mut a = self.term()?;
        loop {
            if self.eat('+') {
                a = Ast::Add(Box::new(a), Box::new(self.term()?));
            } else if self.eat('-') {
                a = Ast::Sub(Box::new(a), Box::new(self.term()?));
            } else {
                return Ok(a);
            }
        }
    }
    fn term(&mut self) -> Result<Ast, TextError> {
        let mut a = self.unary()?;
        loop {
            if self.eat('*') {
                a = Ast::Mul(Box::new(a), Box::new(self.unary()?));
            } else if self.peek() == Some(&Tok::Op('/')) {
                let p = self.pos();
                self.i += 1;
                a = Ast::Div(Box::new(a), Box::new(self.unary()?), p);
            } else {
                return Ok(a);
            }
        }
    }
    fn unary(&mut self) -> Result<Ast, TextError> {
        if self.eat('-') {
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }
    fn power(&mut self) -> Result<Ast, TextError> {
        let a = self.atom()?;
        if self.peek() == Some(&Tok::Op('^')) {
            let p = self.pos();
            self.i += 1;
            let neg = self.eat('-');
            match self.peek().cloned() {
                Some(Tok::Num(n)) => {
                    self.i += 1;
                    let v: i32 = n.parse().or_else(|_| err(p, "exponent must be an integer"))?;
                    return Ok(Ast::Pow(Box::new(a), if neg { -v } else { v }, p));
                }
                _ => return err(p, "expected integer exponent"),
            }
        }
        Ok(a)
    }
    fn atom(&mut self) -> Result<Ast, TextError> {
        let p = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.i += 1;
                let r = parse_rational(&n).or_else(|_| err(p, format!("bad number `{n}`")))?;
                Ok(Ast::Num(r))
            }
            Some(Tok::Ident(id)) => {
                self.i += 1;
                match id.as_str() {
                    "eps" | "epsilon" => Ok(Ast::Sym(Sym::Eps, p)),
                    "alpha" => Ok(Ast::Sym(Sym::Alpha, p)),
                    "gamma" => Ok(Ast::Sym(Sym::Gamma, p)),
                    "exp" => {
                        if !self.eat('(') {
                            return err(self.pos(), "expected `(` after exp");
                        }
                        let a = self.expr()?;
                        if !self.eat(')') {
                            return err(self.pos(), "expected `)`");
                        }
                        Ok(Ast::Exp(Box::new(a), p))
                    }
                    _ => err(p, format!("unknown symbol `{id}`")),
                }
            }
            Some(Tok::Op('(')) => {
                self.i += 1;
                let a = self.expr()?;
                if !self.eat(')') {
                    return err(self.pos(), "expected `)`");
                }
                Ok(a)
            }
            _ => err(p, "expected a number, symbol, exp(...) or `(`"),
        }
    }
}

fn parse_ast(s: &str) -> Result<Ast, TextError> {
    let toks = lex(s)?;
    let mut p = P {
        toks,
        i: 0,
        end: s.len(),
    };
    let a = p.expr()?;
    if p.i != p.toks.len() {
        return err(p.pos(), "trailing input");
    }
    Ok(a)
}

/// Polynomial in (eps, alpha, gamma), used for exponent arguments.
type Poly = BTreeMap<(u32, u32, u32), Rational>;

fn poly_add(a: &Poly, b: &Poly, sign: i32) -> Poly {
    let mut out = a.clone();
    for (k, v) in b {
        let e = out.entry(*k).or_insert_with(Rational::zero);
        if sign > 0 {
            *e += v;
        } else {
            *e -= v;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (k1, v1) in a {
        for (k2, v2) in b {
            let k = (k1.0 + k2.0, k1.1 + k2.1, k1.2 + k2.2);
            *out.entry(k).or_insert_with(Rational::zero) += v1 * v2;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn poly_const(p: &Poly) -> Option<Rational> {
    match p.len() {
        0 => Some(Rational::zero()),
        1 => p.get(&(0, 0, 0)).cloned(),
        _ => None,
    }
}

fn eval_poly(a: &Ast) -> Result<Poly, TextError> {
    Ok(match a {
        Ast::Num(r) => {
            let mut p = Poly::new();
            if !r.is_zero() {
                p.insert((0, 0, 0), r.clone());
            }
            p
        }
        Ast::Sym(s, _) => {
            let k = match s {
                Sym::Eps => (1, 0, 0),
                Sym::Alpha => (0, 1, 0),
                Sym::Gamma => (0, 0, 1),
            };
            Poly::from([(k, Rational::one())])
        }
        Ast::Exp(_, p) => return err(*p, "nested exp is not allowed"),
        Ast::Neg(x) => poly_add(&Poly::new(), &eval_poly(x)?, -1),
        Ast::Add(x, y) => poly_add(&eval_poly(x)?, &eval_poly(y)?, 1),
        Ast::Sub(x, y) => poly_add(&eval_poly(x)?, &eval_poly(y)?, -1),
        Ast::Mul(x, y) => poly_mul(&eval_poly(x)?, &eval_poly(y)?),
        Ast::Div(x, y, p) => {
            let d = eval_poly(y)?;
            match poly_const(&d) {
                Some(c) if !c.is_zero() => {
                    let inv = Poly::from([((0, 0, 0), c.recip())]);
                    poly_mul(&eval_poly(x)?, &inv)
                }
                _ => return err(*p, "exponent arguments may only be divided by nonzero constants"),
            }
        }
        Ast::Pow(x, n, p) => {
            if *n < 0 {
                return err(*p, "negative power inside exp");
            }
            let b = eval_poly(x)?;
            let mut acc = Poly::from([((0, 0, 0), Rational::one())]);
            for _ in 0..*n {
                acc = poly_mul(&acc, &b);
            }
            acc
        }
    })
}

/// Key of a general term `eps^k * exp((q0 + qa*alpha + qg*gamma)*eps)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenKey {
    pub k: i32,
    pub q0: Rational,
    pub qa: Rational,
    pub qg: Rational,
}

pub type GenSum = BTreeMap<GenKey, Rational>;

fn gs_add(a: &GenSum, b: &GenSum, sign: i32) -> GenSum {
    let mut out = a.clone();
    for (k, v) in b {
        let e = out.entry(k.clone()).or_insert_with(Rational::zero);
        if sign > 0 {
            *e += v;
        } else {
            *e -= v;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn gs_mul(a: &GenSum, b: &GenSum) -> GenSum {
    let mut out = GenSum::new();
    for (k1, v1) in a {
        for (k2, v2) in b {
            let k = GenKey {
                k: k1.k + k2.k,
                q0: &k1.q0 + &k2.q0,
                qa: &k1.qa + &k2.qa,
                qg: &k1.qg + &k2.qg,
            };
            *out.entry(k).or_insert_with(Rational::zero) += v1 * v2;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn gs_one() -> GenSum {
    GenSum::from([(
        GenKey {
            k: 0,
            q0: Rational::zero(),
            qa: Rational::zero(),
            qg: Rational::zero(),
        },
        Rational::one(),
    )])
}

/// Inverse of a single-term sum.
fn gs_inv_monomial(a: &GenSum) -> Option<GenSum> {
    if a.len() != 1 {
        return None;
    }
    let (k, v) = a.iter().next().unwrap();
    Some(GenSum::from([(
        GenKey {
            k: -k.k,
            q0: -k.q0.clone(),
            qa: -k.qa.clone(),
            qg: -k.qg.clone(),
        },
        v.recip(),
    )]))
}

#[derive(Clone, Debug)]
struct Frac {
    num: GenSum,
    den: GenSum,
}

impl Frac {
    fn of(num: GenSum) -> Self {
        Frac { num, den: gs_one() }
    }
    fn add(&self, o: &Frac, sign: i32) -> Frac {
        if self.den == o.den {
            return Frac {
                num: gs_add(&self.num, &o.num, sign),
                den: self.den.clone(),
            };
        }
        Frac {
            num: gs_add(&gs_mul(&self.num, &o.den), &gs_mul(&o.num, &self.den), sign),
            den: gs_mul(&self.den, &o.den),
        }
    }
    fn mul(&self, o: &Frac) -> Frac {
        Frac {
            num: gs_mul(&self.num, &o.num),
            den: gs_mul(&self.den, &o.den),
        }
        .simplify()
    }
    fn inv(&self) -> Option<Frac> {
        if self.num.is_empty() {
            return None;
        }
        Some(
            Frac {
                num: self.den.clone(),
                den: self.num.clone(),
            }
            .simplify(),
        )
    }
    fn simplify(self) -> Frac {
        if let Some(inv) = gs_inv_monomial(&self.den) {
            return Frac {
                num: gs_mul(&self.num, &inv),
                den: gs_one(),
            };
        }
        self
    }
}

fn eval_frac(a: &Ast) -> Result<Frac, TextError> {
    Ok(match a {
        Ast::Num(r) => {
            let mut g = GenSum::new();
            if !r.is_zero() {
                g.insert(
                    GenKey {
                        k: 0,
                        q0: Rational::zero(),
                        qa: Rational::zero(),
                        qg: Rational::zero(),
                    },
                    r.clone(),
                );
            }
            Frac::of(g)
        }
        Ast::Sym(Sym::Eps, _) => Frac::of(GenSum::from([(
            GenKey {
                k: 1,
                q0: Rational::zero(),
                qa: Rational::zero(),
                qg: Rational::zero(),
            },
            Rational::one(),
        )])),
        Ast::Sym(_, p) => return err(*p, "alpha and gamma may only appear inside exp(...)"),
        Ast::Exp(arg, p) => {
            let poly = eval_poly(arg)?;
            let mut key = GenKey {
                k: 0,
                q0: Rational::zero(),
                qa: Rational::zero(),
                qg: Rational::zero(),
            };
            for (m, v) in &poly {
                match m {
                    (1, 0, 0) => key.q0 = v.clone(),
                    (1, 1, 0) => key.qa = v.clone(),
                    (1, 0, 1) => key.qg = v.clone(),
                    _ => {
                        return err(
                            *p,
                            "exp argument must be (q0 + qa*alpha + qg*gamma)*eps",
                        )
                    }
                }
            }
            Frac::of(GenSum::from([(key, Rational::one())]))
        }
        Ast::Neg(x) => {
            let f = eval_frac(x)?;
            Frac {
                num: gs_add(&GenSum::new(), &f.num, -1),
                den: f.den,
            }
        }
        Ast::Add(x, y) => eval_frac(x)?.add(&eval_frac(y)?, 1),
        Ast::Sub(x, y) => eval_frac(x)?.add(&eval_frac(y)?, -1),
        Ast::Mul(x, y) => eval_frac(x)?.mul(&eval_frac(y)?),
        Ast::Div(x, y, p) => {
            let d = eval_frac(y)?.inv().ok_or(TextError {
                pos: *p,
                msg: "division by zero".into(),
            })?;
            eval_frac(x)?.mul(&d)
        }
        Ast::Pow(x, n, p) => {
            let b = eval_frac(x)?;
            let b = if *n < 0 {
                b.inv().ok_or(TextError {
                    pos: *p,
                    msg: "zero to a negative power".into(),
                })?
            } else {
                b
            };
            let mut acc = Frac::of(gs_one());
            for _ in 0..n.unsigned_abs() {
                acc = acc.mul(&b);
            }
            acc
        }
    })
}

/// Parse a sum of terms `c * eps^k * exp((q0 + qa*alpha + qg*gamma)*eps)`.
/// Division is allowed only when the overall denominator is a single term.
pub fn parse_general(s: &str) -> Result<GenSum, TextError> {
    let f = eval_frac(&parse_ast(s)?)?;
    if f.den != gs_one() {
        return err(0, "expression is not a finite sum of exponential terms");
    }
    Ok(f.num)
}

/// Parse a quotient of exponential sums (no alpha/gamma).
pub fn parse_quotient(s: &str) -> Result<(LaurentExpPoly, LaurentExpPoly), TextError> {
    let f = eval_frac(&parse_ast(s)?)?;
    Ok((to_laurent(&f.num)?, to_laurent(&f.den)?))
}

pub fn to_laurent(g: &GenSum) -> Result<LaurentExpPoly, TextError> {
    let mut p = LaurentExpPoly::zero();
    for (k, v) in g {
        if !k.qa.is_zero() || !k.qg.is_zero() {
            return err(0, "alpha/gamma are not allowed here");
        }
        p.add_term(v.clone(), k.k, k.q0.clone());
    }
    Ok(p)
}

pub fn parse_laurent(s: &str) -> Result<LaurentExpPoly, TextError> {
    to_laurent(&parse_general(s)?)
}
