//! Exact dense simplex (Bland's rule) over free variables.
//!
//! Runs first on checked 128-bit rationals and falls back to big rationals on overflow.

use super::linform::{Constraint, LinForm, Rel, VarId};
use crate::symexp::rational::Rational;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal(Rational),
}

trait Field: Clone + Sized {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rat(r: &Rational) -> Option<Self>;
    fn to_rat(&self) -> Rational;
    fn add(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn div(&self, o: &Self) -> Option<Self>;
    fn sign(&self) -> i32;
    fn lt(&self, o: &Self) -> Option<bool>;
}

impl Field for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rat(r: &Rational) -> Option<Self> {
        Some(r.clone())
    }
    fn to_rat(&self) -> Rational {
        self.clone()
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
    fn sign(&self) -> i32 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }
    fn lt(&self, o: &Self) -> Option<bool> {
        Some(self < o)
    }
}

#[derive(Clone, Copy, Debug)]
struct Q {
    n: i128,
    d: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Q {
    fn make(n: i128, d: i128) -> Option<Q> {
        if d == 0 {
            return None;
        }
        let g = gcd(n, d);
        let (mut n, mut d) = if g > 1 { (n / g, d / g) } else { (n, d) };
        if d < 0 {
            n = n.checked_neg()?;
            d = d.checked_neg()?;
        }
        Some(Q { n, d })
    }
}

const LIMIT: i128 = 1 << 62;

impl Field for Q {
    fn zero() -> Self {
        Q { n: 0, d: 1 }
    }
    fn one() -> Self {
        Q { n: 1, d: 1 }
    }
    fn from_rat(r: &Rational) -> Option<Self> {
        let n = r.numer().to_i128()?;
        let d = r.denom().to_i128()?;
        if n.abs() > LIMIT || d > LIMIT {
            return None;
        }
        Some(Q { n, d })
    }
    fn to_rat(&self) -> Rational {
        Rational::new(BigInt::from(self.n), BigInt::from(self.d))
    }
    fn add(&self, o: &Self) -> Option<Self> {
        if self.d == o.d {
            return Q::make(self.n.checked_add(o.n)?, self.d);
        }
        let g = gcd(self.d, o.d);
        let a = self.n.checked_mul(o.d / g)?;
        let b = o.n.checked_mul(self.d / g)?;
        let d = (self.d / g).checked_mul(o.d)?;
        let q = Q::make(a.checked_add(b)?, d)?;
        (q.n.abs() <= LIMIT && q.d <= LIMIT).then_some(q)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.add(&Q { n: -o.n, d: o.d })
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        if self.n == 0 || o.n == 0 {
            return Some(Self::zero());
        }
        let g1 = gcd(self.n, o.d);
        let g2 = gcd(o.n, self.d);
        let n = (self.n / g1).checked_mul(o.n / g2)?;
        let d = (self.d / g2).checked_mul(o.d / g1)?;
        let q = Q::make(n, d)?;
        (q.n.abs() <= LIMIT && q.d <= LIMIT).then_some(q)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        if o.n == 0 {
            return None;
        }
        self.mul(&Q::make(o.d, o.n)?)
    }
    fn sign(&self) -> i32 {
        self.n.signum() as i32
    }
    fn lt(&self, o: &Self) -> Option<bool> {
        Some(self.n.checked_mul(o.d)? < o.n.checked_mul(self.d)?)
    }
}

struct Tableau<F: Field> {
    rows: Vec<Vec<F>>,
    rhs: Vec<F>,
    basis: Vec<usize>,
    ncol: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl<F: Field> Tableau<F> {
    fn pivot(&mut self, r: usize, c: usize) -> Option<()> {
        let p = self.rows[r][c].clone();
        for j in 0..self.ncol {
            if self.rows[r][j].sign() != 0 {
                self.rows[r][j] = self.rows[r][j].div(&p)?;
            }
        }
        self.rhs[r] = self.rhs[r].div(&p)?;
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c].clone();
            if f.sign() == 0 {
                continue;
            }
            for j in 0..self.ncol {
                if self.rows[r][j].sign() != 0 {
                    let t = f.mul(&self.rows[r][j])?;
                    self.rows[i][j] = self.rows[i][j].sub(&t)?;
                }
            }
            let t = f.mul(&self.rhs[r])?;
            self.rhs[i] = self.rhs[i].sub(&t)?;
        }
        self.basis[r] = c;
        Some(())
    }

    fn run(&mut self, cost: &[F], excluded: &[bool]) -> Option<Step> {
        let mut iters = 0usize;
        loop {
            iters += 1;
            assert!(iters < 100_000, "simplex failed to terminate");
            let mut is_basic = vec![false; self.ncol];
            for &b in &self.basis {
                is_basic[b] = true;
            }
            let mut enter = None;
            for j in 0..self.ncol {
                if is_basic[j] || excluded[j] {
                    continue;
                }
                let mut d = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if cost[b].sign() != 0 && self.rows[i][j].sign() != 0 {
                        d = d.sub(&cost[b].mul(&self.rows[i][j])?)?;
                    }
                }
                if d.sign() > 0 {
                    enter = Some(j);
                    break;
                }
            }
            let Some(c) = enter else {
                return Some(Step::Optimal);
            };
            let mut best: Option<(usize, F)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][c].sign() > 0 {
                    let ratio = self.rhs[i].div(&self.rows[i][c])?;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio.lt(&br)? || (!br.lt(&ratio)? && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = best else {
                return Some(Step::Unbounded);
            };
            self.pivot(r, c)?;
        }
    }

    fn value(&self, cost: &[F]) -> Option<F> {
        let mut v = F::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            if cost[b].sign() != 0 {
                v = v.add(&cost[b].mul(&self.rhs[i])?)?;
            }
        }
        Some(v)
    }
}

/// rows of `a.x <= b`
fn solve<F: Field>(nvar: usize, a: &[Vec<Rational>], b: &[Rational], obj: &[Rational]) -> Option<LpOutcome> {
    let m = a.len();
    let ncol = 2 * nvar + m + 1;
    let aux = ncol - 1;
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![F::zero(); ncol];
        for j in 0..nvar {
            if !a[i][j].is_zero() {
                let v = F::from_rat(&a[i][j])?;
                row[2 * j] = v.clone();
                row[2 * j + 1] = F::zero().sub(&v)?;
            }
        }
        row[2 * nvar + i] = F::one();
        row[aux] = F::zero().sub(&F::one())?;
        rows.push(row);
        rhs.push(F::from_rat(&b[i])?);
    }
    let mut t = Tableau {
        rows,
        rhs,
        basis: (0..m).map(|i| 2 * nvar + i).collect(),
        ncol,
    };
    let mut excluded = vec![false; ncol];
    let neg = (0..m)
        .filter(|&i| t.rhs[i].sign() < 0)
        .min_by(|&i, &j| {
            if t.rhs[i].lt(&t.rhs[j]).unwrap_or(false) {
                std::cmp::Ordering::Less
            } else if t.rhs[j].lt(&t.rhs[i]).unwrap_or(false) {
                std::cmp::Ordering::Greater
            } else {
                i.cmp(&j)
            }
        });
    if let Some(r) = neg {
        t.pivot(r, aux)?;
        let mut c1 = vec![F::zero(); ncol];
        c1[aux] = F::zero().sub(&F::one())?;
        match t.run(&c1, &excluded)? {
            Step::Unbounded => unreachable!("phase one is bounded"),
            Step::Optimal => {}
        }
        if t.value(&c1)?.sign() < 0 {
            return Some(LpOutcome::Infeasible);
        }
        if let Some(r) = t.basis.iter().position(|&b| b == aux) {
            if let Some(c) = (0..ncol).find(|&j| j != aux && t.rows[r][j].sign() != 0) {
                t.pivot(r, c)?;
            } else {
                t.rows.remove(r);
                t.rhs.remove(r);
                t.basis.remove(r);
            }
        }
    }
    excluded[aux] = true;
    let mut c2 = vec![F::zero(); ncol];
    for j in 0..nvar {
        if !obj[j].is_zero() {
            let v = F::from_rat(&obj[j])?;
            c2[2 * j] = v.clone();
            c2[2 * j + 1] = F::zero().sub(&v)?;
        }
    }
    match t.run(&c2, &excluded)? {
        Step::Unbounded => Some(LpOutcome::Unbounded),
        Step::Optimal => Some(LpOutcome::Optimal(t.value(&c2)?.to_rat())),
    }
}

/// Maximize `obj` over the closure of `cons` (strict inequalities relaxed).
pub fn maximize(obj: &LinForm, cons: &[Constraint]) -> LpOutcome {
    let mut idx: BTreeMap<VarId, usize> = BTreeMap::new();
    for v in obj.vars().chain(cons.iter().flat_map(|c| c.lhs.vars())) {
        let n = idx.len();
        idx.entry(v).or_insert(n);
    }
    let nvar = idx.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut push = |l: &LinForm| {
        let mut row = vec![<Rational as Zero>::zero(); nvar];
        for (v, c) in l.coeffs() {
            row[idx[&v]] = c.clone();
        }
        a.push(row);
        b.push(-l.constant.clone());
    };
    for c in cons {
        if let Some(t) = closed_truth(c) {
            if !t {
                return LpOutcome::Infeasible;
            }
            continue;
        }
        match c.rel {
            Rel::Lt | Rel::Le => push(&c.lhs),
            Rel::Eq => {
                push(&c.lhs);
                push(&c.lhs.neg());
            }
        }
    }
    let mut o = vec![<Rational as Zero>::zero(); nvar];
    for (v, c) in obj.coeffs() {
        o[idx[&v]] = c.clone();
    }
    let res = match solve::<Q>(nvar, &a, &b, &o) {
        Some(r) => r,
        None => solve::<Rational>(nvar, &a, &b, &o).expect("exact simplex"),
    };
    match res {
        LpOutcome::Optimal(v) => LpOutcome::Optimal(v + &obj.constant),
        r => r,
    }
}

fn closed_truth(c: &Constraint) -> Option<bool> {
    if !c.lhs.is_constant() {
        return None;
    }
    let v = &c.lhs.constant;
    Some(match c.rel {
        Rel::Lt | Rel::Le => !v.is_positive(),
        Rel::Eq => v.is_zero(),
    })
}

pub fn minimize(obj: &LinForm, cons: &[Constraint]) -> LpOutcome {
    match maximize(&obj.neg(), cons) {
        LpOutcome::Optimal(v) => LpOutcome::Optimal(-v),
        r => r,
    }
}
