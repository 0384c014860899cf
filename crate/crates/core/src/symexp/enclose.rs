//! Certified enclosures of Laurent exponential polynomials on intervals of (0, inf).

use super::dyadic::{Dir, Dyadic, Interval};
use super::laurent::{exp_upper_rational, LaurentExpPoly};
use super::rational::{factorial, int, pow, Rational};
use num_traits::{One, Signed, Zero};
use std::sync::OnceLock;

/// Certified enclosure of `f` over `[lo, hi]` with `0 < lo <= hi`.
pub fn enclose(f: &LaurentExpPoly, lo: &Rational, hi: &Rational, prec: u32) -> Interval {
    Encloser::new(f).enclose(lo, hi, prec)
}

/// Enclosure engine with cached derivatives and Taylor data for one function.
pub struct Encloser {
    f: LaurentExpPoly,
    derivs: OnceLock<[LaurentExpPoly; 3]>,
    series: OnceLock<Series>,
}

struct Series {
    kmin: i32,
    coeffs: Vec<Rational>,
    /// `bounds[j]`: bound B with |f - sum_{N < kmin+j} a_N eps^N| <= B eps^{kmin+j} on (0,1].
    bounds: Vec<Rational>,
}

const SERIES_LEN: usize = 48;

impl Encloser {
    pub fn new(f: &LaurentExpPoly) -> Self {
        Encloser {
            f: f.clone(),
            derivs: OnceLock::new(),
            series: OnceLock::new(),
        }
    }

    pub fn function(&self) -> &LaurentExpPoly {
        &self.f
    }

    fn derivs(&self) -> &[LaurentExpPoly; 3] {
        self.derivs.get_or_init(|| {
            let d1 = self.f.derivative();
            let d2 = d1.derivative();
            let d3 = d2.derivative();
            [d1, d2, d3]
        })
    }

    fn series(&self) -> &Series {
        self.series.get_or_init(|| {
            let kmin = self.f.min_k().unwrap_or(0);
            let coeffs = (0..SERIES_LEN)
                .map(|j| self.f.taylor_coeff(kmin + j as i32))
                .collect();
            let bounds = (0..=SERIES_LEN)
                .map(|j| remainder_bound(&self.f, kmin + j as i32))
                .collect();
            Series {
                kmin,
                coeffs,
                bounds,
            }
        })
    }

    pub fn enclose(&self, lo: &Rational, hi: &Rational, prec: u32) -> Interval {
        assert!(lo.is_positive() && lo <= hi, "enclosure needs 0 < lo <= hi");
        if let Some(c) = self.f.as_constant() {
            return Interval::from_rational(&c, prec);
        }
        let w = prec + 12;
        let e = Interval::from_bounds(lo, hi, w + 8);
        let mut best = naive(&self.f, &e, w);
        if lo != hi {
            if let Some(mv) = self.midpoint_form(lo, hi, w) {
                best = best.intersect(&mv).unwrap_or(best);
            }
        }
        if *hi <= Rational::one() {
            let t = self.series_form(&e, w);
            best = best.intersect(&t).unwrap_or(best);
        }
        Interval {
            lo: best.lo.round(prec, Dir::Down),
            hi: best.hi.round(prec, Dir::Up),
        }
    }

    pub fn point(&self, x: &Rational, prec: u32) -> Interval {
        self.enclose(x, x, prec)
    }

    fn midpoint_form(&self, lo: &Rational, hi: &Rational, w: u32) -> Option<Interval> {
        let [d1, d2, d3] = self.derivs();
        let m = (lo + hi) / int(2);
        let h = (hi - lo) / int(2);
        let mi = Interval::from_rational(&m, w + 8);
        let hi_ = Interval::from_rational(&h, w + 8).hi;
        let sym = Interval {
            lo: hi_.neg(),
            hi: hi_.clone(),
        };
        let h2 = hi_.mul_exact(&hi_).round(w, Dir::Up);
        let h3 = h2.mul_exact(&hi_).round(w, Dir::Up);
        let f0 = naive(&self.f, &mi, w);
        let f1 = naive(d1, &mi, w);
        let f2 = naive(d2, &mi, w);
        let e = Interval::from_bounds(lo, hi, w + 8);
        let f3 = naive(d3, &e, w);
        let t1 = f1.mul(&sym, w);
        let t2 = f2
            .mul(
                &Interval {
                    lo: Dyadic::zero(),
                    hi: h2,
                },
                w,
            )
            .mul_pow2(-1);
        let t3 = f3
            .mul(
                &Interval {
                    lo: h3.neg(),
                    hi: h3,
                },
                w,
            )
            .div6(w);
        Some(f0.add(&t1, w).add(&t2, w).add(&t3, w))
    }

    fn series_form(&self, e: &Interval, w: u32) -> Interval {
        let s = self.series();
        // pick the truncation with the smallest remainder contribution at hi
        let mut best_j = SERIES_LEN;
        let mut best_val = f64::INFINITY;
        let hif = e.hi.to_f64();
        for j in 1..=SERIES_LEN {
            let b = super::rational::to_f64(&s.bounds[j]);
            let v = b * hif.powi(s.kmin + j as i32);
            if v < best_val {
                best_val = v;
                best_j = j;
            }
        }
        let mut acc = Interval::zero();
        for (i, a) in s.coeffs.iter().take(best_j).enumerate() {
            if a.is_zero() {
                continue;
            }
            let n = s.kmin + i as i32;
            let p = e.powi_pos(n, w);
            acc = acc.add(&p.scale_rational(a, w), w);
        }
        let n = s.kmin + best_j as i32;
        let p = e.powi_pos(n, w);
        let b = Dyadic::from_rational(&s.bounds[best_j], w, Dir::Up);
        let r = b.mul_exact(&p.hi).round(w, Dir::Up);
        acc.add(
            &Interval {
                lo: r.neg(),
                hi: r,
            },
            w,
        )
    }
}

impl Interval {
    fn div6(&self, w: u32) -> Interval {
        Interval {
            lo: self.lo.div_int(6, w, Dir::Down),
            hi: self.hi.div_int(6, w, Dir::Up),
        }
    }
}

/// Termwise interval evaluation.
pub fn naive(f: &LaurentExpPoly, e: &Interval, w: u32) -> Interval {
    let mut acc = Interval::zero();
    for (c, k, q) in f.terms() {
        let mut t = Interval::from_rational(c, w + 4);
        if k != 0 {
            t = t.mul(&e.powi_pos(k, w + 4), w + 4);
        }
        if !q.is_zero() {
            let arg = e.scale_rational(q, w + 8);
            t = t.mul(&arg.exp(w + 4), w + 4);
        }
        acc = acc.add(&t, w);
    }
    acc
}

/// Bound B with |sum_{N >= n} a_N eps^N| <= B eps^n for eps in (0, 1].
fn remainder_bound(f: &LaurentExpPoly, n: i32) -> Rational {
    let mut b = Rational::zero();
    for (c, k, q) in f.terms() {
        let j = n - k;
        let jj = j.max(0) as u32;
        if q.is_zero() {
            if jj == 0 {
                b += c.abs();
            }
            continue;
        }
        let qa = q.abs();
        let t = pow(&qa, jj as i32) / Rational::from_integer(factorial(jj)) * exp_upper_rational(&qa);
        b += c.abs() * t;
    }
    b
}
