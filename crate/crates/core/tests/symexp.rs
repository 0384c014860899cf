mod common;

use accucheck::symexp::rational::{int, parse_rational, rat, Rational};
use accucheck::symexp::text::parse_laurent;
use accucheck::symexp::{
    dominant_term_at_infinity, enclose, vanishing_order_at_zero, Encloser, ExpRational,
    LaurentExpPoly, Vanishing,
};
use common::{random_poly, ref_eval, ref_eval_f64, Lcg};
use num_traits::{One, Zero};

fn e(q: Rational) -> LaurentExpPoly {
    LaurentExpPoly::exp(q)
}

fn c(v: i64) -> LaurentExpPoly {
    LaurentExpPoly::constant(int(v))
}

#[test]
fn arith_examples() {
    let a = &c(1) + &e(int(-1)).scale(&int(2));
    let b = e(int(-1)).scale(&int(-2));
    assert_eq!(&a + &b, c(1));
    assert_eq!(&e(rat(-1, 2)) * &e(rat(-1, 2)), e(int(-1)));
    let x = LaurentExpPoly::term(int(1), 1, int(-1));
    let y = LaurentExpPoly::term(int(1), -1, int(0));
    assert_eq!(&x * &y, e(int(-1)));
    assert!((&a - &a).is_zero());
}

#[test]
fn ring_laws_on_random_polys() {
    let mut rng = Lcg(0x9e3779b97f4a7c15);
    for _ in 0..200 {
        let f = random_poly(&mut rng, 8, 3, 2);
        let g = random_poly(&mut rng, 8, 3, 2);
        let h = random_poly(&mut rng, 8, 3, 2);
        assert_eq!(&f + &g, &g + &f);
        assert_eq!(&f * &g, &g * &f);
        assert_eq!(&(&f + &g) + &h, &f + &(&g + &h));
        assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
        assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
        assert_eq!(&f + &LaurentExpPoly::zero(), f);
        assert_eq!(&f * &LaurentExpPoly::one(), f);
        assert!(f.terms().all(|(c, _, _)| !c.is_zero()));
    }
}

#[test]
fn text_round_trip() {
    let mut rng = Lcg(77);
    for _ in 0..200 {
        let f = random_poly(&mut rng, 6, 3, 2);
        let s = f.to_string();
        assert_eq!(parse_laurent(&s).unwrap(), f, "{s}");
    }
    let g = parse_laurent("1 - 4/3*exp(-2/9*eps) + eps^2*exp(-eps/9)").unwrap();
    let mut want = LaurentExpPoly::one();
    want.add_term(rat(-4, 3), 0, rat(-2, 9));
    want.add_term(int(1), 2, rat(-1, 9));
    assert_eq!(g, want);
    assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
}

#[test]
fn enclose_examples() {
    let one = int(1);
    let iv = enclose(&e(int(-1)), &one, &one, 30);
    let w = iv.width().to_rational();
    assert!(w <= Rational::new(1.into(), (1u64 << 20).into()));
    let einv = 0.36787944117144233;
    assert!(iv.contains_f64(einv, 1e-15));

    let iv = enclose(&c(1), &int(1), &int(2), 10);
    assert_eq!(iv.lo.to_rational(), one);
    assert_eq!(iv.hi.to_rational(), one);

    let f = &c(1) - &e(int(-1));
    let iv = enclose(&f, &int(1), &int(2), 20);
    assert!(iv.lo.to_f64() >= 0.632 && iv.hi.to_f64() <= 0.865);
    assert!(iv.lo.to_f64() <= 1.0 - (-1f64).exp());
    assert!(iv.hi.to_f64() >= 1.0 - (-2f64).exp());
}

#[test]
fn enclosure_soundness_against_series_reference() {
    let mut rng = Lcg(12345);
    for _ in 0..1000 {
        let f = random_poly(&mut rng, 5, 3, 2);
        let num = rng.range(1, 400);
        let den = rng.range(1, 40);
        let x = rat(num, den);
        let truth = ref_eval(&f, &x);
        let enc = Encloser::new(&f);
        for p in [10, 20, 40] {
            let iv = enc.point(&x, p);
            assert!(
                iv.lo.to_rational() <= truth && truth <= iv.hi.to_rational(),
                "f={f} eps={x} p={p} iv={iv}"
            );
        }
    }
}

#[test]
fn interval_enclosures_contain_sampled_values() {
    let mut rng = Lcg(4242);
    for _ in 0..150 {
        let f = random_poly(&mut rng, 5, 3, 2);
        let lo = rat(rng.range(1, 60), 16);
        let hi = &lo + rat(rng.range(0, 40), 16);
        let enc = Encloser::new(&f);
        let iv = enc.enclose(&lo, &hi, 30);
        for j in 0..=8 {
            let x = &lo + (&hi - &lo) * rat(j, 8);
            let v = ref_eval(&f, &x);
            assert!(iv.lo.to_rational() <= v && v <= iv.hi.to_rational(), "f={f} x={x}");
        }
        // refinement: halving and raising precision never widens
        let mid = (&lo + &hi) / int(2);
        let w0 = iv.width().to_rational();
        let w1 = enc.enclose(&lo, &mid, 31).width().to_rational();
        let w2 = enc.enclose(&mid, &hi, 31).width().to_rational();
        let slack = Rational::new(1.into(), (1u64 << 24).into()) * (w0.clone() + int(1));
        assert!(w1 <= &w0 + &slack && w2 <= &w0 + &slack, "f={f} [{lo},{hi}]");
    }
}

#[test]
fn vanishing_order_examples() {
    let f = &c(1) - &e(int(-1));
    assert_eq!(
        vanishing_order_at_zero(&f),
        Vanishing::Order {
            order: 1,
            coeff: int(1)
        }
    );
    let g = &e(int(-1)) - &e(int(-2));
    assert_eq!(
        vanishing_order_at_zero(&g),
        Vanishing::Order {
            order: 1,
            coeff: int(1)
        }
    );
    assert_eq!(
        vanishing_order_at_zero(&(&e(int(-1)) - &e(int(-1)))),
        Vanishing::IdenticallyZero
    );
    // 1 - e^{-x} - x + x^2/2 vanishes to order 3
    let mut h = &c(1) - &e(int(-1));
    h.add_term(int(-1), 1, int(0));
    h.add_term(rat(1, 2), 2, int(0));
    assert_eq!(
        vanishing_order_at_zero(&h),
        Vanishing::Order {
            order: 3,
            coeff: rat(1, 6)
        }
    );
}

#[test]
fn vanishing_order_consistency() {
    let mut rng = Lcg(999);
    for _ in 0..60 {
        let f = random_poly(&mut rng, 4, 3, 2);
        let Vanishing::Order { order, coeff } = vanishing_order_at_zero(&f) else {
            continue;
        };
        let cf = common::ref_eval_f64(&LaurentExpPoly::constant(coeff.clone()), &int(1));
        for d in 3..=8 {
            let x = Rational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(10), d));
            let v = ref_eval(&f, &x) / accucheck::symexp::rational::pow(&x, order);
            let vf = common::ref_eval_f64(&LaurentExpPoly::constant(v), &int(1));
            let eps = 10f64.powi(-(d as i32));
            // the error term is O(eps) with a constant bounded by the coefficient mass
            let mass = accucheck::symexp::rational::to_f64(&f.abs_mass_bound());
            assert!(
                (vf - cf).abs() <= 10.0 * eps * mass.max(cf.abs()).max(1.0),
                "f={f} d={d} v={vf} c={cf}"
            );
        }
    }
}

#[test]
fn dominant_term_examples() {
    let f = &c(1) - &e(rat(-1, 8)).scale(&int(6));
    let d = dominant_term_at_infinity(&f).unwrap();
    assert_eq!((d.q.clone(), d.k, d.c.clone()), (int(0), 0, int(1)));
    assert!(accucheck::symexp::rational::to_f64(&d.e_safe) >= 8.0 * 6f64.ln());

    let mut g = LaurentExpPoly::term(int(1), 1, int(-1));
    g.add_term(int(-1), 0, int(-2));
    let d = dominant_term_at_infinity(&g).unwrap();
    assert_eq!((d.q.clone(), d.k, d.c.clone()), (int(-1), 1, int(1)));
    for t in [1, 2, 4, 10] {
        let x = &d.e_safe + int(t);
        assert!(ref_eval_f64(&g, &x) > 0.0);
    }

    let d = dominant_term_at_infinity(&c(-3)).unwrap();
    assert_eq!((d.q, d.k, d.c, d.e_safe), (int(0), 0, int(-3), int(0)));
}

#[test]
fn dominance_threshold_is_sound_on_random_polys() {
    let mut rng = Lcg(31337);
    for _ in 0..80 {
        let f = random_poly(&mut rng, 5, 3, 2);
        let Some(d) = dominant_term_at_infinity(&f) else {
            continue;
        };
        for t in [rat(1, 10), int(1), int(7), int(50)] {
            let x = &d.e_safe + t;
            let v = ref_eval(&f, &x);
            assert_eq!(v.is_positive_helper(), d.c > Rational::zero(), "f={f} x={x}");
        }
    }
}

trait Pos {
    fn is_positive_helper(&self) -> bool;
}

impl Pos for Rational {
    fn is_positive_helper(&self) -> bool {
        *self > Rational::zero()
    }
}

#[test]
fn exprational_denominators() {
    let bad = &e(int(-1)) - &LaurentExpPoly::constant(rat(1, 2));
    assert!(ExpRational::new(LaurentExpPoly::one(), bad).is_err());
    let good = &c(1) - &e(int(-1));
    let q = ExpRational::new(LaurentExpPoly::one(), good.clone()).unwrap();
    assert_eq!(&q * &ExpRational::from_laurent(good), ExpRational::one());
    let p = ExpRational::parse("(1 - exp(-eps)) / (1 + exp(-eps))").unwrap();
    let v = p.eval_f64(1.0);
    assert!((v - (1.0 - (-1f64).exp()) / (1.0 + (-1f64).exp())).abs() < 1e-12);
    assert!(ExpRational::parse("1 / (exp(-eps) - 1/2)").is_err());
    assert_eq!(
        ExpRational::parse("exp(-eps)/exp(-2*eps)").unwrap(),
        ExpRational::from_laurent(e(int(1)))
    );
    let _ = Rational::one();
}
