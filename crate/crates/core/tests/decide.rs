mod common;

use accucheck::decide::{check_inequality, sign_laurent, sign_on_positive_reals, DecideOptions, SignVerdict};
use accucheck::symexp::rational::{int, rat, Rational};
use accucheck::symexp::text::parse_laurent;
use accucheck::symexp::{Encloser, ExpRational, LaurentExpPoly};
use common::{random_poly, ref_eval, Lcg};

fn poly(s: &str) -> LaurentExpPoly {
    parse_laurent(s).unwrap()
}

fn sign(s: &str) -> SignVerdict {
    sign_laurent(&poly(s), &DecideOptions::default())
}

fn assert_certified_negative(f: &LaurentExpPoly, v: &SignVerdict) -> Rational {
    let SignVerdict::FoundNeg { eps0, upper } = v else { panic!("{v:?}") };
    assert!(*eps0 > int(0));
    assert!(upper.to_rational() < int(0));
    assert!(ref_eval(f, eps0) < int(0));
    assert!(ref_eval(f, eps0) <= upper.to_rational());
    for p in DecideOptions::default().schedule {
        assert!(Encloser::new(f).point(eps0, p).hi.to_rational() < int(0), "precision {p}");
    }
    eps0.clone()
}

#[test]
fn one_minus_exp_is_nonneg() {
    assert_eq!(sign("1 - exp(-eps)"), SignVerdict::NonNeg);
    let f = ExpRational::parse("(1 - exp(-eps)) / (1 + exp(-2*eps))").unwrap();
    assert!(sign_on_positive_reals(&f, &DecideOptions::default()).is_nonneg());
}

#[test]
fn eps_exp_below_one_half() {
    let f = poly("eps*exp(-eps) - 1/2");
    assert_certified_negative(&f, &sign_laurent(&f, &DecideOptions::default()));
}

#[test]
fn negative_only_at_large_eps() {
    let f = poly("exp(-eps) - exp(-2*eps) - 1/10");
    assert!(ref_eval(&f, &rat(69, 100)) > int(0));
    assert!(ref_eval(&f, &int(5)) < int(0));
    assert_certified_negative(&f, &sign_laurent(&f, &DecideOptions::default()));
}

#[test]
fn accuracy_inequalities() {
    let o = DecideOptions::default();
    assert!(check_inequality(&ExpRational::one(), &poly("6*exp(-eps/8)"), &o).is_nonneg());
    let half = ExpRational::constant(rat(1, 2));
    let v = check_inequality(&half, &poly("exp(-eps)"), &o);
    let SignVerdict::FoundNeg { eps0, .. } = v else { panic!("{v:?}") };
    assert!(ref_eval(&poly("exp(-eps) - 1/2"), &eps0) < int(0));
}

fn log_points(n: usize) -> Vec<f64> {
    let (a, b) = (1e-4f64.ln(), 1e3f64.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `f(x)` divided by the sum of the absolute values of its terms, computed
/// with exponents shifted by the largest rate so nothing overflows.
fn relative_value(f: &LaurentExpPoly, x: f64) -> f64 {
    let terms: Vec<(f64, i32, f64)> = f
        .terms()
        .map(|(c, k, q)| (accucheck::symexp::rational::to_f64(c), k, accucheck::symexp::rational::to_f64(q)))
        .collect();
    let top = terms.iter().map(|t| t.2).fold(f64::NEG_INFINITY, f64::max);
    let (mut s, mut a) = (0.0, 0.0);
    for (c, k, q) in terms {
        let t = x.powi(k) * ((q - top) * x).exp();
        s += c * t;
        a += c.abs() * t;
    }
    if a == 0.0 {
        0.0
    } else {
        s / a
    }
}

#[test]
fn verdicts_survive_dense_sampling() {
    let mut rng = Lcg(0x5eed_cafe);
    let pts = log_points(100_000);
    let o = DecideOptions::default();
    let (mut nonneg, mut neg, mut unknown) = (0, 0, 0);
    for i in 0..100 {
        let f = random_poly(&mut rng, 1 + (i % 6), 3, 2);
        let v = sign_laurent(&f, &o);
        match &v {
            SignVerdict::NonNeg => {
                nonneg += 1;
                for &x in &pts {
                    assert!(relative_value(&f, x) >= -1e-12, "{f} at {x}");
                }
            }
            SignVerdict::FoundNeg { .. } => {
                neg += 1;
                assert_certified_negative(&f, &v);
            }
            SignVerdict::Unknown(_) => unknown += 1,
        }
        assert_eq!(sign_laurent(&f, &o), v, "{f} is not deterministic");
        let shallow = sign_laurent(&f, &DecideOptions { max_depth: 30, ..o.clone() });
        if !matches!(shallow, SignVerdict::Unknown(_)) && !matches!(v, SignVerdict::Unknown(_)) {
            assert_eq!(shallow.is_nonneg(), v.is_nonneg(), "{f}");
        }
    }
    assert!(nonneg >= 10 && neg >= 10, "{nonneg} nonneg, {neg} negative, {unknown} unknown");
    assert!(unknown <= 5, "{unknown} unknown");
}

#[test]
fn nonneg_by_construction() {
    let mut rng = Lcg(77);
    let o = DecideOptions::default();
    for _ in 0..40 {
        let f = random_poly(&mut rng, 3, 3, 2);
        let sq = &f * &f;
        let g = &sq + &LaurentExpPoly::constant(rat(1, 1000));
        assert!(sign_laurent(&g, &o).is_nonneg(), "{g}");
        let h = &poly("0 - 1/1000") - &sq;
        assert_certified_negative(&h, &sign_laurent(&h, &o));
    }
}
