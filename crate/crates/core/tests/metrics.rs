mod common;

use accucheck::integrator::VarId;
use accucheck::lang::{det_cells, evaluate, parse_checked, DetCell, DetOptions, DetSpec, OutValue, Program};
use accucheck::metrics::{dd_at_point, det_output, Extended, InputMetric, OutputContext, OutputMetric};
use accucheck::semantics::{build_dtmc, input_by_name, BuildOptions, OutputEvent, Solver};
use accucheck::symexp::rational::{int, rat, Rational};
use common::Lcg;

fn corpus(name: &str) -> Program {
    let path = format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_checked(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn cells(p: &Program) -> Vec<DetCell> {
    det_cells(&DetSpec::Program(p.clone()), &[], &DetOptions::default()).unwrap()
}

fn point(p: &Program, xs: &[Rational]) -> Vec<(VarId, Rational)> {
    (1..=xs.len()).map(|i| (p.var(&format!("q[{i}]")).unwrap(), xs[i - 1].clone())).collect()
}

fn ints(xs: &[i64]) -> Vec<Rational> {
    xs.iter().map(|&x| int(x)).collect()
}

fn fin(r: Rational) -> Extended {
    Extended::Finite(r)
}

#[test]
fn noisy_max_dd_examples() {
    let p = corpus("noisy_max_det_m3.dpw");
    let cs = cells(&p);
    let dd = |xs: &[i64]| dd_at_point(&cs, &point(&p, &ints(xs)), &InputMetric::Linf).unwrap();
    assert_eq!(dd(&[3, 1, 1]), fin(int(1)));
    assert_eq!(dd(&[1, 1, 1]), fin(int(0)));
    assert_eq!(dd(&[1, 3, 3]), fin(int(0)));
    assert_eq!(dd(&[0, 0, 5]), fin(rat(5, 2)));
}

#[test]
fn noisy_max_dd_is_half_the_gap() {
    let p = corpus("noisy_max_det_m3.dpw");
    let cs = cells(&p);
    let mut g = Lcg(0x5eed);
    for _ in 0..20 {
        let xs: Vec<i64> = (0..3).map(|_| g.range(-6, 6)).collect();
        let mut s = xs.clone();
        s.sort_unstable_by(|a, b| b.cmp(a));
        let want = rat(s[0] - s[1], 2);
        let got = dd_at_point(&cs, &point(&p, &ints(&xs)), &InputMetric::Linf).unwrap();
        assert_eq!(got, fin(want), "at {xs:?}");
    }
}

#[test]
fn det_output_matches_direct_evaluation() {
    let p = corpus("sparse_det_m3_c1.dpw");
    let cs = cells(&p);
    let mut g = Lcg(77);
    for _ in 0..200 {
        let xs: Vec<Rational> = (0..3).map(|_| rat(g.range(-40, 40), 8)).collect();
        let u = point(&p, &xs);
        let input: Vec<(usize, OutValue)> = u.iter().map(|(v, x)| (*v, OutValue::Real(x.clone()))).collect();
        assert_eq!(det_output(&cs, &u).unwrap(), evaluate(&p, &input, &DetOptions::default()).unwrap());
    }
}

/// Smallest grid distance to a point whose reference output differs.
fn grid_dd(p: &Program, xs: &[Rational], step: &Rational, reach: i64) -> Option<Rational> {
    let ids: Vec<usize> = (1..=3).map(|i| p.var(&format!("q[{i}]")).unwrap()).collect();
    let eval = |w: &[Rational]| {
        let input: Vec<(usize, OutValue)> = ids.iter().zip(w).map(|(v, x)| (*v, OutValue::Real(x.clone()))).collect();
        evaluate(p, &input, &DetOptions::default()).unwrap()
    };
    let base = eval(xs);
    let mut best: Option<Rational> = None;
    for a in -reach..=reach {
        for b in -reach..=reach {
            for c in -reach..=reach {
                let d = int(a.abs().max(b.abs()).max(c.abs())) * step;
                if best.as_ref().is_some_and(|b| *b <= d) {
                    continue;
                }
                let w = [&xs[0] + int(a) * step, &xs[1] + int(b) * step, &xs[2] + int(c) * step];
                if eval(&w) != base {
                    best = Some(d);
                }
            }
        }
    }
    best
}

#[test]
fn sparse_dd_against_grid() {
    let p = corpus("sparse_det_m3_c1.dpw");
    let cs = cells(&p);
    let step = rat(1, 16);
    let xs = ints(&[-1, -1, 1]);
    let dd = dd_at_point(&cs, &point(&p, &xs), &InputMetric::Linf).unwrap();
    assert_eq!(dd, fin(int(1)));
    assert_eq!(grid_dd(&p, &xs, &step, 24), Some(int(1)));
    for xs in [ints(&[-2, 1, -1]), vec![rat(-1, 2), rat(-3, 4), rat(-1, 4)]] {
        let dd = dd_at_point(&cs, &point(&p, &xs), &InputMetric::Linf).unwrap();
        let g = grid_dd(&p, &xs, &step, 24).unwrap();
        let Extended::Finite(dd) = dd else { panic!("infinite dd") };
        assert!(dd <= g && g <= &dd + &step, "dd {dd} grid {g} at {xs:?}");
    }
}

#[test]
fn discrete01_dd_is_one_when_outputs_can_change() {
    let p = corpus("noisy_max_det_m3.dpw");
    let cs = cells(&p);
    let u = point(&p, &ints(&[3, 1, 1]));
    assert_eq!(dd_at_point(&cs, &u, &InputMetric::Discrete01).unwrap(), fin(int(1)));
}

#[test]
fn input_distances() {
    let t = InputMetric::NumericSparse(int(0));
    assert_eq!(t.distance(&ints(&[1, -2]), &ints(&[1, 3])), fin(int(5)));
    assert_eq!(t.distance(&ints(&[1, -2]), &ints(&[2, -2])), Extended::Infinity);
    assert_eq!(t.distance(&ints(&[1, -2]), &ints(&[-1, -2])), fin(int(2)));
    assert_eq!(InputMetric::Linf.distance(&ints(&[1, -2]), &ints(&[2, -2])), fin(int(1)));
    assert_eq!(InputMetric::Discrete01.distance(&ints(&[1]), &ints(&[1])), fin(int(0)));
    for s in ["discrete01", "linf", "numeric_sparse:1/2"] {
        assert_eq!(InputMetric::parse(s).unwrap().name(), s);
    }
    assert!(InputMetric::parse("l2").is_err());
}

#[test]
fn numeric_sparse_dd_respects_high_coordinates() {
    let p = corpus("numeric_sparse_n2.dpw");
    let d = parse_checked(&det_numeric_sparse()).unwrap();
    let cs = cells(&d);
    let (q1, q2) = (d.var("q1").unwrap(), d.var("q2").unwrap());
    let u = [(q1, int(2)), (q2, int(-3))];
    // output o2_1 = q1 changes under any move of q1 >= 0, which is infinite
    // unless q1 drops below the threshold.
    assert_eq!(dd_at_point(&cs, &u, &InputMetric::NumericSparse(int(0))).unwrap(), fin(int(2)));
    assert_eq!(dd_at_point(&cs, &u, &InputMetric::Linf).unwrap(), fin(int(0)));
    assert!(p.var("o2_1").is_some());
}

fn det_numeric_sparse() -> String {
    "dom 1;\ninput real q1;\ninput real q2;\noutput dom o1_1;\noutput real o2_1;\noutput dom o1_2;\noutput real o2_2;\n\
     real T;\nbool b;\nT <- 0;\no1_1 <- 0;\no1_2 <- 0;\nb <- q1 >= T;\nif b {\n  o1_1 <- 1;\n  o2_1 <- q1;\n} else {\n  \
     b <- q2 >= T;\n  if b {\n    o1_2 <- 1;\n    o2_2 <- q2;\n  }\n}\n"
        .to_string()
}

fn out(p: &Program, name: &str, v: OutValue) -> (usize, OutValue) {
    (p.var(name).unwrap(), v)
}

#[test]
fn value_diff_ball_and_distances() {
    let p = corpus("noisy_max_m3.dpw");
    let reals = ints(&[3, 1, 2]);
    let ctx = OutputContext { program: &p, reals: &reals, doms: &[] };
    let m = OutputMetric::ValueDiff;
    let v = [out(&p, "out", OutValue::Dom(1))];
    let ball = ctx.ball(&m, &v, &int(1)).unwrap();
    let picked: Vec<_> = ball.components.iter().map(|c| c.atoms.clone()).collect();
    assert_eq!(picked.len(), 2);
    assert!(picked.iter().any(|a| a[0].1 == accucheck::semantics::OutAtom::Dom(3)));
    let outputs: Vec<Vec<(usize, OutValue)>> = (1..=3).map(|j| vec![out(&p, "out", OutValue::Dom(j))]).collect();
    let dd = ctx.distinct_distances(&m, &v, &outputs).unwrap();
    assert_eq!(dd, vec![(int(0), vec![0]), (int(1), vec![0, 2]), (int(2), vec![0, 1, 2])]);
}

#[test]
fn output_distance_is_symmetric() {
    let p = corpus("noisy_max_m3.dpw");
    let reals = ints(&[5, -1, 2]);
    let ctx = OutputContext { program: &p, reals: &reals, doms: &[] };
    for m in [OutputMetric::Eq01, OutputMetric::ValueDiff] {
        for i in 1..=3 {
            for j in 1..=3 {
                let a = [out(&p, "out", OutValue::Dom(i))];
                let b = [out(&p, "out", OutValue::Dom(j))];
                assert_eq!(ctx.distance(&m, &a, &b).unwrap(), ctx.distance(&m, &b, &a).unwrap());
            }
        }
    }
    assert_eq!(ctx.ball(&OutputMetric::Eq01, &[out(&p, "out", OutValue::Dom(2))], &int(1)).unwrap(), OutputEvent::terminated());
}

#[test]
fn linf_real_ball_probability_grows_with_gamma() {
    let p = corpus("numeric_sparse_n2.dpw");
    let reals = ints(&[2, -3]);
    let ctx = OutputContext { program: &p, reals: &reals, doms: &[] };
    let v = [
        out(&p, "o1_1", OutValue::Dom(1)),
        out(&p, "o2_1", OutValue::Real(int(2))),
        out(&p, "o1_2", OutValue::Dom(0)),
        out(&p, "o2_2", OutValue::Unset),
    ];
    let d = build_dtmc(
        &p,
        &input_by_name(&p, &[("q1", OutValue::Real(int(2))), ("q2", OutValue::Real(int(-3)))]).unwrap(),
        &BuildOptions::default(),
    )
    .unwrap();
    let solver = Solver::new(&d);
    let mut last = -1.0;
    for g in [rat(0, 1), rat(1, 4), rat(1, 1), rat(4, 1)] {
        let ev = ctx.ball(&OutputMetric::LinfReal, &v, &g).unwrap();
        let pr = solver.prob(&ev).unwrap().eval_f64(3.0);
        assert!(pr >= last - 1e-12, "gamma {g}: {pr} < {last}");
        last = pr;
    }
    assert!(last > 0.0 && last < 1.0);
    let w = [
        out(&p, "o1_1", OutValue::Dom(0)),
        out(&p, "o2_1", OutValue::Unset),
        out(&p, "o1_2", OutValue::Dom(1)),
        out(&p, "o2_2", OutValue::Real(int(0))),
    ];
    assert_eq!(ctx.distance(&OutputMetric::LinfReal, &v, &w).unwrap(), Extended::Infinity);
    assert!(ctx.distinct_distances(&OutputMetric::LinfReal, &v, &[w.to_vec()]).is_err());
}
