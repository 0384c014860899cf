mod common;

use accucheck::lang::{parse_checked, OutValue, Program};
use accucheck::semantics::{build_dtmc, input_by_name, parse_event, BuildOptions, EdgeProb, OutputEvent, ParamDtmc, Solver};
use accucheck::symexp::rational::{int, rat};
use accucheck::symexp::ExpRational;

fn corpus(name: &str) -> Program {
    let path = format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_checked(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn dtmc(p: &Program, input: &[(&str, OutValue)]) -> ParamDtmc {
    build_dtmc(p, &input_by_name(p, input).unwrap(), &BuildOptions::default()).unwrap()
}

fn real(n: i64) -> OutValue {
    OutValue::Real(int(n))
}

fn prob(d: &ParamDtmc, ev: &str) -> ExpRational {
    let e = parse_event(&d.program, ev).unwrap();
    Solver::new(d).prob(&e).unwrap()
}

fn laplace_cdf(x: f64, b: f64, mu: f64) -> f64 {
    if x < mu {
        0.5 * ((x - mu) / b).exp()
    } else {
        1.0 - 0.5 * (-(x - mu) / b).exp()
    }
}

fn laplace_pdf(x: f64, b: f64, mu: f64) -> f64 {
    (-(x - mu).abs() / b).exp() / (2.0 * b)
}

/// Composite Simpson on [lo, hi].
fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn symmetric_split() {
    let p = parse_checked(
        "output bool b; real x; real y;
         x <- Lap(eps, 0); y <- Lap(eps, 0); b <- x >= y; exit;",
    );
    // bool outputs are not allowed; use a DOM flag instead
    assert!(p.is_err());
    let p = parse_checked(
        "output dom o; real x; real y; bool b;
         x <- Lap(eps, 0); y <- Lap(eps, 0); b <- x >= y;
         if b { o <- 1; } else { o <- 0; } exit;",
    )
    .unwrap();
    let d = dtmc(&p, &[]);
    let splits: Vec<_> = d
        .edges
        .iter()
        .enumerate()
        .filter(|(_, es)| es.iter().any(|e| e.prob == EdgeProb::Split))
        .collect();
    assert_eq!(splits.len(), 1);
    let s = Solver::new(&d);
    let (from, es) = splits[0];
    assert_eq!(es.len(), 2);
    for e in es {
        assert_eq!(s.edge_probability(from, e).unwrap(), ExpRational::constant(rat(1, 2)));
    }
    assert_eq!(prob(&d, "o = 1"), ExpRational::constant(rat(1, 2)));
    assert!(s.check_mass().unwrap().is_empty());
}

#[test]
fn coin() {
    let p = parse_checked(
        "output dom out;
         dist coin { () -> 0: 1/2, 1: 1/2; }
         out <- choose(eps, coin); exit;",
    )
    .unwrap();
    let d = dtmc(&p, &[]);
    assert_eq!(prob(&d, "out = 1"), ExpRational::constant(rat(1, 2)));
    assert_eq!(prob(&d, ""), ExpRational::one());
}

#[test]
fn geometric_loop_terminates() {
    let p = parse_checked(
        "dom 1; output dom n; bool go; dom c;
         dist stay { () -> 1: exp(-eps), 0: 1 - exp(-eps); }
         n <- 0; go <- true;
         while go {
           c <- choose(eps, stay);
           go <- EQ(c, 1);
           n <- n + 1;
         }
         exit;",
    )
    .unwrap();
    let d = dtmc(&p, &[]);
    let sol = Solver::new(&d);
    assert!(sol.check_mass().unwrap().is_empty());
    assert_eq!(sol.prob(&OutputEvent::terminated()).unwrap(), ExpRational::one());
    // n saturates at 1 after the first iteration
    assert_eq!(prob(&d, "n = 1"), ExpRational::one());
    assert!((0..d.states.len()).any(|i| d.edges[i].iter().any(|e| reaches(&d, e.to, i))));
}

#[test]
fn loop_self_probability() {
    let p = parse_checked(
        "output dom o; bool b; dom c;
         dist stay { () -> 1: exp(-eps), 0: 1 - exp(-eps); }
         b <- true;
         while b { c <- choose(eps, stay); b <- EQ(c, 1); }
         o <- 1; exit;",
    )
    .unwrap();
    let d = dtmc(&p, &[]);
    let s = Solver::new(&d);
    let stay = ExpRational::parse("exp(-eps)").unwrap();
    let found = d.edges.iter().enumerate().any(|(i, es)| {
        es.iter().any(|e| matches!(&e.prob, EdgeProb::Discrete(q) if *q == stay) && reaches(&d, e.to, i))
    });
    assert!(found, "{}", d.dump());
    assert_eq!(s.prob(&parse_event(&d.program, "o = 1").unwrap()).unwrap(), ExpRational::one());
}

fn reaches(d: &ParamDtmc, from: usize, to: usize) -> bool {
    let mut seen = vec![false; d.states.len()];
    let mut stack = vec![from];
    while let Some(s) = stack.pop() {
        if s == to {
            return true;
        }
        if std::mem::replace(&mut seen[s], true) {
            continue;
        }
        stack.extend(d.edges[s].iter().map(|e| e.to));
    }
    false
}

#[test]
fn numeric_sparse_product() {
    let p = corpus("numeric_sparse_n2.dpw");
    let d = dtmc(&p, &[("q1", real(-1)), ("q2", real(1))]);
    let got = prob(&d, "o1_1 = 0, o1_2 = 1, |o2_2 - 1| < 1");
    let p1 = ExpRational::parse("1 - 4/3*exp(-2/9*eps) + 7/12*exp(-4/9*eps) - 1/24*exp(-8/9*eps)").unwrap();
    let p2 = ExpRational::parse("1 - exp(-1/9*eps)").unwrap();
    assert_eq!(got, &p1 * &p2);
    assert!(Solver::new(&d).check_mass().unwrap().is_empty());
}

#[test]
fn numeric_sparse_line_11_split() {
    let p = corpus("numeric_sparse_n2.dpw");
    for (u, v) in [(-1i64, 1i64), (2, 0), (0, 3)] {
        let d = dtmc(&p, &[("q1", real(u)), ("q2", real(v))]);
        let s = Solver::new(&d);
        let at11: Vec<usize> = (0..d.states.len()).filter(|&i| d.label(i) == "11").collect();
        assert_eq!(at11.len(), 1);
        let from = at11[0];
        let es = &d.edges[from];
        assert_eq!(es.len(), 2);
        let b = d.program.var("b").unwrap();
        for eps in [0.5, 1.0, 3.0] {
            let (bt, b1, b2) = (9.0 / (4.0 * eps), 9.0 / (2.0 * eps), 9.0 / (2.0 * eps));
            let (u, v) = (u as f64, v as f64);
            let lo = -60.0 * bt - 20.0;
            let hi = 60.0 * bt + 20.0;
            let lt = simpson(|t| laplace_pdf(t, bt, 0.0) * laplace_cdf(t, b1, u), lo, hi, 200_000);
            let both = simpson(
                |t| laplace_pdf(t, bt, 0.0) * laplace_cdf(t, b1, u) * (1.0 - laplace_cdf(t, b2, v)),
                lo,
                hi,
                200_000,
            );
            let want_p = both / lt;
            for e in es {
                let q = s.edge_probability(from, e).unwrap().eval_f64(eps);
                let want = if d.states[e.to].bools[b] == Some(true) { want_p } else { 1.0 - want_p };
                assert!((q - want).abs() < 1e-7, "u={u} v={v} eps={eps}: {q} vs {want}");
            }
        }
    }
}

#[test]
fn additivity() {
    let p = corpus("numeric_sparse_n2.dpw");
    let d = dtmc(&p, &[("q1", real(0)), ("q2", real(2))]);
    let s = Solver::new(&d);
    let a = parse_event(&p, "o1_1 = 1, o2_1 < 1").unwrap();
    let b = parse_event(&p, "o1_1 = 1, o2_1 >= 1").unwrap();
    let c = parse_event(&p, "o1_1 = 0").unwrap();
    let pa = s.prob(&a).unwrap();
    let pb = s.prob(&b).unwrap();
    let pc = s.prob(&c).unwrap();
    assert_eq!(&pa + &pb, s.prob(&a.clone().union(b.clone())).unwrap());
    assert_eq!(&(&pa + &pb) + &pc, ExpRational::one());
    assert_eq!(s.prob(&a.union(b).union(c)).unwrap(), ExpRational::one());
}

#[test]
fn entailed_comparison_is_deterministic() {
    let p = parse_checked(
        "output dom o; real x; bool b; bool c;
         x <- Lap(eps, 0); b <- x >= 1; c <- x >= 0;
         if b { o <- 1; } else { o <- 0; } exit;",
    )
    .unwrap();
    let d = dtmc(&p, &[]);
    let c = d.program.var("c").unwrap();
    // in the b-true branch, x >= 0 is entailed
    let t: Vec<usize> = (0..d.states.len())
        .filter(|&i| d.label(i) == "s3" && d.states[i].bools[d.program.var("b").unwrap()] == Some(true))
        .collect();
    assert_eq!(t.len(), 1);
    assert_eq!(d.edges[t[0]].len(), 1);
    assert_eq!(d.edges[t[0]][0].prob, EdgeProb::One);
    assert_eq!(d.states[d.edges[t[0]][0].to].bools[c], Some(true));
    assert_eq!(prob(&d, "o = 1"), ExpRational::parse("1/2*exp(-eps)").unwrap());
}

#[test]
fn expmech_probabilities() {
    let p = parse_checked(
        "dom 2; input dom u; output dom o;
         score F { (0) -> 0: 0, 1: 1, 2: 2; (1) -> 0: 1, 1: 1, 2: 1; }
         o <- ExpMech(eps, F, u); exit;",
    )
    .unwrap();
    let d = dtmc(&p, &[("u", OutValue::Dom(0))]);
    let z = "(exp(-2*eps) + exp(-eps) + 1)";
    assert_eq!(prob(&d, "o = 2"), ExpRational::parse(&format!("1 / {z}")).unwrap());
    assert_eq!(prob(&d, "o = 0"), ExpRational::parse(&format!("exp(-2*eps) / {z}")).unwrap());
    let d = dtmc(&p, &[("u", OutValue::Dom(1))]);
    assert_eq!(prob(&d, "o = 1"), ExpRational::constant(rat(1, 3)));
    assert!(Solver::new(&d).check_mass().unwrap().is_empty());
}

#[test]
fn discrete_laplace_ties() {
    let p = parse_checked(
        "output dom o; int x; int y; bool b; bool c;
         x <- DLap(eps, 0); y <- DLap(eps, 0);
         b <- x >= y; c <- x == y;
         if c { o <- 0; } else { if b { o <- 1; } else { o <- -1; } }
         exit;",
    )
    .unwrap();
    let d = dtmc(&p, &[]);
    let s = Solver::new(&d);
    assert!(s.check_mass().unwrap().is_empty());
    let tie = s.prob(&parse_event(&p, "o = 0").unwrap()).unwrap();
    let up = s.prob(&parse_event(&p, "o = 1").unwrap()).unwrap();
    let down = s.prob(&parse_event(&p, "o = -1").unwrap()).unwrap();
    assert_eq!(up, down);
    assert_eq!(&(&tie + &up) + &down, ExpRational::one());
    // P(X = Y) summed directly
    let a = (-1.0f64).exp();
    let pk = |k: i64| (1.0 - a) / (1.0 + a) * a.powi(k.abs() as i32);
    let want: f64 = (-60..=60).map(|k| pk(k) * pk(k)).sum();
    assert!((tie.eval_f64(1.0) - want).abs() < 1e-12);
}

#[test]
fn state_cap_is_reported() {
    let p = corpus("numeric_sparse_n2.dpw");
    let input = input_by_name(&p, &[("q1", real(0)), ("q2", real(0))]).unwrap();
    let r = build_dtmc(&p, &input, &BuildOptions { state_cap: 5 });
    assert!(matches!(r, Err(accucheck::semantics::SemError::StateCap(5))));
}

#[test]
fn dump_lists_states_and_edges() {
    let p = corpus("numeric_sparse_n2.dpw");
    let d = dtmc(&p, &[("q1", real(0)), ("q2", real(0))]);
    let text = d.dump();
    let states = text.lines().filter(|l| l.starts_with("state ")).count();
    let edges = text.lines().filter(|l| l.starts_with("edge ")).count();
    assert_eq!(states, d.states.len());
    assert_eq!(edges, d.edges.iter().map(Vec::len).sum::<usize>());
}
