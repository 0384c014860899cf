use accucheck::lang::{parse_checked, OutValue, Program};
use accucheck::oracle::{estimate_event, run_once, run_rng, sample_dlap, sample_laplace, SimConfig, SimError, SimValue};
use accucheck::semantics::{input_by_name, parse_event};
use accucheck::symexp::rational::{int, rat};
use accucheck::symexp::text::parse_laurent;

fn corpus(name: &str) -> Program {
    let path = format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_checked(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn estimate(p: &Program, input: &[(&str, OutValue)], ev: &str, cfg: &SimConfig) -> accucheck::oracle::Estimate {
    let e = parse_event(p, ev).unwrap();
    estimate_event(p, &input_by_name(p, input).unwrap(), &e, cfg).unwrap()
}

#[test]
fn deterministic_program_ignores_the_seed() {
    let p = corpus("sparse_det_m3_c1.dpw");
    let input = input_by_name(&p, &[("q[1]", OutValue::Real(int(-1))), ("q[2]", OutValue::Real(int(2))), ("q[3]", OutValue::Real(int(0)))]).unwrap();
    let first = run_once(&p, &input, 1.0, &mut run_rng(1, 0), 1000).unwrap();
    for seed in 0..20 {
        assert_eq!(run_once(&p, &input, 1.0, &mut run_rng(seed, seed * 7), 1000).unwrap(), first);
    }
    let out: Vec<SimValue> = first.into_iter().map(|(_, v)| v).collect();
    assert_eq!(out, vec![SimValue::Dom(0), SimValue::Dom(1), SimValue::Unset]);
}

#[test]
fn symmetric_comparison_is_a_fair_coin() {
    let p = parse_checked(
        "dom 1;\noutput dom o;\nreal x;\nreal y;\nbool b;\nx <- Lap(eps, 0);\ny <- Lap(eps, 0);\nb <- x >= y;\nif b {\n  o <- 1;\n} else {\n  o <- 0;\n}\n",
    )
    .unwrap();
    let e = estimate(&p, &[], "o = 1", &SimConfig::new(int(1), 1_000_000, 11));
    assert!((e.p_hat - 0.5).abs() <= 0.0015, "{}", e.p_hat);
}

#[test]
fn numeric_sparse_event_matches_the_closed_form() {
    let p = corpus("numeric_sparse_n2.dpw");
    let input = [("q1", OutValue::Real(int(-1))), ("q2", OutValue::Real(int(1)))];
    let e = estimate(&p, &input, "o1_1 = 0, o1_2 = 1, |o2_2 - 1| < 1", &SimConfig::new(int(1), 1_000_000, 5));
    let p1 = parse_laurent("1 - 4/3*exp(-2/9*eps) + 7/12*exp(-4/9*eps) - 1/24*exp(-8/9*eps)").unwrap();
    let p2 = parse_laurent("1 - exp(-1/9*eps)").unwrap();
    let want = p1.eval_f64(1.0) * p2.eval_f64(1.0);
    assert!((e.p_hat - want).abs() <= 4.0 * e.stderr, "{} vs {want} (se {})", e.p_hat, e.stderr);
}

#[test]
fn certain_event() {
    let p = parse_checked("dom 1;\noutput dom o;\nreal x;\nx <- Lap(eps, 0);\no <- 1;\n").unwrap();
    let e = estimate(&p, &[], "o = 1", &SimConfig::new(int(2), 1000, 0));
    assert_eq!((e.p_hat, e.stderr, e.n), (1.0, 0.0, 1000));
}

#[test]
fn sparse_counterexample_run() {
    let p = corpus("sparse_m3_c1.dpw");
    let input = [("q[1]", OutValue::Real(int(-1))), ("q[2]", OutValue::Real(int(-1))), ("q[3]", OutValue::Real(int(1)))];
    let e = estimate(&p, &input, "out[1] = 0, out[2] = 0, out[3] = 1", &SimConfig::new(rat(17, 10), 1_000_000, 3));
    let bound = 1.0 - 6.0 / 7.0 * (-17.0f64 / 80.0).exp();
    assert!(e.p_hat + 3.0 * e.stderr < bound, "{} (se {}) vs {bound}", e.p_hat, e.stderr);
}

#[test]
fn laplace_interval_probability() {
    let p = parse_checked("dom 1;\ninput real u;\noutput real o;\no <- Lap(eps, u);\n").unwrap();
    let input = [("u", OutValue::Real(int(0)))];
    let cfg = SimConfig::new(int(1), 1_000_000, 9);
    for (ev, want) in [("o <= 1", 1.0 - 0.5 * (-1.0f64).exp()), ("|o| <= 1", 1.0 - (-1.0f64).exp())] {
        let e = estimate(&p, &input, ev, &cfg);
        assert!((e.p_hat - want).abs() <= 4.0 * e.stderr, "{ev}: {} vs {want}", e.p_hat);
    }
}

#[test]
fn seed_determinism_across_thread_counts() {
    let p = corpus("sparse_m3_c1.dpw");
    let input = [("q[1]", OutValue::Real(int(0))), ("q[2]", OutValue::Real(int(1))), ("q[3]", OutValue::Real(int(-1)))];
    let cfg = SimConfig::new(rat(1, 2), 50_000, 42);
    let a = estimate(&p, &input, "out[2] = 1", &cfg);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| estimate(&p, &input, "out[2] = 1", &cfg));
    assert_eq!(a.p_hat.to_bits(), b.p_hat.to_bits());
    assert_eq!(a, b);
    let c = estimate(&p, &input, "out[2] = 1", &SimConfig::new(rat(1, 2), 50_000, 43));
    assert_ne!(a.p_hat, c.p_hat);
}

#[test]
fn laplace_sampler_sanity() {
    let n = 1_000_000;
    let (mut sum, mut pos) = (0.0, 0u64);
    for i in 0..n {
        let x = sample_laplace(&mut run_rng(7, i), 1.0, 0.0);
        sum += x;
        pos += u64::from(x >= 0.0);
    }
    let nf = n as f64;
    assert!((sum / nf).abs() <= 4.0 * 2f64.sqrt() / nf.sqrt());
    assert!((pos as f64 / nf - 0.5).abs() <= 4.0 * 0.5 / nf.sqrt());
}

#[test]
fn discrete_laplace_mass_function() {
    let n = 400_000u64;
    let rate = 0.7f64;
    let mut counts = std::collections::HashMap::new();
    for i in 0..n {
        let z = sample_dlap(&mut run_rng(8, i), rate, 2.0);
        assert_eq!(z.fract(), 0.0);
        *counts.entry(z as i64).or_insert(0u64) += 1;
    }
    let r = (-rate).exp();
    for k in -3..=3i64 {
        let want = (1.0 - r) / (1.0 + r) * r.powi(k.abs() as i32);
        let got = *counts.get(&(2 + k)).unwrap_or(&0) as f64 / n as f64;
        let se = (want * (1.0 - want) / n as f64).sqrt();
        assert!((got - want).abs() <= 4.0 * se, "k={k}: {got} vs {want}");
    }
}

#[test]
fn step_budget_is_reported() {
    let p = parse_checked("dom 3;\noutput dom o;\nbool b;\nb <- true;\no <- 0;\nwhile b {\n  o <- o + 1;\n}\n").unwrap();
    let e = parse_event(&p, "o = 1").unwrap();
    let cfg = SimConfig { step_budget: 500, ..SimConfig::new(int(1), 10, 0) };
    assert_eq!(estimate_event(&p, &[], &e, &cfg), Err(SimError::StepBudget(500)));
}
