use accucheck::checker::report::{report, ReportDocument};
use accucheck::checker::spec::{input_values, load_spec_file, CheckSpec, LoadedSpec, Num};
use accucheck::checker::{
    batch_all_inputs, check_at_input, enumerate_inputs, summarize, DdComparison, Status, Verdict,
};
use accucheck::lang::OutValue;
use accucheck::metrics::Extended;
use accucheck::oracle::{estimate_event, SimConfig};
use accucheck::regions::{AlphaMode, Tag};
use accucheck::semantics::{input_by_name, parse_event};
use accucheck::symexp::ExpRational;
use accucheck::symexp::rational::{int, rat, Rational};
use accucheck::symexp::text::parse_laurent;
use std::path::PathBuf;

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn load(name: &str) -> LoadedSpec {
    load_spec_file(&dir().join(name)).unwrap()
}

fn at(l: &LoadedSpec, u: &[i64]) -> Verdict {
    let mut q = l.template.clone();
    q.input = input_values(&q.program, &u.iter().map(|&x| Num::Int(x)).collect::<Vec<_>>()).unwrap();
    check_at_input(&q, &l.options).unwrap()
}

/// `p(eps) + beta(eps) < 1` from fresh enclosures of the verdict's expressions.
fn certified_below(v: &Verdict, eps: &Rational) -> bool {
    let c = v.checks.iter().find(|c| c.status == Status::Refuted).unwrap_or(&v.checks[0]);
    let p = ExpRational::parse(&c.probability).unwrap().enclose_at(eps, 256);
    let b = ExpRational::from_laurent(parse_laurent(&c.beta).unwrap()).enclose_at(eps, 256);
    p.hi.to_rational() + b.hi.to_rational() < int(1)
}

fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap()
}

fn assert_valid_counterexample(l: &LoadedSpec, v: &Verdict, names: &[&str], event: &str) {
    assert_eq!(v.status, Status::Refuted);
    let cx = v.counterexample.as_ref().unwrap();
    assert!(certified_below(v, &cx.eps0));
    assert!(cx.margin.to_rational() < int(0));
    let p = &l.template.program;
    let input: Vec<(&str, OutValue)> = names.iter().copied().zip(v.input.iter().cloned()).collect();
    let e = estimate_event(
        p,
        &input_by_name(p, &input).unwrap(),
        &parse_event(p, event).unwrap(),
        &SimConfig::new(cx.eps0.clone(), 1_000_000, 17),
    )
    .unwrap();
    let beta = to_f64(&cx.beta_value.hi.to_rational());
    assert!(e.p_hat + 3.0 * e.stderr < 1.0 - beta, "{} (se {}) vs {}", e.p_hat, e.stderr, 1.0 - beta);
}

const Q3: [&str; 3] = ["q[1]", "q[2]", "q[3]"];

#[test]
fn laplace_is_verified() {
    let v = at(&load("laplace.spec"), &[0, 1]);
    assert_eq!(v.status, Status::Verified, "{v:?}");
    assert!(v.counterexample.is_none());
}

#[test]
fn sparse_at_the_witness_input() {
    let v = at(&load("sparse_m3_c1.spec"), &[-1, -1, 1]);
    assert_eq!(v.status, Status::Verified);
    assert_eq!(v.dd, Some(Extended::Finite(int(1))));
    let l = load("sparse_best7.spec");
    let v = at(&l, &[-1, -1, 1]);
    assert_valid_counterexample(&l, &v, &Q3, "out[1] = 0, out[2] = 0, out[3] = 1");
    assert!(certified_below(&v, &rat(17, 10)));
    assert!(v.counterexample.as_ref().unwrap().eps0 > int(0));
}

#[test]
fn noisy_max_is_refuted_at_one_fifth() {
    let l = load("noisy_max_m3_worse5.spec");
    let v = at(&l, &[-1, 0, 0]);
    assert_valid_counterexample(&l, &v, &Q3, "out = 2");
    assert!(certified_below(&v, &rat(27, 82)));
    assert_eq!(at(&load("noisy_max_m3_best4.spec"), &[-1, 0, 0]).status, Status::Verified);
}

#[test]
fn finite_output_levels() {
    let text = r#"{
        "program": "noisy_max_m3.dpw", "det": "noisy_max_det_m3.dpw",
        "input_metric": "linf", "output_metric": "value_diff",
        "beta": "3*exp(-alpha*eps/2)", "alpha": "dd", "gamma": "finite_outputs",
        "inputs": [[3, 1, 1]]
    }"#;
    let l = CheckSpec::parse(text).unwrap().load(&dir()).unwrap();
    let v = at(&l, &[3, 1, 1]);
    let levels: Vec<Rational> = v.checks.iter().map(|c| c.level.clone()).collect();
    assert_eq!(levels, vec![int(0), int(2)]);
    assert_eq!(v.checks[1].probability, "1");
    assert_eq!(v.checks[1].status, Status::Verified);
    assert_eq!(v.status, v.checks.iter().map(|c| c.status).max().unwrap());
}

#[test]
fn single_output_finite_sweep_matches_fixed_gamma() {
    let fixed = at(&load("sparse_m3_c1.spec"), &[1, -1, 0]);
    let mut l = load("sparse_m3_c1.spec");
    let text = serde_json::to_string(&l.spec).unwrap().replace("\"gamma\":0", "\"gamma\":\"finite_outputs\"");
    l = CheckSpec::parse(&text).unwrap().load(&dir()).unwrap();
    let swept = at(&l, &[1, -1, 0]);
    assert_eq!(swept.checks[0].probability, fixed.checks[0].probability);
    assert_eq!(swept.checks[0].status, fixed.status);
}

#[test]
fn verdicts_are_monotone_in_beta() {
    let l = load("sparse_best7.spec");
    let u = [-1, -1, 1];
    let mut last = None;
    for lambda in [1, 2, 10] {
        let mut q = l.template.clone();
        q.region.beta = q.region.beta.scale(&int(lambda));
        q.input = input_values(&q.program, &u.map(Num::Int)).unwrap();
        let s = check_at_input(&q, &l.options).unwrap().status;
        if last == Some(Status::Verified) {
            assert_eq!(s, Status::Verified, "lambda = {lambda}");
        }
        last = Some(s);
    }
    assert_eq!(last, Some(Status::Verified));
}

#[test]
fn verdicts_are_monotone_in_alpha_below_dd() {
    let l = load("noisy_max_m3.spec");
    for u in [[1, 0, -1], [1, -1, -1], [0, 1, 1]] {
        let v = at(&l, &u);
        assert_eq!(v.status, Status::Verified);
        let Some(Extended::Finite(dd)) = v.dd else { panic!() };
        for k in 0..=4 {
            let mut q = l.template.clone();
            q.region.alpha_mode = AlphaMode::Fixed(&dd * rat(k, 4));
            q.input = v.input.clone();
            assert_eq!(check_at_input(&q, &l.options).unwrap().status, Status::Verified, "{u:?} k={k}");
        }
    }
}

#[test]
fn vacuous_cases() {
    let l = load("sparse_m3_c1.spec");
    let u: Vec<OutValue> = input_values(&l.template.program, &[-1, -1, 1].map(Num::Int)).unwrap();
    let mut q = l.template.clone();
    q.input = u.clone();
    q.region.alpha_mode = AlphaMode::Fixed(int(2));
    assert_eq!(check_at_input(&q, &l.options).unwrap().status, Status::Vacuous);
    q.region.alpha_mode = AlphaMode::Fixed(int(1));
    assert_eq!(check_at_input(&q, &l.options).unwrap().status, Status::Verified);
    q.dd_comparison = DdComparison::Strict;
    assert_eq!(check_at_input(&q, &l.options).unwrap().status, Status::Vacuous);

    let mut q = l.template.clone();
    q.input = u;
    q.region.tag = Tag::parse("alpha >= 3").unwrap();
    assert_eq!(check_at_input(&q, &l.options).unwrap().status, Status::Vacuous);
    q.region.tag = Tag::parse("alpha <= 1/2").unwrap();
    let v = check_at_input(&q, &l.options).unwrap();
    assert_eq!(v.checks[0].alpha, Extended::Finite(rat(1, 2)));

    // dd = 0: inclusive checks alpha = 0, strict has nothing to check
    let mut q = l.template.clone();
    q.input = input_values(&q.program, &[0, 0, 0].map(Num::Int)).unwrap();
    let v = check_at_input(&q, &l.options).unwrap();
    assert_eq!((v.dd, v.status), (Some(Extended::Finite(int(0))), Status::Verified));
    q.dd_comparison = DdComparison::Strict;
    assert_eq!(check_at_input(&q, &l.options).unwrap().status, Status::Vacuous);
}

#[test]
fn empty_batch_is_vacuous() {
    let s = summarize(&[]);
    assert_eq!((s.status, s.total), (Status::Vacuous, 0));
}

#[test]
fn batch_finds_the_witness_input() {
    let l = load("sparse_best7.spec");
    let mut q = l.template.clone();
    q.region = load("sparse_m3_c1_worse7.spec").template.region;
    let inputs = enumerate_inputs(&q.program, &load("sparse_m3_c1.spec").inputs, 1000).unwrap();
    assert_eq!(inputs.len(), 27);
    let b = batch_all_inputs(&q, &inputs, &l.options, 4);
    assert_eq!(b.summary.status, Status::Refuted);
    let refuted: Vec<&Vec<OutValue>> =
        inputs.iter().zip(&b.results).filter(|(_, r)| r.as_ref().unwrap().status == Status::Refuted).map(|(u, _)| u).collect();
    let witness = input_values(&q.program, &[-1, -1, 1].map(Num::Int)).unwrap();
    assert!(refuted.contains(&&witness));
    assert_eq!(b.summary.refuted, refuted.len());
    assert_eq!(b.summary.counterexample.as_ref().unwrap().0, *refuted[0]);

    let serial = batch_all_inputs(&q, &inputs, &l.options, 1);
    assert_eq!(serial.summary, b.summary);
}

#[test]
fn report_round_trips() {
    let l = load("sparse_best7.spec");
    let inputs = enumerate_inputs(&l.template.program, &l.inputs, 10).unwrap();
    let b = batch_all_inputs(&l.template, &inputs, &l.options, 2);
    let doc = report(&l.spec, &inputs, &b, 12.5);
    let text = serde_json::to_string_pretty(&doc).unwrap();
    let back: ReportDocument = serde_json::from_str(&text).unwrap();
    assert_eq!(back, doc);
    let cx = back.summary.counterexample.unwrap();
    let eps = accucheck::symexp::rational::parse_rational(&cx.epsilon).unwrap();
    assert_eq!(eps, b.summary.counterexample.unwrap().1.eps0);
    assert_eq!(cx.input, vec!["-1", "-1", "1"]);
    assert_eq!(back.results[0].status, Status::Refuted);
}

#[test]
fn malformed_specs_are_rejected() {
    assert!(CheckSpec::parse("{").is_err());
    let good = serde_json::to_string(&load("laplace.spec").spec).unwrap();
    assert!(CheckSpec::parse(&good.replace("\"tag\"", "\"tags\"")).is_err());
    let bad_metric = CheckSpec::parse(&good.replace("linf_real", "l2")).unwrap();
    assert!(bad_metric.load(&dir()).is_err());
    let missing = CheckSpec::parse(&good.replace("laplace_k2.dpw", "nope.dpw")).unwrap();
    assert!(missing.load(&dir()).is_err());
}
