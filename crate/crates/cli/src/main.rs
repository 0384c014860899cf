use accucheck::checker::report::{report, ReportDocument};
use accucheck::checker::spec::{input_values, load_program, load_spec_file, LoadedSpec, Num};
use accucheck::checker::{
    batch_all_inputs, enumerate_inputs, fmt_input, reference_dd, BatchResult, DdComparison, Status,
};
use accucheck::lang::{DetOptions, OutValue, Program};
use accucheck::metrics::InputMetric;
use accucheck::oracle::{estimate_event, SimConfig};
use accucheck::semantics::{build_dtmc, parse_event, BuildOptions, Solver};
use accucheck::symexp::{fmt_decimal, fmt_rational, parse_rational, Rational};
use clap::{Args, Parser, Subcommand};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "accucheck", version, about = "Exact accuracy checks for differentially private programs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args, Clone, Debug)]
struct Flags {
    /// write a JSON report to PATH
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// worker threads (default: all cores)
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// bits of working precision for enclosures
    #[arg(long, global = true, value_name = "P")]
    precision: Option<u32>,
    /// maximum bisection depth of the sign decision
    #[arg(long, global = true, value_name = "D")]
    depth: Option<u32>,
    /// maximum number of symbolic states
    #[arg(long, global = true, value_name = "K")]
    state_cap: Option<usize>,
    /// RNG seed for simulation
    #[arg(long, global = true, value_name = "S", default_value_t = 0)]
    seed: u64,
    /// compare as alpha < dd instead of alpha <= dd
    #[arg(long, global = true)]
    strict_dd: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a spec file at all of its inputs
    Check {
        spec: PathBuf,
        /// check only this input instead of the spec's inputs
        #[arg(long, allow_hyphen_values = true)]
        input: Option<String>,
        /// print only inputs that are not VERIFIED
        #[arg(long, short)]
        quiet: bool,
    },
    /// Symbolic probability of an output event
    Prob {
        program: PathBuf,
        /// comma separated values in declaration order, or `name=value` pairs
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        input: String,
        #[arg(long)]
        event: String,
        /// comma separated eps values to enclose the probability at
        #[arg(long, value_name = "EPS,...")]
        at: Option<String>,
    },
    /// Distance to disagreement of a reference program
    Dd {
        det: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        input: String,
        #[arg(long, default_value = "linf")]
        metric: String,
    },
    /// Monte Carlo estimate of an output event
    Simulate {
        program: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        input: String,
        #[arg(long)]
        event: String,
        #[arg(long)]
        eps: String,
        #[arg(long, short = 'n', default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Check several spec files, optionally at several beta scales
    Batch {
        #[arg(required = true)]
        specs: Vec<PathBuf>,
        /// comma separated factors applied to each spec's beta
        #[arg(long, value_name = "S,...")]
        scales: Option<String>,
    },
}

#[derive(Debug)]
struct Usage(String);

impl<E: Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn exit_code(s: Status) -> u8 {
    match s {
        Status::Verified => 0,
        Status::Refuted => 1,
        Status::Unknown | Status::Vacuous => 2,
    }
}

fn parse_list(s: &str) -> Result<Vec<Rational>, Usage> {
    s.split(',')
        .map(|x| parse_rational(x).map_err(|e| Usage(e.to_string())))
        .collect()
}

fn num(s: &str) -> Num {
    Num::Text(s.trim().to_string())
}

/// Input values from `a,b,c` or `x=a,y=b`, in declaration order.
fn parse_input(p: &Program, s: &str) -> Result<Vec<OutValue>, Usage> {
    let parts: Vec<&str> = if s.trim().is_empty() { vec![] } else { s.split(',').collect() };
    if !parts.is_empty() && parts.iter().all(|x| x.contains('=')) {
        let ins = p.inputs();
        let mut vals = vec![None; ins.len()];
        for x in parts {
            let (name, val) = x.split_once('=').expect("checked");
            let i = ins
                .iter()
                .position(|&v| p.name(v) == name.trim())
                .ok_or_else(|| Usage(format!("no input named `{}`", name.trim())))?;
            vals[i] = Some(num(val));
        }
        let vals = vals
            .into_iter()
            .zip(&ins)
            .map(|(x, &v)| x.ok_or_else(|| Usage(format!("missing input `{}`", p.name(v)))))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(input_values(p, &vals)?);
    }
    Ok(input_values(p, &parts.iter().map(|x| num(x)).collect::<Vec<_>>())?)
}

fn jobs(f: &Flags) -> usize {
    f.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1)
}

fn apply_flags(l: &mut LoadedSpec, f: &Flags) {
    if let Some(p) = f.precision {
        l.options.precision = p;
        l.options.decide.schedule = vec![p, 2 * p, 4 * p];
    }
    if let Some(d) = f.depth {
        l.options.decide.max_depth = d;
    }
    if let Some(k) = f.state_cap {
        l.options.build.state_cap = k;
    }
    if f.strict_dd {
        l.template.dd_comparison = DdComparison::Strict;
        l.spec.dd_comparison = DdComparison::Strict;
    }
}

fn run_spec(l: &LoadedSpec, inputs: &[Vec<OutValue>], f: &Flags) -> (BatchResult, ReportDocument) {
    let t = Instant::now();
    let b = batch_all_inputs(&l.template, inputs, &l.options, jobs(f));
    let ms = t.elapsed().as_secs_f64() * 1e3;
    log::info!("{} inputs in {ms:.1} ms", inputs.len());
    let doc = report(&l.spec, inputs, &b, ms);
    (b, doc)
}

fn print_summary(b: &BatchResult) {
    let s = &b.summary;
    println!(
        "summary: {}  {} inputs: {} verified, {} refuted, {} unknown, {} vacuous, {} errors",
        s.status.name(),
        s.total,
        s.verified,
        s.refuted,
        s.unknown,
        s.vacuous,
        s.errors
    );
    if let Some((u, cx)) = &s.counterexample {
        println!(
            "counterexample: u={} eps={} alpha={} gamma={} beta in [{}, {}]",
            fmt_input(u),
            fmt_rational(&cx.eps0),
            cx.alpha,
            cx.gamma,
            fmt_decimal(&cx.beta_value.lo.to_rational(), 12, false),
            fmt_decimal(&cx.beta_value.hi.to_rational(), 12, true),
        );
    }
}

fn write_json<T: serde::Serialize>(path: &Path, v: &T) -> Result<(), Usage> {
    let text = serde_json::to_string_pretty(v)?;
    std::fs::write(path, text + "\n").map_err(|e| Usage(format!("cannot write {}: {e}", path.display())))
}

fn cmd_check(spec: &Path, input: Option<&str>, quiet: bool, f: &Flags) -> Result<u8, Usage> {
    let mut l = load_spec_file(spec)?;
    apply_flags(&mut l, f);
    let inputs = match input {
        Some(s) => vec![parse_input(&l.template.program, s)?],
        None => enumerate_inputs(&l.template.program, &l.inputs, l.max_inputs)?,
    };
    let (b, doc) = run_spec(&l, &inputs, f);
    for (u, r) in inputs.iter().zip(&b.results) {
        match r {
            Ok(v) if quiet && v.status == Status::Verified => {}
            Ok(v) => {
                let dd = v.dd.as_ref().map_or("-".into(), |d| d.to_string());
                println!("{}  {}  dd={dd}  ({:.1} ms)", fmt_input(u), v.status.name(), v.timings.total_ms);
            }
            Err(e) => println!("{}  UNKNOWN  error: {e}", fmt_input(u)),
        }
    }
    print_summary(&b);
    if let Some(p) = &f.json {
        write_json(p, &doc)?;
    }
    Ok(exit_code(b.summary.status))
}

fn cmd_batch(specs: &[PathBuf], scales: Option<&str>, f: &Flags) -> Result<u8, Usage> {
    let scales = match scales {
        Some(s) => parse_list(s)?,
        None => vec![Rational::from_integer(1.into())],
    };
    let mut docs = Vec::new();
    let mut worst = Status::Verified;
    for path in specs {
        let base = load_spec_file(path)?;
        let inputs = enumerate_inputs(&base.template.program, &base.inputs, base.max_inputs)?;
        for k in &scales {
            let mut l = base.clone();
            apply_flags(&mut l, f);
            l.template.region.beta = l.template.region.beta.scale(k);
            let total = match &l.spec.beta_scale {
                Some(s) => s.rational()? * k,
                None => k.clone(),
            };
            l.spec.beta_scale = Some(Num::Text(fmt_rational(&total)));
            let (b, doc) = run_spec(&l, &inputs, f);
            let s = &b.summary;
            let cx = s
                .counterexample
                .as_ref()
                .map(|(u, cx)| format!("  u={} eps={}", fmt_input(u), fmt_rational(&cx.eps0)))
                .unwrap_or_default();
            println!(
                "{}  scale={}  {}  {}/{} verified  {:.0} ms{cx}",
                path.display(),
                fmt_rational(&total),
                s.status.name(),
                s.verified,
                s.total,
                doc.wall_clock_ms
            );
            worst = worst.max(s.status);
            docs.push(doc);
        }
    }
    if let Some(p) = &f.json {
        write_json(p, &docs)?;
    }
    Ok(exit_code(worst))
}

fn cmd_prob(program: &Path, input: &str, event: &str, at: Option<&str>, f: &Flags) -> Result<u8, Usage> {
    let p = load_program(program)?;
    let u = parse_input(&p, input)?;
    let ev = parse_event(&p, event)?;
    let mut opts = BuildOptions::default();
    if let Some(k) = f.state_cap {
        opts.state_cap = k;
    }
    let named: Vec<_> = p.inputs().into_iter().zip(u).collect();
    let d = build_dtmc(&p, &named, &opts)?;
    let prob = Solver::new(&d).prob(&ev)?;
    println!("{prob}");
    if let Some(at) = at {
        let prec = f.precision.unwrap_or(64);
        for eps in parse_list(at)? {
            if eps <= Rational::from_integer(0.into()) {
                return Err(Usage(format!("eps must be positive, got {}", fmt_rational(&eps))));
            }
            let i = prob.enclose_at(&eps, prec);
            println!(
                "at eps={}: [{}, {}]",
                fmt_rational(&eps),
                fmt_decimal(&i.lo.to_rational(), 15, false),
                fmt_decimal(&i.hi.to_rational(), 15, true)
            );
        }
    }
    Ok(0)
}

fn cmd_dd(det: &Path, input: &str, metric: &str) -> Result<u8, Usage> {
    let d = load_program(det)?;
    let u = parse_input(&d, input)?;
    let m = InputMetric::parse(metric)?;
    let (out, dd) = reference_dd(&d, &u, &m, &DetOptions::default())?;
    log::info!("det output {}", fmt_input(&out));
    println!("{dd}");
    Ok(0)
}

fn cmd_simulate(program: &Path, input: &str, event: &str, eps: &str, samples: u64, f: &Flags) -> Result<u8, Usage> {
    let p = load_program(program)?;
    let u = parse_input(&p, input)?;
    let ev = parse_event(&p, event)?;
    let eps = parse_rational(eps)?;
    if eps <= Rational::from_integer(0.into()) || samples == 0 {
        return Err(Usage("eps and the sample count must be positive".into()));
    }
    let named: Vec<_> = p.inputs().into_iter().zip(u).collect();
    let cfg = SimConfig::new(eps.clone(), samples, f.seed);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs(f)).build()?;
    let est = pool.install(|| estimate_event(&p, &named, &ev, &cfg))?;
    let mut v = serde_json::to_value(est)?;
    v["epsilon"] = serde_json::Value::String(fmt_rational(&eps));
    println!("{}", serde_json::to_string(&v)?);
    if let Some(path) = &f.json {
        write_json(path, &v)?;
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Usage> {
    let f = &cli.flags;
    match &cli.cmd {
        Cmd::Check { spec, input, quiet } => cmd_check(spec, input.as_deref(), *quiet, f),
        Cmd::Batch { specs, scales } => cmd_batch(specs, scales.as_deref(), f),
        Cmd::Prob { program, input, event, at } => cmd_prob(program, input, event, at.as_deref(), f),
        Cmd::Dd { det, input, metric } => cmd_dd(det, input, metric),
        Cmd::Simulate { program, input, event, eps, samples } => cmd_simulate(program, input, event, eps, *samples, f),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ACCUCHECK_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            let _ = e.print();
            return ExitCode::from(3);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
