//! Generators for the shipped benchmark programs and check specs.

use crate::checker::spec::{CheckSpec, DetRef, Inputs, Num, SpecOptions};
use crate::checker::DdComparison;

fn header(doc: &str, dom: usize) -> String {
    format!("// {doc}\ndom {dom};\n")
}

/// Sparse vector technique; `resample` draws a fresh noisy threshold after
/// each TOP. `out[i]` is 1 for TOP, 0 for BOT, unset after stopping.
pub fn sparse(m: usize, c: usize, t: i64, resample: bool) -> String {
    let name = if resample { "Sparse" } else { "SparseVariant" };
    sparse_titled(name, m, c, t, resample)
}

fn sparse_titled(name: &str, m: usize, c: usize, t: i64, resample: bool) -> String {
    let mut s = header(
        &format!("{name} with m = {m}, c = {c}, T = {t}; out[i] = 1 for TOP, 0 for BOT."),
        m.max(c),
    );
    s += &format!("input real q[{m}];\noutput dom out[{m}];\nreal T;\nreal rT;\nreal r;\ndom count;\nbool b;\n\n");
    s += &format!("T <- {t};\nrT <- Lap(eps/{}, T);\ncount <- 0;\n", 2 * c);
    s += &format!("for i in 1..{m} {{\n  r <- Lap(eps/{}, q[i]);\n  b <- r >= rT;\n  if b {{\n", 4 * c);
    s += &format!("    out[i] <- 1;\n    count <- count + 1;\n    if count >= {c} {{\n      exit;\n    }}\n");
    if resample {
        s += &format!("    rT <- Lap(eps/{}, T);\n", 2 * c);
    }
    s += "  } else {\n    out[i] <- 0;\n  }\n}\n";
    s
}

pub fn sparse_det(m: usize, c: usize, t: i64) -> String {
    let mut s = header(&format!("det(Sparse), m = {m}, c = {c}, T = {t}."), m.max(c));
    s += &format!("input real q[{m}];\noutput dom out[{m}];\nreal T;\ndom count;\nbool b;\n\n");
    s += &format!("T <- {t};\ncount <- 0;\nfor i in 1..{m} {{\n  b <- q[i] >= T;\n  if b {{\n");
    s += &format!("    out[i] <- 1;\n    count <- count + 1;\n    if count >= {c} {{\n      exit;\n    }}\n");
    s += "  } else {\n    out[i] <- 0;\n  }\n}\n";
    s
}

pub fn above_threshold(m: usize, t: i64) -> String {
    sparse_titled("AboveThreshold", m, 1, t, true)
}

/// NoisyMax; `out` is the first index of the largest noisy value.
pub fn noisy_max(m: usize) -> String {
    noisy_max_body(m, true)
}

pub fn noisy_max_det(m: usize) -> String {
    noisy_max_body(m, false)
}

fn noisy_max_body(m: usize, noisy: bool) -> String {
    let mut s = if noisy {
        header(&format!("NoisyMax over {m} queries; out is the first index of the largest noisy value."), m)
    } else {
        header(&format!("det(NoisyMax), m = {m}."), m)
    };
    s += &format!("input real q[{m}];\noutput dom out;\nreal best;\n");
    if noisy {
        s += "real r;\n";
    }
    s += "bool b;\n\n";
    s += if noisy { "best <- Lap(eps/2, q[1]);\n" } else { "best <- q[1];\n" };
    s += "out <- 1;\n";
    if m >= 2 {
        s += &format!("for i in 2..{m} {{\n");
        if noisy {
            s += "  r <- Lap(eps/2, q[i]);\n  b <- r > best;\n  if b {\n    best <- r;\n";
        } else {
            s += "  b <- q[i] > best;\n  if b {\n    best <- q[i];\n";
        }
        s += "    out <- i;\n  }\n}\n";
    }
    s
}

/// Laplace mechanism on `k` queries of sensitivity 1.
pub fn laplace(k: usize) -> String {
    let mut s = header(&format!("Laplace mechanism on {k} queries with sensitivity 1."), 1);
    s += &format!("input real q[{k}];\noutput real o[{k}];\n\nfor i in 1..{k} {{\n  o[i] <- Lap(eps, q[i]);\n}}\n");
    s
}

pub fn laplace_det(k: usize) -> String {
    let mut s = header(&format!("det(Laplace), k = {k}."), 1);
    s += &format!("input real q[{k}];\noutput real o[{k}];\n\nfor i in 1..{k} {{\n  o[i] <- q[i];\n}}\n");
    s
}

/// NumericSparse: TOP answers also release a noisy query value.
pub fn numeric_sparse(m: usize, c: usize, t: i64) -> String {
    numeric_sparse_body(m, c, t, true)
}

pub fn numeric_sparse_det(m: usize, c: usize, t: i64) -> String {
    numeric_sparse_body(m, c, t, false)
}

fn numeric_sparse_body(m: usize, c: usize, t: i64, noisy: bool) -> String {
    let mut s = if noisy {
        header(&format!("NumericSparse with m = {m}, c = {c}, T = {t}; o1[i] = 1 for TOP with value o2[i]."), m.max(c))
    } else {
        header(&format!("det(NumericSparse), m = {m}, c = {c}, T = {t}."), m.max(c))
    };
    s += &format!("input real q[{m}];\noutput dom o1[{m}];\noutput real o2[{m}];\nreal T;\n");
    if noisy {
        s += "real rT;\nreal r;\n";
    }
    s += "dom count;\nbool b;\n\n";
    s += &format!("T <- {t};\nfor i in 1..{m} {{\n  o1[i] <- 0;\n}}\n");
    let k = 9 * c;
    if noisy {
        s += &format!("rT <- Lap(4*eps/{k}, T);\n");
    }
    s += &format!("count <- 0;\nfor i in 1..{m} {{\n");
    if noisy {
        s += &format!("  r <- Lap(2*eps/{k}, q[i]);\n  b <- r >= rT;\n  if b {{\n    o1[i] <- 1;\n    o2[i] <- Lap(eps/{k}, q[i]);\n");
    } else {
        s += "  b <- q[i] >= T;\n  if b {\n    o1[i] <- 1;\n    o2[i] <- q[i];\n";
    }
    s += &format!("    count <- count + 1;\n    if count >= {c} {{\n      exit;\n    }}\n");
    if noisy {
        s += &format!("    rT <- Lap(4*eps/{k}, T);\n");
    }
    s += "  }\n}\n";
    s
}

/// Small programs exercising the other sampling statements.
pub const EXTRAS: [(&str, &str); 4] = [
    (
        "coin.dpw",
        "// A fair coin.\ndom 1;\noutput dom out;\ndist coin { () -> 0: 1/2, 1: 1/2; }\n\nout <- choose(eps, coin);\n",
    ),
    (
        "geometric.dpw",
        "// Stop with probability 1 - exp(-eps) per round; out counts rounds up to 3.\ndom 3;\noutput dom out;\ndom c;\nbool b;\nbool full;\ndist stay { () -> 1: exp(-eps), 0: 1 - exp(-eps); }\n\nout <- 1;\nb <- true;\nwhile b {\n  c <- choose(eps, stay);\n  full <- out >= 3;\n  if full {\n    exit;\n  }\n  b <- EQ(c, 1);\n  if b {\n    out <- out + 1;\n  }\n}\n",
    ),
    (
        "exp_mech.dpw",
        "// Exponential mechanism over three candidates.\ndom 2;\ninput dom u;\noutput dom o;\nscore F { (0) -> 0: 0, 1: 1, 2: 2; (1) -> 0: 1, 1: 1, 2: 1; (2) -> 0: 2, 1: 1, 2: 0; }\n\no <- ExpMech(eps, F, u);\n",
    ),
    (
        "dlap_compare.dpw",
        "// Sign of the difference of two discrete Laplace draws centred at 1 and 0.\ndom 1;\noutput dom o;\nint x;\nint y;\nbool b;\nbool c;\n\nx <- DLap(eps, 1);\ny <- DLap(eps, 0);\nb <- x >= y;\nc <- x == y;\nif c {\n  o <- 0;\n} else {\n  if b {\n    o <- 1;\n  } else {\n    o <- -1;\n  }\n}\n",
    ),
];

#[allow(clippy::too_many_arguments)]
fn spec(
    program: &str,
    det: &str,
    input_metric: &str,
    output_metric: &str,
    beta: &str,
    scale: Option<&str>,
    alpha: Num,
    gamma: Num,
    inputs: Inputs,
) -> CheckSpec {
    CheckSpec {
        program: program.into(),
        det: DetRef::Path(det.into()),
        input_metric: input_metric.into(),
        output_metric: output_metric.into(),
        beta: beta.into(),
        beta_scale: scale.map(|s| Num::Text(s.into())),
        alpha,
        gamma,
        tag: String::new(),
        dd_comparison: DdComparison::Inclusive,
        inputs,
        options: SpecOptions::default(),
    }
}

fn dd() -> Num {
    Num::Text("dd".into())
}

fn range(l: i64) -> Inputs {
    Inputs::Range { range: [-l, l] }
}

fn list(u: &[i64]) -> Inputs {
    Inputs::List(vec![u.iter().map(|&x| Num::Int(x)).collect()])
}

fn spec_text(s: &CheckSpec) -> String {
    serde_json::to_string_pretty(s).expect("specs serialize") + "\n"
}

/// Every shipped corpus file as `(file name, contents)`.
pub fn files() -> Vec<(String, String)> {
    let mut f: Vec<(String, String)> = Vec::new();
    let mut add = |name: String, text: String| f.push((name, text));
    for m in 1..=3 {
        for c in 1..=2 {
            add(format!("sparse_m{m}_c{c}.dpw"), sparse(m, c, 0, true));
            add(format!("sparse_variant_m{m}_c{c}.dpw"), sparse(m, c, 0, false));
            add(format!("sparse_det_m{m}_c{c}.dpw"), sparse_det(m, c, 0));
            let beta = format!("{}*exp(-alpha*eps/{})", 2 * m * c, 8 * c);
            for (kind, prog) in [("sparse", "sparse"), ("sparse_variant", "sparse_variant")] {
                add(
                    format!("{kind}_m{m}_c{c}.spec"),
                    spec_text(&spec(
                        &format!("{prog}_m{m}_c{c}.dpw"),
                        &format!("sparse_det_m{m}_c{c}.dpw"),
                        "linf",
                        "eq01",
                        &beta,
                        None,
                        dd(),
                        Num::Int(0),
                        range(1),
                    )),
                );
            }
        }
        add(format!("noisy_max_m{m}.dpw"), noisy_max(m));
        add(format!("noisy_max_det_m{m}.dpw"), noisy_max_det(m));
        add(format!("above_threshold_m{m}.dpw"), above_threshold(m, 0));
    }
    for (c, best, worse) in [(1usize, 6, 7), (2, 12, 13)] {
        let beta = format!("{}*exp(-alpha*eps/{})", 6 * c, 8 * c);
        for (kind, scale) in [("best", best), ("worse", worse)] {
            add(
                format!("sparse_m3_c{c}_{kind}{scale}.spec"),
                spec_text(&spec(
                    &format!("sparse_m3_c{c}.dpw"),
                    &format!("sparse_det_m3_c{c}.dpw"),
                    "linf",
                    "eq01",
                    &beta,
                    Some(&format!("1/{scale}")),
                    dd(),
                    Num::Int(0),
                    range(1),
                )),
            );
        }
    }
    add(
        "sparse_variant_m3_c1_worse7.spec".into(),
        spec_text(&spec(
            "sparse_variant_m3_c1.dpw",
            "sparse_det_m3_c1.dpw",
            "linf",
            "eq01",
            "6*exp(-alpha*eps/8)",
            Some("1/7"),
            dd(),
            Num::Int(0),
            range(1),
        )),
    );
    add(
        "above_threshold_m3.spec".into(),
        spec_text(&spec(
            "above_threshold_m3.dpw",
            "sparse_det_m3_c1.dpw",
            "linf",
            "eq01",
            "6*exp(-alpha*eps/8)",
            None,
            dd(),
            Num::Int(0),
            range(1),
        )),
    );
    for (kind, scale) in [("", None), ("_best4", Some("1/4")), ("_worse5", Some("1/5"))] {
        add(
            format!("noisy_max_m3{kind}.spec"),
            spec_text(&spec(
                "noisy_max_m3.dpw",
                "noisy_max_det_m3.dpw",
                "linf",
                "eq01",
                "3*exp(-alpha*eps/2)",
                scale,
                dd(),
                Num::Int(0),
                range(1),
            )),
        );
    }
    for k in [1usize, 2] {
        add(format!("laplace_k{k}.dpw"), laplace(k));
        add(format!("laplace_det_k{k}.dpw"), laplace_det(k));
    }
    for g in 1..=3 {
        for l in 1..=2 {
            add(
                format!("laplace_k2_g{g}_r{l}.spec"),
                spec_text(&spec(
                    "laplace_k2.dpw",
                    "laplace_det_k2.dpw",
                    "discrete01",
                    "linf_real",
                    "2*exp(-gamma*eps)",
                    None,
                    Num::Int(0),
                    Num::Int(g),
                    range(l),
                )),
            );
        }
    }
    for c in 1..=2 {
        add(format!("numeric_sparse_m3_c{c}.dpw"), numeric_sparse(3, c, 0));
        add(format!("numeric_sparse_det_m3_c{c}.dpw"), numeric_sparse_det(3, c, 0));
        let beta = format!("{}*exp(-alpha*eps/{})", 7 * c, 9 * c);
        let scales: &[(&str, Option<&str>)] = if c == 1 {
            &[("", None), ("_best3", Some("1/3")), ("_worse4", Some("1/4"))]
        } else {
            &[("", None)]
        };
        for (kind, scale) in scales {
            add(
                format!("numeric_sparse_m3_c{c}{kind}.spec"),
                spec_text(&spec(
                    &format!("numeric_sparse_m3_c{c}.dpw"),
                    &format!("numeric_sparse_det_m3_c{c}.dpw"),
                    "numeric_sparse:0",
                    "linf_real",
                    &beta,
                    *scale,
                    Num::Int(1),
                    Num::Int(1),
                    range(1),
                )),
            );
        }
    }
    for (name, text) in EXTRAS {
        add(name.to_string(), text.to_string());
    }
    // default instances under their plain names
    add("sparse.dpw".into(), sparse(3, 1, 0, true));
    add("sparse_variant.dpw".into(), sparse(3, 1, 0, false));
    add("numeric_sparse.dpw".into(), numeric_sparse(3, 1, 0));
    add("noisy_max.dpw".into(), noisy_max(3));
    add("above_threshold.dpw".into(), above_threshold(3, 0));
    add("laplace.dpw".into(), laplace(2));
    add(
        "laplace.spec".into(),
        spec_text(&spec("laplace_k2.dpw", "laplace_det_k2.dpw", "discrete01", "linf_real", "2*exp(-gamma*eps)", None, Num::Int(0), Num::Int(1), range(1))),
    );
    add(
        "sparse_best7.spec".into(),
        spec_text(&spec(
            "sparse_m3_c1.dpw",
            "sparse_det_m3_c1.dpw",
            "linf",
            "eq01",
            "6*exp(-alpha*eps/8)",
            Some("1/7"),
            dd(),
            Num::Int(0),
            list(&[-1, -1, 1]),
        )),
    );
    f
}
