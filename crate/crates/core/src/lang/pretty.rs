//! Source printer; `parse(pretty_print(p)) == p`.

use super::ast::*;
use crate::symexp::rational::{fmt_rational, is_integer, Rational};
use num_traits::One;
use std::fmt::Write;

pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    writeln!(out, "dom {};", p.dom_bound).unwrap();
    decls(p, &mut out);
    for (name, t) in &p.scores {
        writeln!(out, "score {name} {{").unwrap();
        for (args, es) in &t.rows {
            let es: Vec<String> = es.iter().map(|(c, s)| format!("{c}: {}", num_lit(s))).collect();
            writeln!(out, "  ({}) -> {};", join_ints(args), es.join(", ")).unwrap();
        }
        out.push_str("}\n");
    }
    for (name, t) in &p.dists {
        writeln!(out, "dist {name} {{").unwrap();
        for (args, es) in &t.rows {
            let es: Vec<String> = es.iter().map(|(c, txt, _)| format!("{c}: {txt}")).collect();
            writeln!(out, "  ({}) -> {};", join_ints(args), es.join(", ")).unwrap();
        }
        out.push_str("}\n");
    }
    for (name, t) in &p.funcs {
        writeln!(out, "table {name} {{").unwrap();
        for (args, v) in &t.rows {
            let v = match v {
                FnValue::Dom(x) => x.to_string(),
                FnValue::Bool(b) => b.to_string(),
            };
            writeln!(out, "  ({}) -> {v};", join_ints(args)).unwrap();
        }
        out.push_str("}\n");
    }
    block(p, &p.body, 0, &mut out);
    out
}

fn join_ints(xs: &[i64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn decls(p: &Program, out: &mut String) {
    let mut i = 0;
    while i < p.vars.len() {
        let d = &p.vars[i];
        let role = match d.role {
            Role::Input => "input ",
            Role::Output => "output ",
            Role::Local => "",
        };
        let mut n = 0;
        if let Some(base) = d.name.strip_suffix("[1]") {
            while i + n < p.vars.len() {
                let e = &p.vars[i + n];
                if e.name != format!("{base}[{}]", n + 1) || e.ty != d.ty || e.role != d.role {
                    break;
                }
                n += 1;
            }
            writeln!(out, "{role}{} {base}[{n}];", d.ty.keyword()).unwrap();
            i += n;
        } else {
            writeln!(out, "{role}{} {};", d.ty.keyword(), d.name).unwrap();
            i += 1;
        }
    }
}

fn block(p: &Program, b: &[Stmt], depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    for s in b {
        write!(out, "{pad}{}: ", s.label).unwrap();
        let name = |v: &Var| p.name(*v).to_string();
        match &s.kind {
            StmtKind::Bool(v, e) => writeln!(out, "{} <- {};", name(v), bool_expr(p, e, 0)).unwrap(),
            StmtKind::Compare { dst, lhs, op, rhs, .. } => writeln!(
                out,
                "{} <- {} {} {};",
                name(dst),
                num_expr(p, lhs, 1),
                op.symbol(),
                num_expr(p, rhs, 1)
            )
            .unwrap(),
            StmtKind::Dom(v, e) => writeln!(out, "{} <- {};", name(v), dom_expr(p, e, 0)).unwrap(),
            StmtKind::Num(v, e) => writeln!(out, "{} <- {};", name(v), num_expr(p, e, 0)).unwrap(),
            StmtKind::Lap { dst, scale, mean } => {
                writeln!(out, "{} <- Lap({}, {});", name(dst), scale_text(scale), num_expr(p, mean, 0)).unwrap()
            }
            StmtKind::DLap { dst, scale, mean } => {
                writeln!(out, "{} <- DLap({}, {});", name(dst), scale_text(scale), num_expr(p, mean, 0)).unwrap()
            }
            StmtKind::ExpMech { dst, scale, table, args } | StmtKind::Choose { dst, scale, table, args } => {
                let f = if matches!(s.kind, StmtKind::ExpMech { .. }) { "ExpMech" } else { "choose" };
                let mut parts = vec![scale_text(scale), table.clone()];
                parts.extend(args.iter().map(|a| dom_expr(p, a, 0)));
                writeln!(out, "{} <- {f}({});", name(dst), parts.join(", ")).unwrap()
            }
            StmtKind::If(c, t, e) => {
                writeln!(out, "if {} {{", bool_expr(p, c, 0)).unwrap();
                block(p, t, depth + 1, out);
                if e.is_empty() {
                    writeln!(out, "{pad}}}").unwrap();
                } else {
                    writeln!(out, "{pad}}} else {{").unwrap();
                    block(p, e, depth + 1, out);
                    writeln!(out, "{pad}}}").unwrap();
                }
            }
            StmtKind::While(c, body) => {
                writeln!(out, "while {} {{", bool_expr(p, c, 0)).unwrap();
                block(p, body, depth + 1, out);
                writeln!(out, "{pad}}}").unwrap();
            }
            StmtKind::Exit => out.push_str("exit;\n"),
        }
    }
}

fn scale_text(a: &Rational) -> String {
    if a.is_one() {
        "eps".into()
    } else if is_integer(a) {
        format!("{}*eps", a.numer())
    } else if a.numer().is_one() {
        format!("eps/{}", a.denom())
    } else {
        format!("{}*eps/{}", a.numer(), a.denom())
    }
}

fn num_lit(c: &Rational) -> String {
    if is_integer(c) {
        fmt_rational(c)
    } else {
        format!("({})", fmt_rational(c))
    }
}

fn paren(s: String, need: bool) -> String {
    if need {
        format!("({s})")
    } else {
        s
    }
}

/// Precedence levels: 0 top, 1 additive operand, 2 multiplicative operand,
/// 3 unary operand.
fn num_expr(p: &Program, e: &NumExpr, prec: u8) -> String {
    match e {
        NumExpr::Var(v) => p.name(*v).to_string(),
        NumExpr::Const(c) => num_lit(c),
        NumExpr::Dom(d) => dom_expr(p, d, 3),
        NumExpr::Add(a, b) => paren(format!("{} + {}", num_expr(p, a, 1), num_expr(p, b, 2)), prec > 1),
        NumExpr::Sub(a, b) => paren(format!("{} - {}", num_expr(p, a, 1), num_expr(p, b, 2)), prec > 1),
        NumExpr::Mul(a, b) => paren(format!("{}*{}", num_expr(p, a, 2), num_expr(p, b, 3)), prec > 2),
        NumExpr::Neg(a) => paren(format!("-{}", num_expr(p, a, 3)), prec > 2),
    }
}

fn dom_expr(p: &Program, e: &DomExpr, prec: u8) -> String {
    match e {
        DomExpr::Lit(n) => paren(n.to_string(), *n < 0 && prec > 2),
        DomExpr::Var(v) => p.name(*v).to_string(),
        DomExpr::Add(a, b) => paren(format!("{} + {}", dom_expr(p, a, 1), dom_expr(p, b, 2)), prec > 1),
        DomExpr::Sub(a, b) => paren(format!("{} - {}", dom_expr(p, a, 1), dom_expr(p, b, 2)), prec > 1),
        DomExpr::Builtin(f, xs) => {
            let n = match f {
                DomFn::Min => "MIN",
                DomFn::Max => "MAX",
                DomFn::Add => "ADD",
                DomFn::Sub => "SUB",
            };
            call(p, n, xs)
        }
        DomExpr::Table(t, xs) => call(p, t, xs),
    }
}

fn call(p: &Program, f: &str, xs: &[DomExpr]) -> String {
    let a: Vec<String> = xs.iter().map(|x| dom_expr(p, x, 0)).collect();
    format!("{f}({})", a.join(", "))
}

/// Levels: 0 top, 1 `or` operand, 2 `and` operand, 3 `not` operand.
fn bool_expr(p: &Program, e: &BoolExpr, prec: u8) -> String {
    match e {
        BoolExpr::Lit(b) => b.to_string(),
        BoolExpr::Var(v) => p.name(*v).to_string(),
        BoolExpr::Not(a) => paren(format!("not {}", bool_expr(p, a, 3)), prec > 3),
        BoolExpr::And(a, b) => paren(format!("{} and {}", bool_expr(p, a, 2), bool_expr(p, b, 3)), prec > 2),
        BoolExpr::Or(a, b) => paren(format!("{} or {}", bool_expr(p, a, 1), bool_expr(p, b, 2)), prec > 1),
        BoolExpr::Builtin(f, xs) => {
            let n = match f {
                BoolFn::Eq => "EQ",
                BoolFn::Lt => "LT",
                BoolFn::Le => "LE",
            };
            call(p, n, xs)
        }
        BoolExpr::Table(t, xs) => call(p, t, xs),
    }
}
