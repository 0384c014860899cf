//! Output events: finite unions of DOM valuations joined with polyhedra over
//! the real outputs.

use super::SymState;
use crate::integrator::{Constraint, LinForm, Region, Rel};
use crate::lang::syntax::{BinOp, PExpr, Parser};
use crate::lang::{LangError, Program, Role, Ty, Var};
use crate::symexp::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutAtom {
    Dom(i64),
    Unset,
}

/// Conjunction of output atoms and a region whose variable ids are the
/// program indices of real outputs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EventComponent {
    pub atoms: Vec<(Var, OutAtom)>,
    pub region: Region,
}

/// Union of components; callers keep components disjoint.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutputEvent {
    pub components: Vec<EventComponent>,
}

impl OutputEvent {
    /// Termination, whatever the outputs.
    pub fn terminated() -> Self {
        OutputEvent {
            components: vec![EventComponent::default()],
        }
    }

    pub fn single(c: EventComponent) -> Self {
        OutputEvent { components: vec![c] }
    }

    pub fn union(mut self, o: OutputEvent) -> Self {
        self.components.extend(o.components);
        self
    }
}

impl EventComponent {
    /// Region over samples equivalent to this component at an exit state, or
    /// `None` when the atoms fail or a constrained real output is unset.
    pub(super) fn at_state(&self, p: &Program, st: &SymState) -> Option<Region> {
        for (v, a) in &self.atoms {
            let ok = match (p.ty(*v), a) {
                (Ty::Dom, OutAtom::Dom(x)) => st.doms[*v] == Some(*x),
                (Ty::Dom, OutAtom::Unset) => st.doms[*v].is_none(),
                (_, OutAtom::Unset) => st.defs[*v].is_none(),
                (_, OutAtom::Dom(_)) => false,
            };
            if !ok {
                return None;
            }
        }
        let mut cons = Vec::new();
        for c in &self.region.cons {
            if c.lhs.vars().any(|v| st.defs[v].is_none()) {
                return None;
            }
            let lhs = c.lhs.substitute_all(&|v| st.defs[v].clone());
            cons.push(Constraint::new(lhs, c.rel));
        }
        Some(Region::new(cons))
    }
}

/// Parses `;`-separated components of `,`-separated atoms. Atoms are
/// `o = k` for DOM outputs, `o = unset`, linear comparisons over real
/// outputs, and `|e| < r` or `|e| <= r`.
pub fn parse_event(p: &Program, src: &str) -> Result<OutputEvent, LangError> {
    let mut ev = OutputEvent::default();
    for comp in src.split(';') {
        let mut c = EventComponent::default();
        for atom in comp.split(',').map(str::trim).filter(|a| !a.is_empty()) {
            parse_atom(p, atom, &mut c)?;
        }
        ev.components.push(c);
    }
    Ok(ev)
}

fn err<T>(msg: impl Into<String>) -> Result<T, LangError> {
    Err(LangError::at(0, 0, msg))
}

fn output(p: &Program, name: &str) -> Result<Var, LangError> {
    match p.var(name) {
        Some(v) if p.vars[v].role == Role::Output => Ok(v),
        _ => err(format!("`{name}` is not an output")),
    }
}

fn parse_atom(p: &Program, atom: &str, c: &mut EventComponent) -> Result<(), LangError> {
    if let Some(rest) = atom.strip_prefix('|') {
        let Some((inner, tail)) = rest.split_once('|') else {
            return err(format!("unclosed `|` in `{atom}`"));
        };
        let tail = tail.trim();
        let (rel, r) = if let Some(r) = tail.strip_prefix("<=") {
            (Rel::Le, r)
        } else if let Some(r) = tail.strip_prefix('<') {
            (Rel::Lt, r)
        } else {
            return err(format!("expected `<` or `<=` after `|...|` in `{atom}`"));
        };
        let e = linear(p, &Parser::expr_only(inner)?)?;
        let r = linear(p, &Parser::expr_only(r)?)?;
        if !r.is_constant() {
            return err("radius must be a constant");
        }
        c.region.push(Constraint::cmp(&e, rel, &r));
        c.region.push(Constraint::cmp(&e.neg(), rel, &r));
        return Ok(());
    }
    let e = Parser::expr_only(atom)?;
    let PExpr::Bin(op, l, r) = &e else {
        return err(format!("`{atom}` is not a comparison"));
    };
    if matches!(op, BinOp::Eq) {
        if let Some(name) = name_of(l) {
            let v = output(p, &name)?;
            if matches!(&**r, PExpr::Name(n) if n == "unset") {
                c.atoms.push((v, OutAtom::Unset));
                return Ok(());
            }
            if p.ty(v) == Ty::Dom {
                let l = linear(p, r)?;
                let k = l.constant.clone();
                if !l.is_constant() || !k.is_integer() {
                    return err(format!("DOM output `{name}` compared with a non-integer"));
                }
                let k = i64::try_from(k.to_integer()).map_err(|_| LangError::at(0, 0, "value out of range"))?;
                c.atoms.push((v, OutAtom::Dom(k)));
                return Ok(());
            }
        }
    }
    let (a, b) = (linear(p, l)?, linear(p, r)?);
    let con = match op {
        BinOp::Lt => Constraint::cmp(&a, Rel::Lt, &b),
        BinOp::Le => Constraint::cmp(&a, Rel::Le, &b),
        BinOp::Gt => Constraint::cmp(&b, Rel::Lt, &a),
        BinOp::Ge => Constraint::cmp(&b, Rel::Le, &a),
        BinOp::Eq => Constraint::cmp(&a, Rel::Eq, &b),
        _ => return err(format!("unsupported relation in `{atom}`")),
    };
    c.region.push(con);
    Ok(())
}

fn name_of(e: &PExpr) -> Option<String> {
    match e {
        PExpr::Name(n) => Some(n.clone()),
        PExpr::Index(n, i) => match &**i {
            PExpr::Num(k, true) => Some(format!("{n}[{k}]")),
            _ => None,
        },
        _ => None,
    }
}

/// Linear form over real outputs.
fn linear(p: &Program, e: &PExpr) -> Result<LinForm, LangError> {
    Ok(match e {
        PExpr::Num(c, _) => LinForm::constant(c.clone()),
        PExpr::Name(_) | PExpr::Index(..) => {
            let name = name_of(e).ok_or_else(|| LangError::at(0, 0, "bad index"))?;
            let v = output(p, &name)?;
            if p.ty(v) != Ty::Real {
                return err(format!("`{name}` is not a real output"));
            }
            LinForm::var(v)
        }
        PExpr::Neg(a) => linear(p, a)?.neg(),
        PExpr::Bin(BinOp::Add, a, b) => linear(p, a)?.add(&linear(p, b)?),
        PExpr::Bin(BinOp::Sub, a, b) => linear(p, a)?.sub(&linear(p, b)?),
        PExpr::Bin(BinOp::Mul, a, b) => {
            let (x, y) = (linear(p, a)?, linear(p, b)?);
            if x.is_constant() {
                y.scale(&x.constant)
            } else if y.is_constant() {
                x.scale(&y.constant)
            } else {
                return err("nonlinear event");
            }
        }
        PExpr::Bin(BinOp::Div, a, b) => {
            let y = linear(p, b)?;
            if !y.is_constant() || y.constant == Rational::from_integer(0.into()) {
                return err("division by a non-constant or zero");
            }
            linear(p, a)?.scale(&y.constant.recip())
        }
        _ => return err("unsupported expression in event"),
    })
}
