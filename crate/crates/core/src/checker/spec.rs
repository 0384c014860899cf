//! Check-spec files: JSON describing a query template and its inputs.

use super::{AccuracyQuery, CheckError, CheckOptions, DdComparison, InputSet};
use crate::lang::{parse_checked, DetSpec, DetTable, OutValue, Program, Ty};
use crate::metrics::{InputMetric, OutputMetric};
use crate::regions::{AlphaMode, BetaExpr, GammaMode, RegionSpec, Tag};
use crate::symexp::rational::{parse_rational, Rational};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("cannot read {0}: {1}")]
    Io(String, String),
    #[error("malformed spec: {0}")]
    Json(String),
    #[error("{0}: {1}")]
    Program(String, String),
    #[error("{0}")]
    Invalid(String),
}

/// A rational written as a JSON integer or a `p/q` / decimal string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Text(String),
}

impl Num {
    pub fn rational(&self) -> Result<Rational, SpecError> {
        match self {
            Num::Int(n) => Ok(Rational::from_integer((*n).into())),
            Num::Text(s) => parse_rational(s.trim()).map_err(|_| SpecError::Invalid(format!("`{s}` is not a rational"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub input: Vec<Num>,
    /// `"unset"` for an output left unassigned
    pub output: Vec<Num>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DetRef {
    Path(String),
    Table { table: Vec<TableRow> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Inputs {
    List(Vec<Vec<Num>>),
    /// the same inclusive integer range for every input
    Range { range: [i64; 2] },
    Ranges { ranges: Vec<[i64; 2]> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecOptions {
    pub state_cap: Option<usize>,
    pub precision: Option<u32>,
    pub depth: Option<u32>,
    pub max_inputs: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub program: String,
    pub det: DetRef,
    pub input_metric: String,
    pub output_metric: String,
    pub beta: String,
    #[serde(default)]
    pub beta_scale: Option<Num>,
    /// `"dd"` or a rational
    pub alpha: Num,
    /// a rational or `"finite_outputs"`
    pub gamma: Num,
    #[serde(default)]
    pub tag: String,
    #[serde(default)]
    pub dd_comparison: DdComparison,
    pub inputs: Inputs,
    #[serde(default)]
    pub options: SpecOptions,
}

pub const DEFAULT_MAX_INPUTS: usize = 100_000;

/// A loaded spec: query template (with an empty input), inputs, options.
#[derive(Clone, Debug)]
pub struct LoadedSpec {
    pub spec: CheckSpec,
    pub template: AccuracyQuery,
    pub inputs: InputSet,
    pub options: CheckOptions,
    pub max_inputs: usize,
}

pub fn load_program(path: &Path) -> Result<Program, SpecError> {
    let name = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|e| SpecError::Io(name.clone(), e.to_string()))?;
    parse_checked(&src).map_err(|e| SpecError::Program(name, e.to_string()))
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let q = Path::new(p);
    if q.is_absolute() {
        q.to_path_buf()
    } else {
        base.join(q)
    }
}

fn value_for(ty: Ty, n: &Num) -> Result<OutValue, SpecError> {
    if matches!(n, Num::Text(s) if s == "unset") {
        return Ok(OutValue::Unset);
    }
    let r = n.rational()?;
    match ty {
        Ty::Dom => {
            if !r.is_integer() {
                return Err(SpecError::Invalid(format!("DOM value {r} is not an integer")));
            }
            i64::try_from(r.to_integer())
                .map(OutValue::Dom)
                .map_err(|_| SpecError::Invalid(format!("DOM value {r} out of range")))
        }
        _ => Ok(OutValue::Real(r)),
    }
}

/// Typed input vector in declaration order.
pub fn input_values(p: &Program, xs: &[Num]) -> Result<Vec<OutValue>, SpecError> {
    let ins = p.inputs();
    if ins.len() != xs.len() {
        return Err(SpecError::Invalid(format!("expected {} input values, got {}", ins.len(), xs.len())));
    }
    ins.iter().zip(xs).map(|(&v, x)| value_for(p.ty(v), x)).collect()
}

impl CheckSpec {
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        serde_json::from_str(text).map_err(|e| SpecError::Json(e.to_string()))
    }

    /// Resolves paths against `base` and builds the query template.
    pub fn load(self, base: &Path) -> Result<LoadedSpec, SpecError> {
        let program = load_program(&resolve(base, &self.program))?;
        let det = match &self.det {
            DetRef::Path(p) => DetSpec::Program(load_program(&resolve(base, p))?),
            DetRef::Table { table } => {
                let outs = program.outputs();
                let mut rows = Vec::new();
                for r in table {
                    let input = r.input.iter().map(Num::rational).collect::<Result<Vec<_>, _>>()?;
                    if input.len() != program.inputs().len() || r.output.len() != outs.len() {
                        return Err(SpecError::Invalid("table row does not match the program's inputs and outputs".into()));
                    }
                    let output = outs
                        .iter()
                        .zip(&r.output)
                        .map(|(&o, x)| value_for(program.ty(o), x))
                        .collect::<Result<Vec<_>, _>>()?;
                    rows.push((input, output));
                }
                DetSpec::Table(DetTable { rows })
            }
        };
        let bad = |e: &dyn std::fmt::Display| SpecError::Invalid(e.to_string());
        let input_metric = InputMetric::parse(&self.input_metric).map_err(|e| bad(&e))?;
        let output_metric = OutputMetric::parse(&self.output_metric).map_err(|e| bad(&e))?;
        let mut beta = BetaExpr::parse(&self.beta).map_err(|e| bad(&e))?;
        if let Some(s) = &self.beta_scale {
            beta = beta.scale(&s.rational()?);
        }
        let alpha_mode = match &self.alpha {
            Num::Text(s) if s == "dd" => AlphaMode::Dd,
            n => AlphaMode::Fixed(n.rational()?),
        };
        let gamma_mode = match &self.gamma {
            Num::Text(s) if s == "finite_outputs" => GammaMode::FiniteOutputSweep,
            n => GammaMode::Fixed(n.rational()?),
        };
        let tag = Tag::parse(&self.tag).map_err(|e| bad(&e))?;
        let inputs = match &self.inputs {
            Inputs::List(l) => InputSet::List(l.iter().map(|u| input_values(&program, u)).collect::<Result<_, _>>()?),
            Inputs::Range { range } => InputSet::Ranges(vec![(range[0], range[1]); program.inputs().len()]),
            Inputs::Ranges { ranges } => InputSet::Ranges(ranges.iter().map(|r| (r[0], r[1])).collect()),
        };
        let mut options = CheckOptions::default();
        if let Some(k) = self.options.state_cap {
            options.build.state_cap = k;
        }
        if let Some(p) = self.options.precision {
            options.precision = p;
            options.decide.schedule = vec![p, 2 * p, 4 * p];
        }
        if let Some(d) = self.options.depth {
            options.decide.max_depth = d;
        }
        let max_inputs = self.options.max_inputs.unwrap_or(DEFAULT_MAX_INPUTS);
        let template = AccuracyQuery {
            program,
            det,
            input_metric,
            output_metric,
            region: RegionSpec {
                beta,
                alpha_mode,
                gamma_mode,
                tag,
            },
            input: vec![],
            dd_comparison: self.dd_comparison,
        };
        Ok(LoadedSpec {
            spec: self,
            template,
            inputs,
            options,
            max_inputs,
        })
    }
}

/// Reads and loads a spec file; relative paths are taken from its directory.
pub fn load_spec_file(path: &Path) -> Result<LoadedSpec, SpecError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| SpecError::Io(name, e.to_string()))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    CheckSpec::parse(&text)?.load(base)
}

impl From<CheckError> for SpecError {
    fn from(e: CheckError) -> Self {
        SpecError::Invalid(e.to_string())
    }
}
