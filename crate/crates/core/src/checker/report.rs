//! Machine-readable reports. Rationals are `p/q` strings so that a report
//! parses back to the exact values.

use super::spec::CheckSpec;
use super::{fmt_value, BatchResult, CheckError, Counterexample, LevelCheck, Status, Verdict};
use crate::symexp::rational::fmt_rational;
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "accucheck-report/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRecord {
    pub input: Vec<String>,
    pub epsilon: String,
    pub alpha: String,
    pub gamma: String,
    /// enclosure of beta(epsilon)
    pub beta_lo: String,
    pub beta_hi: String,
    /// certified upper bound on p - (1 - beta) at epsilon
    pub margin: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: String,
    pub alpha: String,
    pub gamma: String,
    pub status: Status,
    pub beta: String,
    pub probability_expr: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub status: Status,
    pub input: Vec<String>,
    pub dd: Option<String>,
    pub alpha: Option<String>,
    pub gamma: Option<String>,
    pub beta: Option<String>,
    pub epsilon_witness: Option<String>,
    pub probability_expr: Option<String>,
    pub timings_ms: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<LevelRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub status: Status,
    pub total: usize,
    pub verified: usize,
    pub refuted: usize,
    pub unknown: usize,
    pub vacuous: usize,
    pub errors: usize,
    pub counterexample: Option<CounterexampleRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema: String,
    pub tool_version: String,
    pub query: CheckSpec,
    pub results: Vec<InputRecord>,
    pub summary: SummaryRecord,
    pub wall_clock_ms: f64,
}

fn level_record(c: &LevelCheck) -> LevelRecord {
    LevelRecord {
        level: fmt_rational(&c.level),
        alpha: c.alpha.to_string(),
        gamma: c.gamma.to_string(),
        status: c.status,
        beta: c.beta.clone(),
        probability_expr: c.probability.clone(),
        message: c.message.clone(),
    }
}

pub fn counterexample_record(input: &[crate::lang::OutValue], cx: &Counterexample) -> CounterexampleRecord {
    CounterexampleRecord {
        input: input.iter().map(fmt_value).collect(),
        epsilon: fmt_rational(&cx.eps0),
        alpha: cx.alpha.to_string(),
        gamma: cx.gamma.to_string(),
        beta_lo: fmt_rational(&cx.beta_value.lo.to_rational()),
        beta_hi: fmt_rational(&cx.beta_value.hi.to_rational()),
        margin: fmt_rational(&cx.margin.to_rational()),
    }
}

/// The check that decided the verdict: first refuting, else first unknown,
/// else the first one.
fn deciding(v: &Verdict) -> Option<&LevelCheck> {
    [Status::Refuted, Status::Unknown]
        .iter()
        .find_map(|s| v.checks.iter().find(|c| c.status == *s))
        .or(v.checks.first())
}

pub fn input_record(input: &[crate::lang::OutValue], r: &Result<Verdict, CheckError>) -> InputRecord {
    match r {
        Ok(v) => {
            let c = deciding(v);
            InputRecord {
                status: v.status,
                input: input.iter().map(fmt_value).collect(),
                dd: v.dd.as_ref().map(|d| d.to_string()),
                alpha: c.map(|c| c.alpha.to_string()),
                gamma: c.map(|c| c.gamma.to_string()),
                beta: c.map(|c| c.beta.clone()),
                epsilon_witness: v.counterexample.as_ref().map(|x| fmt_rational(&x.eps0)),
                probability_expr: c.map(|c| c.probability.clone()),
                timings_ms: v.timings.total_ms,
                levels: if v.checks.len() > 1 { v.checks.iter().map(level_record).collect() } else { vec![] },
                error: None,
            }
        }
        Err(e) => InputRecord {
            status: Status::Unknown,
            input: input.iter().map(fmt_value).collect(),
            dd: None,
            alpha: None,
            gamma: None,
            beta: None,
            epsilon_witness: None,
            probability_expr: None,
            timings_ms: 0.0,
            levels: vec![],
            error: Some(e.to_string()),
        },
    }
}

pub fn report(query: &CheckSpec, inputs: &[Vec<crate::lang::OutValue>], b: &BatchResult, wall_clock_ms: f64) -> ReportDocument {
    let s = &b.summary;
    ReportDocument {
        schema: SCHEMA.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        query: query.clone(),
        results: inputs.iter().zip(&b.results).map(|(u, r)| input_record(u, r)).collect(),
        summary: SummaryRecord {
            status: s.status,
            total: s.total,
            verified: s.verified,
            refuted: s.refuted,
            unknown: s.unknown,
            vacuous: s.vacuous,
            errors: s.errors,
            counterexample: s.counterexample.as_ref().map(|(u, cx)| counterexample_record(u, cx)),
        },
        wall_clock_ms,
    }
}
