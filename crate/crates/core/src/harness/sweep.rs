//! One-parameter sweeps over a scenario.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use super::records::fmt as fmt_value;
use crate::dynamics::evolve;
use crate::error::{QslError, Result};
use crate::limits::quasi_adiabatic_point;
use crate::model::Scenario;
use crate::speedlimit::qsl_bound;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Lambda,
    Beta,
    Gamma0,
    Dt,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Lambda => "lambda",
            SweepParam::Beta => "beta",
            SweepParam::Gamma0 => "gamma0",
            SweepParam::Dt => "dt",
        }
    }

    pub fn apply(self, scenario: &Scenario, value: f64) -> Scenario {
        match self {
            SweepParam::Lambda => scenario.with_lambda(value),
            SweepParam::Beta => scenario.with_beta(value),
            SweepParam::Gamma0 => scenario.with_gamma0(value),
            SweepParam::Dt => scenario.with_dt(value),
        }
    }
}

impl FromStr for SweepParam {
    type Err = QslError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lambda" => Ok(SweepParam::Lambda),
            "beta" => Ok(SweepParam::Beta),
            "gamma0" => Ok(SweepParam::Gamma0),
            "dt" => Ok(SweepParam::Dt),
            other => Err(QslError::UnknownParam(other.to_string())),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub tau: f64,
    pub distance: f64,
    pub bound: f64,
    pub tightness: f64,
    /// `‖H_D - H_cd‖_tr` at mid-protocol; lambda sweeps only.
    pub e_cd: Option<f64>,
    /// `T(ρ, ρ_eq)` at mid-protocol; lambda sweeps only.
    pub d_eq: Option<f64>,
    /// `T(ρ_dt(t1), ρ_{dt/2}(t1))`; dt sweeps only.
    pub endpoint_drift: Option<f64>,
}

fn sweep_row(scenario: &Scenario, param: SweepParam, value: f64) -> Result<SweepRow> {
    let run = param.apply(scenario, value);
    run.validate()?;
    let trajectory = evolve(&run)?;
    let report = qsl_bound(&trajectory)?;
    let mut row = SweepRow {
        param,
        value,
        tau: report.tau,
        distance: report.distance,
        bound: report.bound,
        tightness: report.tightness,
        e_cd: None,
        d_eq: None,
        endpoint_drift: None,
    };
    match param {
        SweepParam::Lambda => {
            let q = quasi_adiabatic_point(scenario, value)?;
            row.e_cd = Some(q.e_cd);
            row.d_eq = Some(q.d_eq);
        }
        SweepParam::Dt => {
            let half = evolve(&run.with_dt(value / 2.0))?;
            row.endpoint_drift = Some(trajectory.last().trace_distance(half.last())?);
        }
        SweepParam::Beta | SweepParam::Gamma0 => {}
    }
    Ok(row)
}

/// Rows in the order of `values`.
pub fn run_sweep(scenario: &Scenario, param: SweepParam, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(QslError::Validation("sweep needs at least one value".into()));
    }
    values.par_iter().map(|&v| sweep_row(scenario, param, v)).collect()
}

pub const SWEEP_HEADER: [&str; 9] = [
    "param",
    "value",
    "tau",
    "distance",
    "bound",
    "tightness",
    "e_cd",
    "d_eq",
    "endpoint_drift",
];

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let io = |e: csv::Error| QslError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(SWEEP_HEADER).map_err(io)?;
    let opt = |x: Option<f64>| x.map(fmt_value).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.param.name().to_string(),
            fmt_value(r.value),
            fmt_value(r.tau),
            fmt_value(r.distance),
            fmt_value(r.bound),
            fmt_value(r.tightness),
            opt(r.e_cd),
            opt(r.d_eq),
            opt(r.endpoint_drift),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|source| QslError::Io {
        path: path.to_path_buf(),
        source,
    })
}
