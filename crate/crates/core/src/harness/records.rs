//! Per-row trajectory CSV: writing from a run and reading back for reports.

use std::path::Path;

use crate::dynamics::Trajectory;
use crate::error::{QslError, Result};
use crate::speedlimit::{VelocitySeries, VelocityTerms};

/// One emitted row.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub t: f64,
    /// Eigenvalues of `ρ(t)`, ascending.
    pub populations: Vec<f64>,
    pub trace_distance_from_t0: f64,
    pub delta_e: f64,
    pub delta_e_d: f64,
    pub sigma_dot: f64,
    pub activity: f64,
    pub heat_flux: f64,
    pub entropy_flux: f64,
    pub lhs_norm: f64,
    pub rhs_sum: f64,
    pub degeneracy_flag_count: usize,
    pub hbar: f64,
}

pub const VALUE_COLUMNS: [&str; 10] = [
    "trace_distance_from_t0",
    "dE",
    "dE_D",
    "sigma_dot",
    "activity",
    "heat_flux",
    "entropy_flux",
    "lhs_norm",
    "rhs_sum",
    "degeneracy_flag_count",
];

pub fn header(dim: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((0..dim).map(|n| format!("p_{n}")));
    h.extend(VALUE_COLUMNS.iter().map(|s| s.to_string()));
    h.push("hbar".into());
    h
}

/// Scientific notation with 17 significant digits.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn records(trajectory: &Trajectory, terms: &[VelocityTerms]) -> Result<Vec<RunRecord>> {
    let first = trajectory.first();
    trajectory
        .states
        .iter()
        .zip(terms)
        .map(|(rho, v)| {
            Ok(RunRecord {
                t: v.t,
                populations: rho.populations().to_vec(),
                trace_distance_from_t0: first.trace_distance(rho)?,
                delta_e: v.delta_e,
                delta_e_d: v.delta_e_d,
                sigma_dot: v.sigma_dot,
                activity: v.activity,
                heat_flux: v.heat_flux,
                entropy_flux: v.entropy_flux,
                lhs_norm: v.lhs_norm,
                rhs_sum: v.rhs_sum(),
                degeneracy_flag_count: v.degeneracy_flags,
                hbar: trajectory.scenario.hbar,
            })
        })
        .collect()
}

fn io_error(path: &Path, err: csv::Error) -> QslError {
    let source = match err.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => std::io::Error::other(format!("{other:?}")),
    };
    QslError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_records(path: &Path, dim: usize, rows: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record(header(dim)).map_err(|e| io_error(path, e))?;
    for r in rows {
        let mut line = vec![fmt(r.t)];
        line.extend(r.populations.iter().map(|&p| fmt(p)));
        line.extend(
            [
                r.trace_distance_from_t0,
                r.delta_e,
                r.delta_e_d,
                r.sigma_dot,
                r.activity,
                r.heat_flux,
                r.entropy_flux,
                r.lhs_norm,
                r.rhs_sum,
            ]
            .map(fmt),
        );
        line.push(r.degeneracy_flag_count.to_string());
        line.push(fmt(r.hbar));
        w.write_record(&line).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|source| QslError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Columns a report needs, read back from a trajectory CSV.
#[derive(Clone, Debug)]
pub struct SeriesFile {
    pub series: VelocitySeries,
    /// `trace_distance_from_t0` of the last row.
    pub distance: f64,
    pub hbar: f64,
    pub degeneracy_flags: usize,
}

pub fn read_series(path: &Path) -> Result<SeriesFile> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let headers = reader.headers().map_err(|e| io_error(path, e))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| QslError::Schema(format!("{}: missing column `{name}`", path.display())))
    };
    let idx = [
        column("t")?,
        column("dE")?,
        column("dE_D")?,
        column("sigma_dot")?,
        column("activity")?,
        column("lhs_norm")?,
        column("trace_distance_from_t0")?,
        column("hbar")?,
    ];
    let flags = headers.iter().position(|h| h == "degeneracy_flag_count");
    let mut cols: [Vec<f64>; 8] = Default::default();
    let mut degeneracy_flags = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| QslError::Schema(format!("{}: {e}", path.display())))?;
        for (k, &i) in idx.iter().enumerate() {
            let field = record.get(i).unwrap_or("");
            let value: f64 = field.trim().parse().map_err(|_| {
                QslError::Schema(format!(
                    "{}: row {}: column `{}` holds `{field}`",
                    path.display(),
                    row + 2,
                    &headers[i]
                ))
            })?;
            cols[k].push(value);
        }
        if let Some(f) = flags.and_then(|i| record.get(i)) {
            degeneracy_flags += f.trim().parse::<usize>().unwrap_or(0);
        }
    }
    if cols[0].is_empty() {
        return Err(QslError::Schema(format!("{}: no data rows", path.display())));
    }
    let [times, delta_e, delta_e_d, sigma_dot, activity, lhs_norm, distance, hbar] = cols;
    Ok(SeriesFile {
        distance: *distance.last().unwrap(),
        hbar: hbar[0],
        degeneracy_flags,
        series: VelocitySeries {
            times,
            delta_e,
            delta_e_d,
            sigma_dot,
            activity,
            lhs_norm,
        },
    })
}
