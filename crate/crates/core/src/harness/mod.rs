//! Run orchestration: simulation output, CSV records, verification, sweeps
//! and reports.

pub mod corpus;
pub mod records;
pub mod report;
pub mod sweep;
pub mod verify;

use crate::dynamics::{evolve, Trajectory};
use crate::error::Result;
use crate::model::Scenario;
use crate::speedlimit::{report_for, trajectory_terms, SpeedLimitReport, VelocityTerms};

pub use records::{read_series, write_records, RunRecord, SeriesFile};
pub use report::{report_from_csv, CsvReport};
pub use sweep::{run_sweep, write_sweep, SweepParam, SweepRow};
pub use verify::{verify_corpus, verify_scenario, CheckResult, Fault, VerifyOptions, VerifySummary};

#[derive(Clone, Debug)]
pub struct SimulationOutput {
    pub trajectory: Trajectory,
    pub terms: Vec<VelocityTerms>,
    pub report: SpeedLimitReport,
    pub records: Vec<RunRecord>,
}

impl SimulationOutput {
    pub fn degeneracy_flags(&self) -> usize {
        self.terms.iter().map(|v| v.degeneracy_flags).sum()
    }
}

pub fn simulate(scenario: &Scenario) -> Result<SimulationOutput> {
    let trajectory = evolve(scenario)?;
    let terms = trajectory_terms(&trajectory)?;
    let report = report_for(&trajectory, &terms)?;
    let records = records::records(&trajectory, &terms)?;
    Ok(SimulationOutput {
        trajectory,
        terms,
        report,
        records,
    })
}

/// `key=value` lines for a report, in a fixed order.
pub fn report_lines(report: &SpeedLimitReport, degeneracy_flags: usize) -> Vec<String> {
    let [share_e, share_d, share_p] = report.shares();
    let f = records::fmt;
    vec![
        format!("tau={}", f(report.tau)),
        format!("distance={}", f(report.distance)),
        format!("bound={}", f(report.bound)),
        format!("tightness={}", f(report.tightness)),
        format!("formal_bound={}", f(report.formal_bound)),
        format!("avg_dE={}", f(report.avg_delta_e)),
        format!("avg_dE_D={}", f(report.avg_delta_e_d)),
        format!("avg_sigma_dot={}", f(report.avg_sigma)),
        format!("avg_activity={}", f(report.avg_activity)),
        format!("share_energy={}", f(share_e)),
        format!("share_bath_unitary={}", f(share_d)),
        format!("share_population={}", f(share_p)),
        format!("degeneracy_flags={degeneracy_flags}"),
    ]
}

/// Parse `key=value` lines back into pairs; lines without `=` are skipped.
pub fn parse_report_lines(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}
