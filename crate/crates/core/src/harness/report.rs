//! Speed-limit report recomputed from an emitted trajectory CSV.

use std::path::Path;

use super::records::read_series;
use crate::error::Result;
use crate::speedlimit::{bound_from_series, SpeedLimitReport};

#[derive(Clone, Debug)]
pub struct CsvReport {
    pub report: SpeedLimitReport,
    pub degeneracy_flags: usize,
}

pub fn report_from_csv(path: &Path) -> Result<CsvReport> {
    let file = read_series(path)?;
    Ok(CsvReport {
        report: bound_from_series(&file.series, file.distance, file.hbar)?,
        degeneracy_flags: file.degeneracy_flags,
    })
}
