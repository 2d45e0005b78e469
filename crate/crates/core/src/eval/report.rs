use std::io::Write;

use serde::{Deserialize, Serialize};

/// One line of an evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub attribute: String,
    pub method: String,
    pub metric: String,
    /// Empty in CSV when the metric is undefined.
    pub value: Option<f64>,
    pub n_pairs: u64,
    pub n_skipped: u64,
}

pub fn write_report_csv<W: Write>(w: W, rows: &[ReportRow]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
