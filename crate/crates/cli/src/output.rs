use std::io::Write;

use serde::Serialize;

use crate::config::Format;
use crate::run::RunOutput;

#[derive(Serialize)]
struct EstimateRow<'a> {
    method: &'a str,
    estimate: f64,
    stderr: f64,
    replicates: u64,
    /// Compact JSON, as in the JSON report.
    window: String,
    diagnostics: String,
    seed: u64,
    wall_time_ms: f64,
    warnings: String,
}

#[derive(Serialize)]
struct CheckRow<'a> {
    identity: &'a str,
    check: &'a str,
    lhs: f64,
    rhs: f64,
    z_score: f64,
    pass: bool,
}

/// Writes the results as pretty JSON or as CSV (one row per method, or per
/// identity check for `verify`).
pub fn write_output<W: Write>(out: &RunOutput, format: Format, w: W) -> std::io::Result<()> {
    match format {
        Format::Json => {
            let mut w = w;
            serde_json::to_writer_pretty(&mut w, out)?;
            writeln!(w)
        }
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            if out.verify.is_empty() {
                for r in &out.reports {
                    csv.serialize(EstimateRow {
                        method: &r.report.method,
                        estimate: r.report.estimate,
                        stderr: r.report.stderr,
                        replicates: r.report.replicates,
                        window: r.report.window.as_ref().map(serde_json::to_string).transpose()?.unwrap_or_default(),
                        diagnostics: serde_json::to_string(&r.report.diagnostics)?,
                        seed: r.seed,
                        wall_time_ms: r.wall_time_ms,
                        warnings: r.report.warnings.join("; "),
                    })?;
                }
            } else {
                for v in &out.verify {
                    for c in &v.suite.reports {
                        csv.serialize(CheckRow {
                            identity: &v.identity,
                            check: &c.name,
                            lhs: c.lhs.estimate,
                            rhs: c.rhs.estimate,
                            z_score: c.z_score,
                            pass: c.pass,
                        })?;
                    }
                }
            }
            csv.flush()
        }
    }
}
