//! Report rendering.
//!
//! CSV output is one comment line (configuration echo), a header, and one
//! row per kept sample.  Floats are written with Rust's shortest-roundtrip
//! formatting and rows follow the sample-stream order, so the bytes depend
//! only on the run parameters — never on thread count or scheduling.  The
//! thread count is deliberately left out of the comment line for the same
//! reason.

use super::ExperimentReport;
use std::fmt::Write as _;

pub(super) fn to_csv(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# lochslab v{} kind={} beta={} n={} samples={} seed={} bits={}",
        report.version,
        report.kind,
        report.beta,
        report.n,
        report.samples,
        report.seed,
        report.precision_bits,
    );
    out.push_str("index");
    for c in &report.columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for r in &report.records {
        let _ = write!(out, "{}", r.index);
        for c in &report.columns {
            out.push(',');
            if let Some(v) = r.values.get(c) {
                let _ = write!(out, "{v}");
            }
        }
        out.push('\n');
    }
    out
}
