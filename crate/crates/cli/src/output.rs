//! File writers. Everything is written with LF line endings and a fixed
//! float format so that repeated runs produce identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use warpflow_core::DiagnosticsRecord;

use crate::commands::ProfileRow;
use crate::error::CliError;

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn csv_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v:e}");
    }
    out.push('\n');
}

pub fn write_trace(path: &Path, trace: &[DiagnosticsRecord]) -> Result<(), CliError> {
    let mut out = DiagnosticsRecord::COLUMNS.join(",");
    out.push('\n');
    for rec in trace {
        csv_row(&mut out, &rec.values());
    }
    write_text(path, &out)
}

pub fn write_profile(path: &Path, rows: &[ProfileRow]) -> Result<(), CliError> {
    let mut out = String::from("s,A,W,Q,xi1_residual,xi0_residual\n");
    for r in rows {
        csv_row(
            &mut out,
            &[
                r.s,
                r.area,
                r.weighted_volume,
                r.q,
                r.xi1_residual,
                r.xi0_residual,
            ],
        );
    }
    write_text(path, &out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}
