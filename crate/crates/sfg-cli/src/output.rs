//! Deterministic artifact writers.
//!
//! CSV files carry one header row, LF line endings and full-precision
//! scientific floats (17 significant digits), so identical runs produce
//! byte-identical files. JSON summaries are serialized from fixed-order
//! structs for the same reason.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sfg_core::filter::MatchedFilterOutput;
use sfg_core::lockin::ScanResult;

use crate::error::{CliError, CliResult};

/// 17 significant digits: enough to round-trip any f64.
pub fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn write_scan_csv(path: &Path, scan: &ScanResult) -> CliResult<()> {
    let mut out = String::with_capacity(scan.parameters.len() * 120 + 64);
    out.push_str("parameter,demod_signal,rf_power,stimulated_term,spontaneous_term\n");
    for (value, result) in scan.parameters.iter().zip(&scan.results) {
        out.push_str(&format_float(*value));
        out.push(',');
        out.push_str(&format_float(result.demodulated_signal));
        out.push(',');
        out.push_str(&format_float(result.rf_power));
        out.push(',');
        out.push_str(&format_float(result.stimulated_term));
        out.push(',');
        out.push_str(&format_float(result.spontaneous_term));
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn write_su11_csv(path: &Path, offsets: &[f64], intensities: &[f64]) -> CliResult<()> {
    let mut out = String::with_capacity(offsets.len() * 50 + 32);
    out.push_str("offset_hz,intensity\n");
    for (offset, intensity) in offsets.iter().zip(intensities) {
        out.push_str(&format_float(*offset));
        out.push(',');
        out.push_str(&format_float(*intensity));
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn write_matched_filter_csv(path: &Path, output: &MatchedFilterOutput) -> CliResult<()> {
    let mut out = String::with_capacity(output.offsets.len() * 80 + 48);
    out.push_str("offset,correlation_re,correlation_im\n");
    for (offset, value) in output.offsets.iter().zip(&output.correlation) {
        out.push_str(&format_float(*offset));
        out.push(',');
        out.push_str(&format_float(value.re));
        out.push(',');
        out.push_str(&format_float(value.im));
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_file(path, &text)
}
