//! Versioned diagnostics CSV.
//!
//! ```text
//! # vns diagnostics schema=1 version=0.1.0 config_sha256=<hex> epsilon=0.5 tau_blend=quintic_smoothstep
//! t,energy,...
//! 0.0000000000000000e0,...
//! ```
//!
//! Absent optional values are empty cells.

use std::fmt::Write as _;
use std::path::Path;

use crate::diagnostics::{DiagnosticsRecord, RECORD_COLUMNS};
use crate::error::{Error, Result};

pub const CSV_SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct CsvHeader {
    pub schema: u32,
    pub version: String,
    pub config_sha256: String,
    pub epsilon: f64,
    pub tau_blend: String,
}

impl CsvHeader {
    pub fn new(config_sha256: &str, epsilon: f64) -> Self {
        CsvHeader {
            schema: CSV_SCHEMA,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: config_sha256.to_string(),
            epsilon,
            tau_blend: super::TAU_BLEND.to_string(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "# vns diagnostics schema={} version={} config_sha256={} epsilon={} tau_blend={}",
            self.schema, self.version, self.config_sha256, self.epsilon, self.tau_blend
        )
    }

    fn parse(line: &str) -> Result<Self> {
        let rest = line
            .strip_prefix("# vns diagnostics")
            .ok_or_else(|| Error::InvalidArgument("missing diagnostics header line".into()))?;
        let mut h = CsvHeader {
            schema: 0,
            version: String::new(),
            config_sha256: String::new(),
            epsilon: f64::NAN,
            tau_blend: String::new(),
        };
        for tok in rest.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("bad header token `{tok}`")))?;
            let bad = || Error::InvalidArgument(format!("bad header value `{tok}`"));
            match k {
                "schema" => h.schema = v.parse().map_err(|_| bad())?,
                "version" => h.version = v.into(),
                "config_sha256" => h.config_sha256 = v.into(),
                "epsilon" => h.epsilon = v.parse().map_err(|_| bad())?,
                "tau_blend" => h.tau_blend = v.into(),
                _ => {}
            }
        }
        if h.schema != CSV_SCHEMA {
            return Err(Error::InvalidArgument(format!(
                "unsupported diagnostics schema {}, expected {CSV_SCHEMA}",
                h.schema
            )));
        }
        Ok(h)
    }
}

/// 17 significant digits, round-trip exact.
pub(crate) fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn diagnostics_csv(header: &CsvHeader, records: &[DiagnosticsRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", header.line());
    let _ = writeln!(out, "{}", RECORD_COLUMNS.join(","));
    for r in records {
        push_row(&mut out, r);
    }
    out
}

pub(crate) fn push_row(out: &mut String, r: &DiagnosticsRecord) {
    let row: Vec<String> = r
        .values()
        .iter()
        .map(|v| v.map(fmt_value).unwrap_or_default())
        .collect();
    let _ = writeln!(out, "{}", row.join(","));
}

pub fn write_diagnostics_csv(path: &Path, header: &CsvHeader, records: &[DiagnosticsRecord]) -> Result<()> {
    std::fs::write(path, diagnostics_csv(header, records))?;
    Ok(())
}

pub fn parse_diagnostics_csv(text: &str) -> Result<(CsvHeader, Vec<DiagnosticsRecord>)> {
    let mut lines = text.lines();
    let header = CsvHeader::parse(lines.next().unwrap_or(""))?;
    let cols = lines.next().unwrap_or("");
    if cols != RECORD_COLUMNS.join(",") {
        return Err(Error::InvalidArgument("column row does not match this schema".into()));
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let values = line
            .split(',')
            .map(|c| {
                if c.is_empty() {
                    Ok(None)
                } else {
                    c.parse::<f64>()
                        .map(Some)
                        .map_err(|_| Error::InvalidArgument(format!("row {}: bad number `{c}`", i + 1)))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        records.push(DiagnosticsRecord::from_values(header.epsilon, &values)?);
    }
    Ok((header, records))
}

pub fn read_diagnostics_csv(path: &Path) -> Result<(CsvHeader, Vec<DiagnosticsRecord>)> {
    parse_diagnostics_csv(&std::fs::read_to_string(path)?)
}
