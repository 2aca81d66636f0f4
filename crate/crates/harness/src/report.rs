//! Sweep reports and their CSV / JSON serializations.
//!
//! CSV output carries only the rows (header plus data, RFC 4180 quoting)
//! and is byte-identical across runs of the same configuration. JSON
//! carries the full report; `runtime_ms` is the one field that varies
//! between runs and is excluded from equality.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv parse error at line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("report invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportMetadata {
    pub experiment: String,
    pub artifact_version: String,
    pub grid: String,
    /// Complete configuration echo; a report can be reproduced from it.
    pub config: BTreeMap<String, String>,
    /// Wall-clock milliseconds; informational only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepRow {
    /// Fractional order or scale the row belongs to.
    pub order: f64,
    pub metric: String,
    pub value: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn new(metadata: ReportMetadata, mut rows: Vec<SweepRow>) -> Result<Self, ReportError> {
        rows.sort_by(|a, b| {
            a.order
                .partial_cmp(&b.order)
                .unwrap()
                .then_with(|| a.metric.cmp(&b.metric))
        });
        let report = SweepReport { metadata, rows };
        report.check()?;
        Ok(report)
    }

    pub fn check(&self) -> Result<(), ReportError> {
        for row in &self.rows {
            if !row.value.is_finite() {
                return Err(ReportError::Invariant(format!(
                    "non-finite value in row `{}` at order {}",
                    row.metric, row.order
                )));
            }
        }
        if self.rows.windows(2).any(|w| w[1].order < w[0].order) {
            return Err(ReportError::Invariant("rows not sorted by order".into()));
        }
        Ok(())
    }

    /// Equality that ignores the wall-clock field.
    pub fn same_content(&self, other: &SweepReport) -> bool {
        let mut a = self.clone();
        let mut b = other.clone();
        a.metadata.runtime_ms = None;
        b.metadata.runtime_ms = None;
        a == b
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("order,metric,value,error_estimate\r\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\r\n",
                fmt_float(row.order),
                csv_quote(&row.metric),
                fmt_float(row.value),
                fmt_float(row.error_estimate)
            ));
        }
        out
    }

    pub fn from_csv(text: &str, metadata: ReportMetadata) -> Result<Self, ReportError> {
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if idx == 0 || line.trim().is_empty() {
                continue;
            }
            let fields = split_csv_line(line).map_err(|msg| ReportError::Csv {
                line: idx + 1,
                msg,
            })?;
            if fields.len() != 4 {
                return Err(ReportError::Csv {
                    line: idx + 1,
                    msg: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let num = |s: &str| {
                s.parse::<f64>().map_err(|_| ReportError::Csv {
                    line: idx + 1,
                    msg: format!("`{s}` is not a number"),
                })
            };
            rows.push(SweepRow {
                order: num(&fields[0])?,
                metric: fields[1].clone(),
                value: num(&fields[2])?,
                error_estimate: num(&fields[3])?,
            });
        }
        SweepReport::new(metadata, rows)
    }

    pub fn to_json(&self) -> Result<String, ReportError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let report: SweepReport = serde_json::from_str(text)?;
        report.check()?;
        Ok(report)
    }
}

/// Shortest round-trip decimal form; NaN is written as `nan` (only error
/// estimates of truncated operators carry it).
fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

fn csv_quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn split_csv_line(line: &str) -> Result<Vec<String>, String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut chars = line.trim_end_matches('\r').chars().peekable();
    let mut quoted = false;
    while let Some(c) = chars.next() {
        if quoted {
            if c == '"' {
                if chars.peek() == Some(&'"') {
                    cur.push('"');
                    chars.next();
                } else {
                    quoted = false;
                }
            } else {
                cur.push(c);
            }
        } else {
            match c {
                '"' if cur.is_empty() => quoted = true,
                ',' => {
                    fields.push(std::mem::take(&mut cur));
                }
                _ => cur.push(c),
            }
        }
    }
    if quoted {
        return Err("unterminated quote".into());
    }
    fields.push(cur);
    Ok(fields)
}

/// Write a plain point-value CSV (`t[,x2[,x3]],value[,extra]`), used by the
/// operator subcommands.
pub fn write_points_csv(
    header: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push_str("\r\n");
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| fmt_float(*v)).collect();
        out.push_str(&line.join(","));
        out.push_str("\r\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> ReportMetadata {
        ReportMetadata {
            experiment: "test".into(),
            artifact_version: "0.0.0".into(),
            grid: "[-1, 1] x 11".into(),
            config: BTreeMap::new(),
            runtime_ms: Some(3),
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let report = SweepReport::new(meta(), vec![]).unwrap();
        assert_eq!(report.to_csv(), "order,metric,value,error_estimate\r\n");
    }

    #[test]
    fn three_rows_make_four_lines() {
        let rows = (1..=3)
            .map(|k| SweepRow {
                order: k as f64 / 10.0,
                metric: "err".into(),
                value: k as f64,
                error_estimate: 0.0,
            })
            .collect();
        let report = SweepReport::new(meta(), rows).unwrap();
        assert_eq!(report.to_csv().lines().count(), 4);
    }

    #[test]
    fn json_round_trip_is_idempotent() {
        let rows = vec![
            SweepRow { order: 0.5, metric: "a,b".into(), value: 1.25, error_estimate: 1e-9 },
            SweepRow { order: 0.9, metric: "c".into(), value: -2.0, error_estimate: 0.0 },
        ];
        let report = SweepReport::new(meta(), rows).unwrap();
        let once = report.to_json().unwrap();
        let parsed = SweepReport::from_json(&once).unwrap();
        let twice = parsed.to_json().unwrap();
        assert_eq!(once, twice);
        assert!(report.same_content(&parsed));
    }

    #[test]
    fn csv_round_trip_preserves_rows() {
        let rows = vec![SweepRow {
            order: 0.1,
            metric: "quoted,metric \"x\"".into(),
            value: 0.333333333333333314829616256247,
            error_estimate: 1e-300,
        }];
        let report = SweepReport::new(meta(), rows).unwrap();
        let csv = report.to_csv();
        let parsed = SweepReport::from_csv(&csv, meta()).unwrap();
        assert!(report.same_content(&parsed));
        // and the emitted text is stable under a second pass
        assert_eq!(csv, parsed.to_csv());
    }

    #[test]
    fn rows_are_sorted_and_finite() {
        let rows = vec![
            SweepRow { order: 0.9, metric: "b".into(), value: 1.0, error_estimate: 0.0 },
            SweepRow { order: 0.1, metric: "a".into(), value: 2.0, error_estimate: 0.0 },
        ];
        let report = SweepReport::new(meta(), rows).unwrap();
        assert!(report.rows[0].order < report.rows[1].order);
        let bad = vec![SweepRow {
            order: 0.5,
            metric: "x".into(),
            value: f64::INFINITY,
            error_estimate: 0.0,
        }];
        assert!(SweepReport::new(meta(), bad).is_err());
    }
}
