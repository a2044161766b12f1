//! Serialization of intervals and experiment reports.
//!
//! Three formats: `csv` (header plus one record per row), `json`
//! (newline-delimited objects, one per row, same field names as the CSV
//! columns), and `human` (aligned text). Machine formats carry 12
//! significant digits so serialized values round-trip through f64 without
//! masking solver residuals; the human format trims to 6.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::harness::{CoverageReport, TailCheckReport, TailSide};
use crate::limits::ConfidenceInterval;

pub const MACHINE_DIGITS: usize = 12;
pub const HUMAN_DIGITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Human,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Human => "human",
        }
    }

    fn digits(self) -> usize {
        match self {
            OutputFormat::Human => HUMAN_DIGITS,
            _ => MACHINE_DIGITS,
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "human" => Ok(OutputFormat::Human),
            other => Err(format!(
                "unknown format '{other}'; expected csv, json, or human"
            )),
        }
    }
}

/// Formats to `digits` significant digits, positional notation where the
/// exponent allows it and scientific otherwise, trailing zeros trimmed.
pub fn format_sig(value: f64, digits: usize) -> String {
    debug_assert!(digits >= 1);
    if value == 0.0 {
        return "0".to_owned();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    // Let the formatter do the significant-digit rounding, then read the
    // decided exponent back; this keeps carry cases (0.99999 -> 1) honest.
    let scientific = format!("{:.*e}", digits - 1, value);
    let (mantissa, exponent) = scientific.split_once('e').expect("e-notation");
    let exponent: i32 = exponent.parse().expect("numeric exponent");
    if exponent < -4 || exponent >= digits as i32 {
        format!("{}e{exponent}", trim_decimals(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        trim_decimals(&format!("{value:.decimals$}")).to_owned()
    }
}

fn trim_decimals(text: &str) -> &str {
    if text.contains('.') {
        text.trim_end_matches('0').trim_end_matches('.')
    } else {
        text
    }
}

enum Field {
    Text(String),
    Count(u64),
    Real(f64),
    /// A real that may be absent (a skipped analytic bound).
    MissingReal(Option<f64>),
    Flag(bool),
}

impl Field {
    fn plain(&self, digits: usize) -> String {
        match self {
            Field::Text(s) => s.clone(),
            Field::Count(v) => v.to_string(),
            Field::Real(v) => format_sig(*v, digits),
            Field::MissingReal(Some(v)) => format_sig(*v, digits),
            Field::MissingReal(None) => String::new(),
            Field::Flag(v) => v.to_string(),
        }
    }

    fn json(&self, digits: usize) -> String {
        match self {
            Field::Text(s) => json_string(s),
            Field::Count(v) => v.to_string(),
            Field::Real(v) if v.is_finite() => format_sig(*v, digits),
            Field::Real(_) => "null".to_owned(),
            Field::MissingReal(Some(v)) if v.is_finite() => format_sig(*v, digits),
            Field::MissingReal(_) => "null".to_owned(),
            Field::Flag(v) => v.to_string(),
        }
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

type Row = Vec<(&'static str, Field)>;

fn render(rows: &[Row], format: OutputFormat) -> String {
    let digits = format.digits();
    match format {
        OutputFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            if let Some(first) = rows.first() {
                writer
                    .write_record(first.iter().map(|(key, _)| *key))
                    .expect("in-memory csv");
            }
            for row in rows {
                writer
                    .write_record(row.iter().map(|(_, field)| field.plain(digits)))
                    .expect("in-memory csv");
            }
            String::from_utf8(writer.into_inner().expect("in-memory csv")).expect("utf8 csv")
        }
        OutputFormat::Json => {
            let mut out = String::new();
            for row in rows {
                out.push('{');
                for (i, (key, field)) in row.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    let _ = write!(out, "{}:{}", json_string(key), field.json(digits));
                }
                out.push_str("}\n");
            }
            out
        }
        OutputFormat::Human => {
            let Some(first) = rows.first() else {
                return String::new();
            };
            let mut widths: Vec<usize> = first.iter().map(|(key, _)| key.len()).collect();
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(i, (_, field))| {
                            let text = match field {
                                Field::MissingReal(None) => "-".to_owned(),
                                other => other.plain(digits),
                            };
                            widths[i] = widths[i].max(text.len());
                            text
                        })
                        .collect()
                })
                .collect();
            let mut out = String::new();
            let emit = |out: &mut String, items: Vec<(usize, &str)>| {
                for (i, (width, text)) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str("  ");
                    }
                    let _ = write!(out, "{text:<width$}");
                }
                while out.ends_with(' ') {
                    out.pop();
                }
                out.push('\n');
            };
            emit(
                &mut out,
                first
                    .iter()
                    .enumerate()
                    .map(|(i, (key, _))| (widths[i], *key))
                    .collect(),
            );
            for row in &cells {
                emit(
                    &mut out,
                    row.iter()
                        .enumerate()
                        .map(|(i, text)| (widths[i], text.as_str()))
                        .collect(),
                );
            }
            out
        }
    }
}

/// Rows for the `ci` and `table` commands:
/// `method,n,gamma,delta,lower,upper,width,residual,iterations`.
pub fn render_intervals(intervals: &[ConfidenceInterval], format: OutputFormat) -> String {
    let rows: Vec<Row> = intervals
        .iter()
        .map(|ci| {
            vec![
                ("method", Field::Text(ci.method.as_str().to_owned())),
                ("n", Field::Count(ci.n)),
                ("gamma", Field::Real(ci.gamma)),
                ("delta", Field::Real(ci.delta)),
                ("lower", Field::Real(ci.lower)),
                ("upper", Field::Real(ci.upper)),
                ("width", Field::Real(ci.width())),
                ("residual", Field::Real(ci.diagnostics.residual)),
                (
                    "iterations",
                    Field::Count(u64::from(ci.diagnostics.iterations)),
                ),
            ]
        })
        .collect();
    render(&rows, format)
}

/// Rows for the `simulate` command:
/// `method,gamma,delta,dist,trials,seed,coverage,coverage_stderr,mean_n,mean_n_stderr,pass`.
/// The human format appends the over-coverage margin, which the machine
/// schema leaves derivable from `coverage` and `delta`.
pub fn render_coverage(report: &CoverageReport, format: OutputFormat) -> String {
    let rows: Vec<Row> = report
        .cells
        .iter()
        .map(|cell| {
            let mut row = vec![
                ("method", Field::Text(cell.method.as_str().to_owned())),
                ("gamma", Field::Real(cell.gamma)),
                ("delta", Field::Real(cell.delta)),
                ("dist", Field::Text(cell.dist.to_string())),
                ("trials", Field::Count(u64::from(cell.trials))),
                ("seed", Field::Count(cell.master_seed)),
                ("coverage", Field::Real(cell.coverage)),
                ("coverage_stderr", Field::Real(cell.coverage_stderr)),
                ("mean_n", Field::Real(cell.mean_n)),
                ("mean_n_stderr", Field::Real(cell.mean_n_stderr)),
                ("pass", Field::Flag(cell.pass)),
            ];
            if format == OutputFormat::Human {
                row.push(("margin", Field::Real(cell.margin)));
            }
            row
        })
        .collect();
    render(&rows, format)
}

/// Rows for the `tail-check` command, one per epsilon, both tails side by
/// side; a skipped side has an empty bound and status `skipped`.
pub fn render_tail(report: &TailCheckReport, format: OutputFormat) -> String {
    let rows: Vec<Row> = report
        .cells
        .iter()
        .map(|cell| {
            let l: &TailSide = &cell.left;
            let r: &TailSide = &cell.right;
            vec![
                ("dist", Field::Text(cell.dist.to_string())),
                ("gamma", Field::Real(cell.gamma)),
                ("epsilon", Field::Real(cell.epsilon)),
                ("trials", Field::Count(u64::from(cell.trials))),
                ("seed", Field::Count(cell.seed)),
                ("left_threshold", Field::Real(l.threshold)),
                ("left_empirical", Field::Real(l.empirical)),
                ("left_stderr", Field::Real(l.stderr)),
                ("left_bound", Field::MissingReal(l.bound)),
                ("left_status", Field::Text(l.status.as_str().to_owned())),
                ("right_threshold", Field::Real(r.threshold)),
                ("right_empirical", Field::Real(r.empirical)),
                ("right_stderr", Field::Real(r.stderr)),
                ("right_bound", Field::MissingReal(r.bound)),
                ("right_status", Field::Text(r.status.as_str().to_owned())),
            ]
        })
        .collect();
    render(&rows, format)
}
