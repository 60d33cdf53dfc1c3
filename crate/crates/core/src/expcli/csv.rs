//! Metric CSV files: `#` header lines, one column-name row, one row per
//! recorded iteration. Missing values are empty cells.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::metrics::{MetricRow, COLUMNS};

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.16e}"))
}

pub fn write_rows(header: &[String], rows: &[MetricRow]) -> String {
    let mut out = String::new();
    for line in header {
        for part in line.lines() {
            let _ = writeln!(out, "# {part}");
        }
    }
    out.push_str(&COLUMNS.join(","));
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.k,
            cell(Some(r.alpha_k)),
            cell(Some(r.beta_k)),
            cell(Some(r.consensus_err)),
            cell(r.tracking_err),
            cell(r.grad_norm_sq),
            cell(r.opt_gap_avg),
            cell(r.residual_avg)
        );
    }
    out
}

/// Header lines (without the leading `# `) and rows.
pub fn parse_rows(text: &str) -> Result<(Vec<String>, Vec<MetricRow>)> {
    let mut header = Vec::new();
    let mut rows = Vec::new();
    let mut seen_columns = false;
    for (lineno, line) in text.lines().enumerate() {
        let bad = |msg: &str| Error::Parse(format!("line {}: {msg}", lineno + 1));
        if let Some(rest) = line.strip_prefix('#') {
            header.push(rest.strip_prefix(' ').unwrap_or(rest).to_string());
            continue;
        }
        if !seen_columns {
            if line != COLUMNS.join(",") {
                return Err(bad("unexpected column header"));
            }
            seen_columns = true;
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != COLUMNS.len() {
            return Err(bad(&format!("expected {} cells, got {}", COLUMNS.len(), cells.len())));
        }
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(&format!("bad number `{s}`")))
            }
        };
        let req = |s: &str| opt(s)?.ok_or_else(|| bad("required cell is empty"));
        rows.push(MetricRow {
            k: cells[0].parse().map_err(|_| bad("bad k"))?,
            alpha_k: req(cells[1])?,
            beta_k: req(cells[2])?,
            consensus_err: req(cells[3])?,
            tracking_err: opt(cells[4])?,
            grad_norm_sq: opt(cells[5])?,
            opt_gap_avg: opt(cells[6])?,
            residual_avg: opt(cells[7])?,
        });
    }
    if !seen_columns {
        return Err(Error::Parse("no column header".into()));
    }
    Ok((header, rows))
}
