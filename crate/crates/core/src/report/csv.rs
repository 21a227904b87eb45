use std::fmt::Write;

use thiserror::Error;

use crate::model::{Strategy, Variant};
use crate::runner::SweepRow;
use crate::solver::SolveStatus;

pub const CSV_HEADER: &str = "variant,strategy,workload_mips,status,total_w,processing_w,networking_w,alloc_cc,alloc_lf,alloc_nf,alloc_vf1,alloc_vf2,alloc_vf3,alloc_vf4,bb_nodes,runtime_ms";

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("csv: {0}")]
    Read(#[from] ::csv::Error),
    #[error("line {line}: header mismatch")]
    Header { line: u64 },
    #[error("line {line}, column {column}: {message}")]
    Field {
        line: u64,
        column: &'static str,
        message: String,
    },
}

/// Six significant digits, printf `%g` style: fixed notation for decimal
/// exponents in [-4, 6), scientific otherwise, trailing zeros dropped.
pub fn format_real(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        let fixed = format!("{v:.decimals$}");
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt_real(v: Option<f64>) -> String {
    v.map(format_real).unwrap_or_default()
}

/// Header plus one line per row, `\n` terminated.
pub fn emit_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(128 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.variant.as_str(),
            r.strategy.as_str(),
            format_real(r.workload_mips),
            r.status.as_str(),
            opt_real(r.total_w),
            opt_real(r.processing_w),
            opt_real(r.networking_w),
            format_real(r.alloc_cc),
            format_real(r.alloc_lf),
            format_real(r.alloc_nf),
            format_real(r.alloc_vf[0]),
            format_real(r.alloc_vf[1]),
            format_real(r.alloc_vf[2]),
            format_real(r.alloc_vf[3]),
            r.bb_nodes,
            format_real(r.runtime_ms),
        );
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>, CsvError> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(CsvError::Header { line: 1 });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let bad = |column: &'static str, message: String| CsvError::Field {
            line,
            column,
            message,
        };
        let real = |i: usize, column: &'static str| -> Result<f64, CsvError> {
            field(i)
                .parse::<f64>()
                .map_err(|e| bad(column, format!("{e}: {:?}", field(i))))
        };
        let opt = |i: usize, column: &'static str| -> Result<Option<f64>, CsvError> {
            if field(i).is_empty() {
                Ok(None)
            } else {
                real(i, column).map(Some)
            }
        };
        rows.push(SweepRow {
            variant: Variant::parse(field(0))
                .ok_or_else(|| bad("variant", format!("unknown {:?}", field(0))))?,
            strategy: Strategy::parse(field(1))
                .ok_or_else(|| bad("strategy", format!("unknown {:?}", field(1))))?,
            workload_mips: real(2, "workload_mips")?,
            status: SolveStatus::parse(field(3))
                .ok_or_else(|| bad("status", format!("unknown {:?}", field(3))))?,
            total_w: opt(4, "total_w")?,
            processing_w: opt(5, "processing_w")?,
            networking_w: opt(6, "networking_w")?,
            alloc_cc: real(7, "alloc_cc")?,
            alloc_lf: real(8, "alloc_lf")?,
            alloc_nf: real(9, "alloc_nf")?,
            alloc_vf: [
                real(10, "alloc_vf1")?,
                real(11, "alloc_vf2")?,
                real(12, "alloc_vf3")?,
                real(13, "alloc_vf4")?,
            ],
            bb_nodes: field(14)
                .parse()
                .map_err(|e| bad("bb_nodes", format!("{e}: {:?}", field(14))))?,
            runtime_ms: real(15, "runtime_ms")?,
        });
    }
    Ok(rows)
}
