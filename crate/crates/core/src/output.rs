//! CSV result files and gnuplot scripts.
//!
//! A result file is a block of `#`-prefixed header lines followed by the
//! column header `x_m,value` (plus `,stderr` when errors are present) and
//! one row per grid point. Numbers are written in plain decimal notation
//! with nine significant digits; lines end in LF.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::correlation::CorrelationCurve;
use crate::error::{Error, Result};

pub const SIGNIFICANT_DIGITS: usize = 9;

/// Plain decimal rendering of `v` with `digits` significant digits
/// (no exponent).
pub fn format_decimal(v: f64, digits: usize) -> String {
    assert!(digits >= 1, "at least one significant digit");
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent formatting");
    let exponent: i64 = exponent.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let mantissa_digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let point = exponent + 1;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-point) as usize));
        out.push_str(&mantissa_digits);
    } else if point as usize >= mantissa_digits.len() {
        out.push_str(&mantissa_digits);
        out.extend(std::iter::repeat_n('0', point as usize - mantissa_digits.len()));
    } else {
        let (int, frac) = mantissa_digits.split_at(point as usize);
        out.push_str(int);
        out.push('.');
        out.push_str(frac);
    }
    out
}

fn fmt(v: f64) -> String {
    format_decimal(v, SIGNIFICANT_DIGITS)
}

/// Renders a curve as CSV text. Each header line is written as `# line`.
pub fn curve_to_csv(curve: &CorrelationCurve, header: &[String]) -> String {
    let mut out = String::new();
    for line in header {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            let _ = writeln!(out, "# {line}");
        }
    }
    let stderr = curve.stderr();
    out.push_str(if stderr.is_some() {
        "x_m,value,stderr\n"
    } else {
        "x_m,value\n"
    });
    for (i, (&x, &v)) in curve.positions().iter().zip(curve.values()).enumerate() {
        match stderr {
            Some(e) => {
                let _ = writeln!(out, "{},{},{}", fmt(x), fmt(v), fmt(e[i]));
            }
            None => {
                let _ = writeln!(out, "{},{}", fmt(x), fmt(v));
            }
        }
    }
    out
}

/// Parsed contents of a result file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    /// Header lines with the leading `# ` removed.
    pub header: Vec<String>,
    pub x: Vec<f64>,
    pub value: Vec<f64>,
    pub stderr: Option<Vec<f64>>,
}

impl CsvTable {
    /// Value of a `key = value` header line, if present.
    pub fn header_value(&self, key: &str) -> Option<&str> {
        self.header.iter().find_map(|line| {
            let (k, v) = line.split_once('=')?;
            (k.trim() == key).then(|| v.trim())
        })
    }
}

pub fn parse_csv(text: &str) -> Result<CsvTable> {
    let mut header = Vec::new();
    let mut columns: Option<usize> = None;
    let mut table = CsvTable {
        header: Vec::new(),
        x: Vec::new(),
        value: Vec::new(),
        stderr: None,
    };
    for (index, line) in text.lines().enumerate() {
        let line_no = index + 1;
        if let Some(rest) = line.strip_prefix('#') {
            if columns.is_some() {
                return Err(Error::Csv(format!(
                    "line {line_no}: header line after the column header"
                )));
            }
            header.push(rest.strip_prefix(' ').unwrap_or(rest).to_string());
            continue;
        }
        match columns {
            None => {
                columns = Some(match line {
                    "x_m,value" => 2,
                    "x_m,value,stderr" => {
                        table.stderr = Some(Vec::new());
                        3
                    }
                    other => {
                        return Err(Error::Csv(format!(
                            "line {line_no}: unexpected column header `{other}`"
                        )))
                    }
                })
            }
            Some(n) => {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != n {
                    return Err(Error::Csv(format!(
                        "line {line_no}: expected {n} fields, found {}",
                        fields.len()
                    )));
                }
                let parse = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Csv(format!("line {line_no}: `{s}` is not a number")))
                };
                table.x.push(parse(fields[0])?);
                table.value.push(parse(fields[1])?);
                if let Some(e) = table.stderr.as_mut() {
                    e.push(parse(fields[2])?);
                }
            }
        }
    }
    if columns.is_none() {
        return Err(Error::Csv("missing column header".to_string()));
    }
    table.header = header;
    Ok(table)
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory followed by a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// One curve referenced by a plot script.
#[derive(Debug, Clone)]
pub struct PlotEntry {
    pub csv_file: String,
    pub title: String,
    pub ylabel: String,
}

/// gnuplot script plotting each CSV into its own PNG next to it.
pub fn gnuplot_script(entries: &[PlotEntry]) -> String {
    let mut s = String::new();
    s.push_str("# gnuplot script; run with `gnuplot <this file>` from the output directory\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set datafile commentschars '#'\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("unset key\n");
    s.push_str("set grid\n");
    s.push_str("set xlabel 'x (mm)'\n");
    s.push_str("set terminal pngcairo size 800,500\n");
    for e in entries {
        let png = match e.csv_file.strip_suffix(".csv") {
            Some(stem) => format!("{stem}.png"),
            None => format!("{}.png", e.csv_file),
        };
        let _ = writeln!(s, "\nset output '{png}'");
        let _ = writeln!(s, "set title '{}'", e.title.replace('\'', "''"));
        let _ = writeln!(s, "set ylabel '{}'", e.ylabel.replace('\'', "''"));
        let _ = writeln!(s, "plot '{}' using ($1*1000):2 with lines lw 2", e.csv_file);
    }
    s.push_str("\nunset output\n");
    s
}
