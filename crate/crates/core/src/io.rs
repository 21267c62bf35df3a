//! Text formats for matrices, vectors, index lists and images.
//!
//! * Real matrices: CSV, one row per line, no header.
//! * Complex matrices: same layout, entries written `a+bi` / `a-bi`.
//! * Vectors: one value per line (a single CSV row is also accepted).
//! * Index lists: one integer per line.
//! * Binary grids: rows of space-separated `0`/`1`.
//! * Grayscale images: plain PGM (`P2`, maxval 255).

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measurement::{ComplexMatrix, RealMatrix};

/// A parsed measurement matrix, real or complex.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixFile {
    Real(RealMatrix),
    Complex(ComplexMatrix),
}

fn csv_records(text: &str) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push(record.iter().map(str::to_owned).collect());
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix file".into()));
    }
    Ok(rows)
}

fn parse_real(token: &str) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| Error::Parse(format!("invalid number `{token}`")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("non-finite value `{token}`")));
    }
    Ok(v)
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_complex(token: &str) -> Result<Complex64> {
    let t = token.trim();
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return Ok(Complex64::new(parse_real(t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_real(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => parse_real(s.strip_prefix('+').unwrap_or(s))?,
    };
    Ok(Complex64::new(re, im))
}

pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

pub fn parse_real_matrix(text: &str) -> Result<RealMatrix> {
    let rows = csv_records(text)?;
    let parsed: Vec<Vec<f64>> =
        rows.iter().map(|r| r.iter().map(|t| parse_real(t)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
    RealMatrix::from_rows(&parsed)
}

pub fn parse_complex_matrix(text: &str) -> Result<ComplexMatrix> {
    let rows = csv_records(text)?;
    let parsed: Vec<Vec<Complex64>> =
        rows.iter().map(|r| r.iter().map(|t| parse_complex(t)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
    ComplexMatrix::from_rows(&parsed)
}

/// Parses a matrix file, treating it as complex if any entry carries an
/// imaginary unit.
pub fn parse_matrix(text: &str) -> Result<MatrixFile> {
    if text.contains(['i', 'j']) {
        Ok(MatrixFile::Complex(parse_complex_matrix(text)?))
    } else {
        Ok(MatrixFile::Real(parse_real_matrix(text)?))
    }
}

fn flatten_vector<T: Copy>(rows: Vec<Vec<T>>) -> Result<Vec<T>> {
    if rows.len() == 1 || rows.iter().all(|r| r.len() == 1) {
        Ok(rows.concat())
    } else {
        Err(Error::Parse("vector file must be a single row or a single column".into()))
    }
}

pub fn parse_real_vector(text: &str) -> Result<Vec<f64>> {
    let rows = csv_records(text)?;
    flatten_vector(rows.iter().map(|r| r.iter().map(|t| parse_real(t)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?)
}

pub fn parse_complex_vector(text: &str) -> Result<Vec<Complex64>> {
    let rows = csv_records(text)?;
    flatten_vector(rows.iter().map(|r| r.iter().map(|t| parse_complex(t)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?)
}

pub fn format_real_matrix(m: &RealMatrix) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(f64::to_string).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

pub fn format_complex_matrix(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|&z| format_complex(z)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

/// One value per line.
pub fn format_real_vector(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}\n")).collect()
}

pub fn format_complex_vector(v: &[Complex64]) -> String {
    v.iter().map(|&z| format_complex(z) + "\n").collect()
}

pub fn parse_index_list(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.parse::<usize>().map_err(|_| Error::Parse(format!("invalid index `{l}`"))))
        .collect()
}

pub fn format_index_list(idx: &[usize]) -> String {
    idx.iter().map(|i| format!("{i}\n")).collect()
}

/// Parses a rectangular grid of space-separated `0`/`1` tokens.
pub fn parse_binary_grid(text: &str) -> Result<RealMatrix> {
    let mut rows = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| match t {
                "0" => Ok(0.0),
                "1" => Ok(1.0),
                other => Err(Error::Parse(format!("line {}: expected 0 or 1, got `{other}`", line_no + 1))),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty grid".into()));
    }
    RealMatrix::from_rows(&rows).map_err(|_| Error::Parse("grid rows have different lengths".into()))
}

/// Writes a grid, printing each entry as `1` when it is at least 0.5.
pub fn format_binary_grid(m: &RealMatrix) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let line: Vec<&str> = row.iter().map(|&v| if v >= 0.5 { "1" } else { "0" }).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

/// Plain PGM with values clamped to `[0, 1]` and scaled to `0..=255`.
pub fn format_pgm(m: &RealMatrix) -> String {
    let mut out = format!("P2\n{} {}\n255\n", m.cols(), m.rows());
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|&v| ((v.clamp(0.0, 1.0) * 255.0).round() as u8).to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}
