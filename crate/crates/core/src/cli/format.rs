//! Matrix and factorization files.
//!
//! Both are JSON documents whose numbers are written with 17 significant
//! digits (`{:.16e}`), so every `f64` survives a write/read cycle and
//! re-serialization is byte-stable. Matrix input may also be a plain
//! whitespace-separated grid, one row per line, with `n` taken from the
//! number of rows.

use std::fmt::Write as _;

use serde_json::{Map, Value};
use thiserror::Error;

use crate::automorphism::{CanonicalFactorization, CompactFactorization};
use crate::matrix::DenseMatrix;
use crate::DEFAULT_TOL;

/// Structural problems in an input file. Rows and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("input is empty")]
    Empty,
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("field `{field}`: {reason}")]
    Field { field: &'static str, reason: String },
    #[error("{field}: found {found} rows, expected {expected}")]
    RowCount { field: &'static str, found: usize, expected: usize },
    #[error("{field}: row {row} has {found} entries, expected {expected}")]
    RowLength { field: &'static str, row: usize, found: usize, expected: usize },
    #[error("{field}: row {row}, column {col}: {reason}")]
    Entry { field: &'static str, row: usize, col: usize, reason: String },
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix, FormatError> {
    let trimmed = text.trim_start();
    if trimmed.is_empty() {
        return Err(FormatError::Empty);
    }
    if trimmed.starts_with('{') {
        parse_matrix_json(trimmed)
    } else {
        parse_matrix_grid(trimmed)
    }
}

fn parse_matrix_json(text: &str) -> Result<DenseMatrix, FormatError> {
    let doc = parse_object(text)?;
    let n = get_usize(&doc, "n")?;
    if n == 0 {
        return Err(FormatError::Field { field: "n", reason: "must be positive".into() });
    }
    let data = doc.get("data").ok_or(FormatError::MissingField("data"))?;
    matrix_from_value("data", data, Some(n))
}

fn parse_matrix_grid(text: &str) -> Result<DenseMatrix, FormatError> {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    let n = lines.len();
    let mut data = Vec::with_capacity(n * n);
    for (i, line) in lines.iter().enumerate() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != n {
            return Err(FormatError::RowLength {
                field: "grid",
                row: i + 1,
                found: tokens.len(),
                expected: n,
            });
        }
        for (j, tok) in tokens.iter().enumerate() {
            let v: f64 = tok.parse().map_err(|_| FormatError::Entry {
                field: "grid",
                row: i + 1,
                col: j + 1,
                reason: format!("invalid number `{tok}`"),
            })?;
            if !v.is_finite() {
                return Err(FormatError::Entry {
                    field: "grid",
                    row: i + 1,
                    col: j + 1,
                    reason: format!("non-finite value `{tok}`"),
                });
            }
            data.push(v);
        }
    }
    Ok(DenseMatrix::new(n, n, data).expect("shape and finiteness checked"))
}

pub fn write_matrix(m: &DenseMatrix) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"n\": {},", m.nrows());
    out.push_str("  \"data\": ");
    write_rows(&mut out, m);
    out.push_str("\n}\n");
    out
}

/// A factorization together with the tolerance its orthogonal factors
/// are validated against.
#[derive(Debug, Clone, PartialEq)]
pub enum Factorization {
    Canonical(CanonicalFactorization),
    Compact(CompactFactorization),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationFile {
    pub factorization: Factorization,
    pub tol: f64,
    /// Reconstruction residual recorded by `factor`; informational on input.
    pub residual: Option<f64>,
}

impl Factorization {
    pub fn dim(&self) -> usize {
        match self {
            Factorization::Canonical(f) => f.dim(),
            Factorization::Compact(f) => f.dim(),
        }
    }

    pub fn form(&self) -> &'static str {
        match self {
            Factorization::Canonical(_) => "canonical",
            Factorization::Compact(_) => "compact",
        }
    }
}

pub fn write_factorization(file: &FactorizationFile) -> String {
    let mut out = String::from("{\n");
    let f = &file.factorization;
    let _ = writeln!(out, "  \"form\": \"{}\",", f.form());
    let _ = writeln!(out, "  \"n\": {},", f.dim());
    let _ = writeln!(out, "  \"tol\": {},", fmt_f64(file.tol));
    match f {
        Factorization::Canonical(c) => {
            let _ = writeln!(out, "  \"nu\": {},", fmt_f64(c.nu));
            let _ = writeln!(out, "  \"alpha\": {},", fmt_f64(c.alpha));
            out.push_str("  \"V\": ");
            write_rows(&mut out, &c.v);
            out.push_str(",\n  \"U\": ");
            write_rows(&mut out, &c.u);
        }
        Factorization::Compact(c) => {
            let _ = writeln!(out, "  \"nu\": {},", fmt_f64(c.nu));
            let entries: Vec<String> = c.c.iter().map(|v| fmt_f64(*v)).collect();
            let _ = writeln!(out, "  \"c\": [{}],", entries.join(", "));
            out.push_str("  \"U\": ");
            write_rows(&mut out, &c.u);
        }
    }
    if let Some(r) = file.residual {
        let _ = write!(out, ",\n  \"residual\": {}", fmt_f64(r));
    }
    out.push_str("\n}\n");
    out
}

pub fn parse_factorization(text: &str) -> Result<FactorizationFile, FormatError> {
    if text.trim().is_empty() {
        return Err(FormatError::Empty);
    }
    let doc = parse_object(text)?;
    let form = doc
        .get("form")
        .ok_or(FormatError::MissingField("form"))?
        .as_str()
        .ok_or_else(|| FormatError::Field { field: "form", reason: "expected a string".into() })?;
    let nu = get_f64(&doc, "nu")?;
    let tol = match doc.get("tol") {
        Some(_) => get_f64(&doc, "tol")?,
        None => DEFAULT_TOL,
    };
    if !(tol >= 0.0) {
        return Err(FormatError::Field { field: "tol", reason: "must be non-negative".into() });
    }
    let residual = match doc.get("residual") {
        Some(_) => Some(get_f64(&doc, "residual")?),
        None => None,
    };
    let declared_n = match doc.get("n") {
        Some(_) => Some(get_usize(&doc, "n")?),
        None => None,
    };
    let side = declared_n.map(|n| n.saturating_sub(1));
    let u_value = doc.get("U").ok_or(FormatError::MissingField("U"))?;
    let u = matrix_from_value("U", u_value, side)?;

    let factorization = match form {
        "canonical" => {
            let alpha = get_f64(&doc, "alpha")?;
            let v_value = doc.get("V").ok_or(FormatError::MissingField("V"))?;
            let v = matrix_from_value("V", v_value, Some(u.nrows()))?;
            Factorization::Canonical(CanonicalFactorization { nu, alpha, v, u })
        }
        "compact" => {
            let c = vector_from_value("c", doc.get("c").ok_or(FormatError::MissingField("c"))?)?;
            if c.len() != u.nrows() {
                return Err(FormatError::Field {
                    field: "c",
                    reason: format!("has {} entries, expected {}", c.len(), u.nrows()),
                });
            }
            Factorization::Compact(CompactFactorization { nu, c, u })
        }
        other => {
            return Err(FormatError::Field {
                field: "form",
                reason: format!("expected `canonical` or `compact`, got `{other}`"),
            })
        }
    };
    Ok(FactorizationFile { factorization, tol, residual })
}

fn write_rows(out: &mut String, m: &DenseMatrix) {
    out.push_str("[\n");
    let rows: Vec<String> = m
        .rows()
        .map(|r| {
            let entries: Vec<String> = r.iter().map(|v| fmt_f64(*v)).collect();
            format!("    [{}]", entries.join(", "))
        })
        .collect();
    out.push_str(&rows.join(",\n"));
    out.push_str("\n  ]");
}

fn parse_object(text: &str) -> Result<Map<String, Value>, FormatError> {
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(FormatError::Json("top level must be an object".into())),
        Err(e) => Err(FormatError::Json(e.to_string())),
    }
}

fn get_f64(doc: &Map<String, Value>, field: &'static str) -> Result<f64, FormatError> {
    doc.get(field)
        .ok_or(FormatError::MissingField(field))?
        .as_f64()
        .filter(|v| v.is_finite())
        .ok_or_else(|| FormatError::Field { field, reason: "expected a finite number".into() })
}

fn get_usize(doc: &Map<String, Value>, field: &'static str) -> Result<usize, FormatError> {
    doc.get(field)
        .ok_or(FormatError::MissingField(field))?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| FormatError::Field {
            field,
            reason: "expected a non-negative integer".into(),
        })
}

fn vector_from_value(field: &'static str, value: &Value) -> Result<Vec<f64>, FormatError> {
    let items = value
        .as_array()
        .ok_or_else(|| FormatError::Field { field, reason: "expected an array".into() })?;
    items
        .iter()
        .enumerate()
        .map(|(j, v)| {
            v.as_f64().ok_or_else(|| FormatError::Entry {
                field,
                row: 1,
                col: j + 1,
                reason: "expected a number".into(),
            })
        })
        .collect()
}

/// Reads a square array of arrays; `side` fixes the expected size.
fn matrix_from_value(
    field: &'static str,
    value: &Value,
    side: Option<usize>,
) -> Result<DenseMatrix, FormatError> {
    let rows = value
        .as_array()
        .ok_or_else(|| FormatError::Field { field, reason: "expected an array of rows".into() })?;
    let n = side.unwrap_or(rows.len());
    if rows.len() != n {
        return Err(FormatError::RowCount { field, found: rows.len(), expected: n });
    }
    if n == 0 {
        return Err(FormatError::Field { field, reason: "matrix is empty".into() });
    }
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        let entries = row.as_array().ok_or_else(|| FormatError::Entry {
            field,
            row: i + 1,
            col: 1,
            reason: "row is not an array".into(),
        })?;
        if entries.len() != n {
            return Err(FormatError::RowLength { field, row: i + 1, found: entries.len(), expected: n });
        }
        for (j, v) in entries.iter().enumerate() {
            let x = v.as_f64().ok_or_else(|| FormatError::Entry {
                field,
                row: i + 1,
                col: j + 1,
                reason: "expected a number".into(),
            })?;
            data.push(x);
        }
    }
    DenseMatrix::new(n, n, data).map_err(|e| FormatError::Field { field, reason: e.to_string() })
}
