//! Text formats: the `UDMv1` family file, vectors and inline matrices.
//!
//! ```text
//! UDMv1
//! field q=3^1
//! L 4
//! n 3
//! alpha 2
//! matrix 0
//! 1 0 0
//! 0 1 0
//! 0 0 1
//! matrix 1
//! ...
//! ```
//!
//! Blank lines and lines starting with `#` are ignored on input. `alpha` is
//! optional. Rendering is canonical, so `render(parse(render(f)))` equals
//! `render(f)` byte for byte.

use std::fmt::Write as _;

use thiserror::Error;

use crate::gf::{Elem, Field};
use crate::linalg::{FieldMatrix, FieldVector};
use crate::udm::UdmFamily;

pub const FORMAT_TAG: &str = "UDMv1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

pub fn render_family(family: &UdmFamily) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_TAG}");
    let _ = writeln!(out, "field {}", family.field());
    let _ = writeln!(out, "L {}", family.num_channels());
    let _ = writeln!(out, "n {}", family.block_len());
    if let Some(a) = family.alpha() {
        let _ = writeln!(out, "alpha {a}");
    }
    for (l, m) in family.matrices().iter().enumerate() {
        let _ = writeln!(out, "matrix {l}");
        out.push_str(&m.to_string());
        if !out.ends_with('\n') {
            out.push('\n');
        }
    }
    out
}

pub fn parse_family(text: &str) -> Result<UdmFamily, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| err(0, format!("unexpected end of input, expected {what}")))
    };

    let (ln, tag) = next("format tag")?;
    if tag != FORMAT_TAG {
        return Err(err(ln, format!("expected `{FORMAT_TAG}`, found {tag:?}")));
    }
    let (ln, line) = next("field line")?;
    let field: Field = keyed(ln, line, "field")?
        .parse()
        .map_err(|e: crate::gf::FieldError| err(ln, e.to_string()))?;
    let (ln, line) = next("L line")?;
    let channels: usize = parse_num(ln, keyed(ln, line, "L")?)?;
    let (ln, line) = next("n line")?;
    let n: usize = parse_num(ln, keyed(ln, line, "n")?)?;
    if channels == 0 || n == 0 {
        return Err(err(ln, "L and n must be positive"));
    }

    let mut alpha = None;
    let mut pending = Some(next("alpha or matrix line")?);
    if let Some((ln, line)) = pending {
        if let Some(v) = line.strip_prefix("alpha ") {
            alpha = Some(parse_elem(&field, ln, v.trim())?);
            pending = None;
        }
    }

    let mut matrices = Vec::with_capacity(channels);
    for l in 0..channels {
        let (ln, line) = match pending.take() {
            Some(x) => x,
            None => next("matrix line")?,
        };
        let idx: usize = parse_num(ln, keyed(ln, line, "matrix")?)?;
        if idx != l {
            return Err(err(ln, format!("expected matrix {l}, found matrix {idx}")));
        }
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, line) = next("matrix row")?;
            let row = parse_row(&field, ln, line)?;
            if row.len() != n {
                return Err(err(
                    ln,
                    format!("row has {} entries, expected {n}", row.len()),
                ));
            }
            rows.push(row);
        }
        matrices.push(FieldMatrix::from_fn(&field, n, n, |i, j| rows[i][j]));
    }
    if let Some((ln, line)) = lines.next() {
        return Err(err(ln, format!("trailing content {line:?}")));
    }
    let family = UdmFamily::new(&field, matrices).map_err(|e| err(0, e.to_string()))?;
    Ok(family.with_alpha(alpha))
}

fn keyed<'a>(ln: usize, line: &'a str, key: &str) -> Result<&'a str, ParseError> {
    line.strip_prefix(key)
        .filter(|rest| rest.starts_with(char::is_whitespace))
        .map(str::trim)
        .ok_or_else(|| err(ln, format!("expected `{key} <value>`, found {line:?}")))
}

fn parse_num(ln: usize, s: &str) -> Result<usize, ParseError> {
    s.parse().map_err(|_| err(ln, format!("bad integer {s:?}")))
}

fn parse_elem(field: &Field, ln: usize, tok: &str) -> Result<Elem, ParseError> {
    let v: u64 = tok
        .parse()
        .map_err(|_| err(ln, format!("bad element {tok:?}")))?;
    field.element(v).map_err(|e| err(ln, e.to_string()))
}

fn parse_row(field: &Field, ln: usize, line: &str) -> Result<Vec<Elem>, ParseError> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| parse_elem(field, ln, t))
        .collect()
}

/// Space- or comma-separated canonical integers.
pub fn parse_vector(field: &Field, text: &str) -> Result<FieldVector, ParseError> {
    let elems = parse_row(field, 1, text.trim())?;
    Ok(FieldVector::new(field, elems).expect("elements belong to the field"))
}

pub fn render_vector(v: &FieldVector) -> String {
    v.values()
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Rows separated by `;`, entries by whitespace or commas: `1 0;0 1`.
pub fn parse_inline_matrix(field: &Field, text: &str) -> Result<FieldMatrix, ParseError> {
    let rows: Vec<Vec<Elem>> = text
        .split(';')
        .map(|r| parse_row(field, 1, r.trim()))
        .collect::<Result<_, _>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    if cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(err(1, "matrix rows must be non-empty and of equal length"));
    }
    Ok(FieldMatrix::from_fn(field, rows.len(), cols, |i, j| {
        rows[i][j]
    }))
}
