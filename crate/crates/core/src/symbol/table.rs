//! Per-label symbol tables read from text files.
//!
//! A record is a line holding only the label, followed by the matrix:
//! `d` rows of `d` complex entries for full tables, a single row of `d`
//! diagonal entries for diagonal tables. Entries are written `re+imi`,
//! `re-imi`, `re` or `imi`. Lines starting with `#` are ignored.

use std::collections::HashMap;
use std::path::Path;

use num_complex::Complex64;

use super::{DenseMatrix, MatrixSymbolValue};
use crate::error::{Error, Result};
use crate::geometry::Label;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableKind {
    Diagonal,
    Full,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolTable {
    kind: TableKind,
    entries: HashMap<Label, MatrixSymbolValue>,
}

impl SymbolTable {
    pub fn new(kind: TableKind) -> Self {
        SymbolTable {
            kind,
            entries: HashMap::new(),
        }
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn insert(&mut self, value: MatrixSymbolValue) {
        self.entries.insert(value.label().clone(), value);
    }

    pub fn get(&self, label: &Label) -> Option<&MatrixSymbolValue> {
        self.entries.get(label)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn read(path: &Path, kind: TableKind) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, kind, path)
    }

    pub fn parse(text: &str, kind: TableKind, origin: &Path) -> Result<Self> {
        let mut table = SymbolTable::new(kind);
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        while let Some((line_no, label_line)) = lines.next() {
            let tokens: Vec<&str> = label_line.split_whitespace().collect();
            if tokens.len() != 1 {
                return Err(Error::parse(origin, line_no, "expected a label line with a single token"));
            }
            let label: Label = tokens[0].parse().map_err(|e: String| Error::parse(origin, line_no, e))?;
            if table.entries.contains_key(&label) {
                return Err(Error::parse(origin, line_no, format!("duplicate label {label}")));
            }

            let (first_no, first) = lines
                .next()
                .ok_or_else(|| Error::parse(origin, line_no, format!("label {label} has no matrix rows")))?;
            let first_row = parse_row(first, origin, first_no)?;
            let d = first_row.len();
            let value = match kind {
                TableKind::Diagonal => MatrixSymbolValue::diagonal(label, first_row),
                TableKind::Full => {
                    let mut entries = first_row;
                    for r in 1..d {
                        let (no, line) = lines.next().ok_or_else(|| {
                            Error::parse(origin, first_no + r, format!("label {label}: expected {d} rows"))
                        })?;
                        let row = parse_row(line, origin, no)?;
                        if row.len() != d {
                            return Err(Error::parse(
                                origin,
                                no,
                                format!("label {label}: row has {} entries, expected {d}", row.len()),
                            ));
                        }
                        entries.extend(row);
                    }
                    MatrixSymbolValue::dense(label, DenseMatrix::from_rows(d, entries))
                }
            };
            table.insert(value);
        }
        Ok(table)
    }

    /// Text form readable by [`SymbolTable::parse`], entries sorted by label.
    pub fn to_text(&self) -> String {
        let mut labels: Vec<&Label> = self.entries.keys().collect();
        labels.sort();
        let mut out = String::new();
        for label in labels {
            let v = &self.entries[label];
            out.push_str(&format!("{label}\n"));
            let d = v.dim();
            let rows = match self.kind {
                TableKind::Diagonal => vec![(0..d).map(|i| v.entry(i, i)).collect::<Vec<_>>()],
                TableKind::Full => (0..d).map(|i| (0..d).map(|j| v.entry(i, j)).collect()).collect(),
            };
            for row in rows {
                let cells: Vec<String> = row.iter().map(|z| format_complex(*z)).collect();
                out.push_str(&cells.join(" "));
                out.push('\n');
            }
        }
        out
    }
}

fn parse_row(line: &str, origin: &Path, line_no: usize) -> Result<Vec<Complex64>> {
    line.split_whitespace()
        .map(|t| parse_complex(t).ok_or_else(|| Error::parse(origin, line_no, format!("invalid complex entry `{t}`"))))
        .collect()
}

/// Parses `re+imi`, `re-imi`, `re`, `imi`, `i`, `-i`.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    // Split at the last sign that is not the leading one and not an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().ok()?,
    };
    Some(Complex64::new(re.parse::<f64>().ok()?, im))
}

/// Writes `re+imi` with 17 significant digits.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.16e}{sign}{:.16e}i", z.re, z.im.abs())
}
