//! Matrix files: a JSON document with `[re, im]` entry pairs and the Matrix
//! Market exchange format (array and coordinate layouts).

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::ComplexMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    Json,
    #[serde(rename = "mm")]
    MatrixMarket,
}

impl MatrixFormat {
    /// Guesses the format from the first non-blank bytes.
    pub fn sniff(source: &[u8]) -> Self {
        let text = source.iter().skip_while(|b| b.is_ascii_whitespace());
        if text.take(14).copied().eq(b"%%MatrixMarket".iter().copied()) {
            MatrixFormat::MatrixMarket
        } else {
            MatrixFormat::Json
        }
    }
}

/// A matrix together with its optional name and the file it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixDocument {
    pub matrix: ComplexMatrix,
    pub name: Option<String>,
    pub source: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
}

impl MatrixDocument {
    pub fn new(matrix: ComplexMatrix) -> Self {
        Self {
            matrix,
            name: None,
            source: None,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn parse(source: &[u8], format: MatrixFormat) -> Result<Self> {
        match format {
            MatrixFormat::Json => parse_json(source),
            MatrixFormat::MatrixMarket => parse_matrix_market(source),
        }
    }

    /// Reads a file, sniffing its format, and records the path as `source`.
    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::Parse {
            line: 0,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        let mut doc = Self::parse(&bytes, MatrixFormat::sniff(&bytes))?;
        doc.source.get_or_insert_with(|| path.display().to_string());
        Ok(doc)
    }

    pub fn serialize(&self, format: MatrixFormat) -> String {
        match format {
            MatrixFormat::Json => serde_json::to_string(&self.to_json()).expect("matrix documents always serialize"),
            MatrixFormat::MatrixMarket => self.to_matrix_market(),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_json()).expect("matrix documents always serialize")
    }

    fn to_json(&self) -> JsonMatrix {
        JsonMatrix {
            rows: self.matrix.rows(),
            cols: self.matrix.cols(),
            entries: self.matrix.to_row_major().iter().map(|z| [z.re, z.im]).collect(),
            name: self.name.clone(),
            source: self.source.clone(),
        }
    }

    fn to_matrix_market(&self) -> String {
        let m = &self.matrix;
        let mut out = String::from("%%MatrixMarket matrix array complex general\n");
        for (key, value) in [("name", &self.name), ("source", &self.source)] {
            if let Some(v) = value {
                out.push_str(&format!("% {key}: {v}\n"));
            }
        }
        out.push_str(&format!("{} {}\n", m.rows(), m.cols()));
        for j in 0..m.cols() {
            for i in 0..m.rows() {
                let z = m.get(i, j);
                // `{:e}` prints the shortest digits that parse back exactly
                out.push_str(&format!("{:e} {:e}\n", z.re, z.im));
            }
        }
        out
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn require_nonempty(rows: usize, cols: usize, line: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(parse_err(line, format!("matrix must be at least 1x1, got {rows}x{cols}")));
    }
    Ok(())
}

fn parse_json(source: &[u8]) -> Result<MatrixDocument> {
    let doc: JsonMatrix = serde_json::from_slice(source).map_err(|e| parse_err(e.line(), e.to_string()))?;
    require_nonempty(doc.rows, doc.cols, 1)?;
    let entries = doc.entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
    Ok(MatrixDocument {
        matrix: ComplexMatrix::from_row_major(doc.rows, doc.cols, entries)?,
        name: doc.name,
        source: doc.source,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
    Integer,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

impl Symmetry {
    /// Value mirrored into `(j, i)` from a stored `(i, j)`, `i != j`.
    fn mirror(self, z: Complex64) -> Option<Complex64> {
        match self {
            Symmetry::General => None,
            Symmetry::Symmetric => Some(z),
            Symmetry::SkewSymmetric => Some(-z),
            Symmetry::Hermitian => Some(z.conj()),
        }
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next line that is neither blank nor a comment, with its 1-based number.
    fn next_data(&mut self) -> Option<(usize, &'a str)> {
        self.inner
            .by_ref()
            .map(|(i, l)| (i + 1, l.trim()))
            .find(|(_, l)| !l.is_empty() && !l.starts_with('%'))
    }
}

fn numbers<T: std::str::FromStr>(line: usize, text: &str, want: usize) -> Result<Vec<T>> {
    let out: Vec<T> = text
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(line, format!("cannot read number `{t}`"))))
        .collect::<Result<_>>()?;
    if out.len() != want {
        return Err(parse_err(line, format!("expected {want} values, found {}", out.len())));
    }
    Ok(out)
}

fn scalar(line: usize, text: &str, field: Field) -> Result<Complex64> {
    match field {
        Field::Complex => {
            let v: Vec<f64> = numbers(line, text, 2)?;
            Ok(Complex64::new(v[0], v[1]))
        }
        Field::Real => Ok(Complex64::new(numbers::<f64>(line, text, 1)?[0], 0.0)),
        Field::Integer => Ok(Complex64::new(numbers::<i64>(line, text, 1)?[0] as f64, 0.0)),
    }
}

fn parse_matrix_market(source: &[u8]) -> Result<MatrixDocument> {
    let text = std::str::from_utf8(source).map_err(|e| parse_err(0, format!("not UTF-8: {e}")))?;
    let header = text.lines().next().unwrap_or_default();
    let words: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(1, "expected `%%MatrixMarket matrix <layout> <field> <symmetry>`"));
    }
    let dense = match words[2].as_str() {
        "array" => true,
        "coordinate" => false,
        other => return Err(parse_err(1, format!("unknown layout `{other}`"))),
    };
    let field = match words[3].as_str() {
        "complex" => Field::Complex,
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        other => return Err(parse_err(1, format!("unsupported field `{other}`"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(1, format!("unknown symmetry `{other}`"))),
    };
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return Err(parse_err(1, "hermitian symmetry needs complex entries"));
    }

    let mut name = None;
    let mut path = None;
    for l in text.lines().skip(1).take_while(|l| l.trim_start().starts_with('%')) {
        let body = l.trim_start().trim_start_matches('%').trim_start();
        if let Some(v) = body.strip_prefix("name: ") {
            name = Some(v.to_string());
        } else if let Some(v) = body.strip_prefix("source: ") {
            path = Some(v.to_string());
        }
    }

    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (size_line, size) = lines.next_data().ok_or_else(|| parse_err(1, "missing size line"))?;
    let (rows, cols, nnz) = if dense {
        let v: Vec<usize> = numbers(size_line, size, 2)?;
        (v[0], v[1], None)
    } else {
        let v: Vec<usize> = numbers(size_line, size, 3)?;
        (v[0], v[1], Some(v[2]))
    };
    require_nonempty(rows, cols, size_line)?;
    if symmetry != Symmetry::General && rows != cols {
        return Err(parse_err(size_line, "symmetric layouts need a square matrix"));
    }

    let mut m = ComplexMatrix::zeros(rows, cols);
    let mut put = |i: usize, j: usize, z: Complex64, line: usize| -> Result<()> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(parse_err(line, "non-finite entry"));
        }
        m.set(i, j, z);
        if i != j {
            if let Some(mz) = symmetry.mirror(z) {
                m.set(j, i, mz);
            }
        }
        Ok(())
    };

    let mut last_line = size_line;
    match nnz {
        None => {
            // column-major; symmetric layouts store the lower triangle only
            let mut slots = Vec::new();
            for j in 0..cols {
                let first = match symmetry {
                    Symmetry::General => 0,
                    Symmetry::SkewSymmetric => j + 1,
                    _ => j,
                };
                slots.extend((first..rows).map(|i| (i, j)));
            }
            let per_entry = if field == Field::Complex { 2 } else { 1 };
            let mut pending: Vec<&str> = Vec::new();
            let mut slot = slots.iter();
            while let Some(&(i, j)) = slot.next() {
                while pending.len() < per_entry {
                    let (n, l) = lines.next_data().ok_or_else(|| {
                        parse_err(last_line, format!("expected {} entries, input ended early", slots.len()))
                    })?;
                    last_line = n;
                    pending.extend(l.split_whitespace().rev());
                }
                let tokens: Vec<&str> = (0..per_entry).filter_map(|_| pending.pop()).collect();
                put(i, j, scalar(last_line, &tokens.join(" "), field)?, last_line)?;
            }
            if !pending.is_empty() {
                return Err(Error::Shape {
                    rows,
                    cols,
                    found: slots.len() + pending.len() / per_entry,
                });
            }
        }
        Some(nnz) => {
            let mut seen = std::collections::BTreeSet::new();
            for k in 0..nnz {
                let (n, l) = lines
                    .next_data()
                    .ok_or_else(|| parse_err(last_line, format!("expected {nnz} entries, found {k}")))?;
                last_line = n;
                let tokens: Vec<&str> = l.split_whitespace().collect();
                if tokens.len() < 3 {
                    return Err(parse_err(n, "expected `row col value`"));
                }
                let index = |t: &str, bound: usize| -> Result<usize> {
                    let v: usize = t.parse().map_err(|_| parse_err(n, format!("bad index `{t}`")))?;
                    if v == 0 || v > bound {
                        return Err(parse_err(n, format!("index {v} outside 1..={bound}")));
                    }
                    Ok(v - 1)
                };
                let (i, j) = (index(tokens[0], rows)?, index(tokens[1], cols)?);
                if !seen.insert((i, j)) {
                    return Err(parse_err(n, format!("duplicate entry ({}, {})", i + 1, j + 1)));
                }
                put(i, j, scalar(n, &tokens[2..].join(" "), field)?, n)?;
            }
        }
    }
    if let Some((n, _)) = lines.next_data() {
        let found = nnz.map_or(rows * cols + 1, |k| k + 1);
        return Err(match nnz {
            None => Error::Shape { rows, cols, found },
            Some(_) => parse_err(n, "more entries than declared"),
        });
    }
    Ok(MatrixDocument {
        matrix: m,
        name,
        source: path,
    })
}
