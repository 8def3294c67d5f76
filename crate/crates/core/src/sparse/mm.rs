//! Matrix Market reader and writer (real `coordinate` and `array` formats).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(line: &str) -> Result<(Layout, Symmetry)> {
    let toks: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" {
        return Err(parse_err(1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    if toks[1] != "matrix" {
        return Err(Error::UnsupportedFormat(format!("object '{}'", toks[1])));
    }
    let layout = match toks[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(1, format!("unknown format '{other}'"))),
    };
    match toks[3].as_str() {
        "real" | "double" | "integer" => {}
        "pattern" | "complex" => {
            return Err(Error::UnsupportedFormat(format!("field '{}'", toks[3])))
        }
        other => return Err(parse_err(1, format!("unknown field '{other}'"))),
    }
    let sym = match toks[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        "hermitian" => return Err(Error::UnsupportedFormat("symmetry 'hermitian'".into())),
        other => return Err(parse_err(1, format!("unknown symmetry '{other}'"))),
    };
    if layout == Layout::Array && sym == Symmetry::Skew {
        return Err(Error::UnsupportedFormat("skew-symmetric array storage".into()));
    }
    Ok((layout, sym))
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let t = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    t.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} '{t}'")))
}

/// Parses Matrix Market text. Symmetric storage is expanded and duplicate
/// coordinate entries are summed.
pub fn parse_matrix_market<R: Read>(reader: R) -> Result<CsrMatrix> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let (layout, sym) = parse_header(&header?)?;

    let mut body = lines.filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('%') => None,
        Ok(s) => Some(Ok((i + 1, s))),
        Err(e) => Some(Err(e)),
    });
    let (size_line, size) = body.next().ok_or_else(|| parse_err(1, "missing size line"))??;
    let mut it = size.split_whitespace();
    let nrows: usize = num(it.next(), size_line, "row count")?;
    let ncols: usize = num(it.next(), size_line, "column count")?;
    let expected: usize = match layout {
        Layout::Coordinate => num(it.next(), size_line, "entry count")?,
        Layout::Array => match sym {
            Symmetry::General => nrows * ncols,
            _ => nrows * (nrows + 1) / 2,
        },
    };
    if it.next().is_some() {
        return Err(parse_err(size_line, "trailing tokens on size line"));
    }
    if sym != Symmetry::General && nrows != ncols {
        return Err(parse_err(size_line, "symmetric storage requires a square matrix"));
    }

    let mut trip = Vec::with_capacity(expected * if sym == Symmetry::General { 1 } else { 2 });
    let mut push = |i: usize, j: usize, v: f64| {
        trip.push((i, j, v));
        if i != j {
            match sym {
                Symmetry::General => {}
                Symmetry::Symmetric => trip.push((j, i, v)),
                Symmetry::Skew => trip.push((j, i, -v)),
            }
        }
    };
    let mut count = 0usize;
    // array layout walks columns, lower triangle only when symmetric
    let (mut ai, mut aj) = (0usize, 0usize);
    let mut last_line = size_line;
    for item in body {
        let (ln, s) = item?;
        last_line = ln;
        if count == expected {
            return Err(parse_err(ln, "more entries than declared"));
        }
        let mut t = s.split_whitespace();
        match layout {
            Layout::Coordinate => {
                let i: usize = num(t.next(), ln, "row index")?;
                let j: usize = num(t.next(), ln, "column index")?;
                let v: f64 = num(t.next(), ln, "value")?;
                if i == 0 || j == 0 || i > nrows || j > ncols {
                    return Err(parse_err(ln, format!("index ({i}, {j}) out of range")));
                }
                if sym != Symmetry::General && j > i {
                    return Err(parse_err(ln, "upper-triangle entry in symmetric storage"));
                }
                if sym == Symmetry::Skew && i == j {
                    return Err(parse_err(ln, "diagonal entry in skew-symmetric storage"));
                }
                push(i - 1, j - 1, v);
            }
            Layout::Array => {
                let v: f64 = num(t.next(), ln, "value")?;
                push(ai, aj, v);
                ai += 1;
                if ai == nrows {
                    aj += 1;
                    ai = if sym == Symmetry::General { 0 } else { aj };
                }
            }
        }
        if t.next().is_some() {
            return Err(parse_err(ln, "trailing tokens"));
        }
        count += 1;
    }
    if count != expected {
        return Err(parse_err(
            last_line,
            format!("expected {expected} entries, found {count}"),
        ));
    }
    CsrMatrix::from_triplets(nrows, ncols, &trip)
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    parse_matrix_market(File::open(path)?)
}

/// Writes `m` in coordinate general format. Values use Rust's shortest
/// round-trip formatting, so reading the file back is bitwise exact.
pub fn write_matrix_market(path: impl AsRef<Path>, m: &CsrMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.nrows(), m.ncols(), m.nnz())?;
    for (i, j, v) in m.triplets() {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a vector as an `n x 1` array-format file.
pub fn write_vector_market(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} 1", v.len())?;
    for x in v {
        writeln!(w, "{x:e}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a single-column Matrix Market file as a vector.
pub fn read_vector_market(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let m = read_matrix_market(path)?;
    if m.ncols() != 1 {
        return Err(Error::Usage(format!(
            "expected a single column, found {} columns",
            m.ncols()
        )));
    }
    let mut out = vec![0.0; m.nrows()];
    for (i, _, v) in m.triplets() {
        out[i] = v;
    }
    Ok(out)
}
