//! Matrix Market `array real general` files.
//!
//! Values are written column-major, one per line, in Rust's shortest
//! round-trip scientific notation, so a write/read cycle is bit-exact and
//! writing the same matrix twice gives byte-identical files.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use super::{ArrayError, DenseArray, ListArray, SmallDense, VectorArray, VectorSpace};

pub const HEADER: &str = "%%MatrixMarket matrix array real general";

#[derive(Debug, Error)]
pub enum MmError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported Matrix Market header: {0}")]
    Header(String),
    #[error(transparent)]
    Array(#[from] ArrayError),
}

fn parse_err(line: usize, msg: impl Into<String>) -> MmError {
    MmError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Reads the size line and all values (column-major).
pub fn parse(reader: impl BufRead) -> Result<(usize, usize, Vec<f64>), MmError> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => l?,
        None => return Err(MmError::Header(String::new())),
    };
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens != ["%%matrixmarket", "matrix", "array", "real", "general"] {
        return Err(MmError::Header(header));
    }

    let mut size: Option<(usize, usize)> = None;
    let mut values = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        match size {
            None => {
                let mut it = trimmed.split_whitespace();
                let m = it
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| parse_err(lineno, "expected row count"))?;
                let n = it
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| parse_err(lineno, "expected column count"))?;
                if it.next().is_some() {
                    return Err(parse_err(lineno, "size line has extra fields"));
                }
                values.reserve(m * n);
                size = Some((m, n));
            }
            Some(_) => {
                for tok in trimmed.split_whitespace() {
                    let v = tok
                        .parse::<f64>()
                        .map_err(|_| parse_err(lineno, format!("bad value {tok:?}")))?;
                    values.push(v);
                }
            }
        }
    }
    let (m, n) = size.ok_or_else(|| parse_err(0, "missing size line"))?;
    if values.len() != m * n {
        return Err(parse_err(
            0,
            format!("expected {} values, found {}", m * n, values.len()),
        ));
    }
    Ok((m, n, values))
}

/// Writes header, comment lines, size line and values.
pub fn write_columns<'a, W, I>(
    mut w: W,
    nrows: usize,
    ncols: usize,
    comments: &[String],
    columns: I,
) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a [f64]>,
{
    writeln!(w, "{HEADER}")?;
    for c in comments {
        writeln!(w, "% {c}")?;
    }
    writeln!(w, "{nrows} {ncols}")?;
    for col in columns {
        for v in col {
            writeln!(w, "{v:e}")?;
        }
    }
    w.flush()
}

/// Loading and saving of whole arrays.
pub trait MatrixMarket: Sized {
    fn read_mm(reader: impl BufRead) -> Result<Self, MmError>;

    fn write_mm(&self, writer: impl Write, comments: &[String]) -> io::Result<()>;

    fn load(path: impl AsRef<Path>) -> Result<Self, MmError> {
        Self::read_mm(BufReader::new(File::open(path)?))
    }

    fn save(&self, path: impl AsRef<Path>, comments: &[String]) -> Result<(), MmError> {
        self.write_mm(BufWriter::new(File::create(path)?), comments)?;
        Ok(())
    }
}

fn read_array<V: VectorArray>(reader: impl BufRead) -> Result<V, MmError> {
    let (m, n, values) = parse(reader)?;
    let space = VectorSpace::new(m)?;
    if n == 0 {
        return Ok(V::zeros(space, 0));
    }
    Ok(V::from_columns(space, values.chunks(m))?)
}

impl MatrixMarket for DenseArray {
    fn read_mm(reader: impl BufRead) -> Result<Self, MmError> {
        read_array(reader)
    }

    fn write_mm(&self, writer: impl Write, comments: &[String]) -> io::Result<()> {
        let (r, c) = (self.dim(), self.len());
        write_columns(writer, r, c, comments, self.as_slice().chunks(r))
    }
}

impl MatrixMarket for ListArray {
    fn read_mm(reader: impl BufRead) -> Result<Self, MmError> {
        read_array(reader)
    }

    fn write_mm(&self, writer: impl Write, comments: &[String]) -> io::Result<()> {
        write_columns(
            writer,
            self.dim(),
            self.len(),
            comments,
            self.vectors().iter().map(|v| v.as_slice()),
        )
    }
}

impl MatrixMarket for SmallDense {
    fn read_mm(reader: impl BufRead) -> Result<Self, MmError> {
        let (m, n, values) = parse(reader)?;
        Ok(SmallDense::from_vec(m, n, values))
    }

    fn write_mm(&self, writer: impl Write, comments: &[String]) -> io::Result<()> {
        let (r, c) = (self.nrows(), self.ncols());
        write_columns(writer, r, c, comments, self.as_slice().chunks(r.max(1)))
    }
}
