//! Coordinate text formats. Matrix: header `rows cols nnz` followed by
//! `i j re im` lines (0-based). Vector: one `re im` pair per line.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::numkit::{Matrix, NumError, Vector};
use crate::scalar::{Real, C};

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64, NumError> {
    let tok = tok.ok_or_else(|| NumError::Parse { line, msg: "missing field".into() })?;
    tok.parse::<f64>().map_err(|e| NumError::Parse { line, msg: format!("{tok:?}: {e}") })
}

fn parse_usize(tok: Option<&str>, line: usize) -> Result<usize, NumError> {
    let tok = tok.ok_or_else(|| NumError::Parse { line, msg: "missing field".into() })?;
    tok.parse::<usize>().map_err(|e| NumError::Parse { line, msg: format!("{tok:?}: {e}") })
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#') && !l.starts_with('%'))
}

pub fn parse_coo<T: Real>(text: &str) -> Result<Matrix<T>, NumError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| NumError::Parse { line: 0, msg: "empty matrix file".into() })?;
    let mut it = header.split_whitespace();
    let rows = parse_usize(it.next(), hl)?;
    let cols = parse_usize(it.next(), hl)?;
    let nnz = parse_usize(it.next(), hl)?;
    let mut m = Matrix::zeros(rows, cols);
    let mut count = 0;
    for (ln, l) in lines {
        let mut it = l.split_whitespace();
        let i = parse_usize(it.next(), ln)?;
        let j = parse_usize(it.next(), ln)?;
        let re = parse_f64(it.next(), ln)?;
        let im = parse_f64(it.next(), ln)?;
        if i >= rows || j >= cols {
            return Err(NumError::Parse { line: ln, msg: format!("index ({i},{j}) outside {rows}x{cols}") });
        }
        if !re.is_finite() || !im.is_finite() {
            return Err(NumError::Parse { line: ln, msg: "non-finite entry".into() });
        }
        m[(i, j)] += C::new(T::of(re), T::of(im));
        count += 1;
    }
    if count != nnz {
        return Err(NumError::Parse { line: hl, msg: format!("header declares {nnz} entries, found {count}") });
    }
    Ok(m)
}

pub fn parse_vector<T: Real>(text: &str) -> Result<Vector<T>, NumError> {
    let mut data = Vec::new();
    for (ln, l) in content_lines(text) {
        let mut it = l.split_whitespace();
        let re = parse_f64(it.next(), ln)?;
        let im = match it.next() {
            Some(tok) => parse_f64(Some(tok), ln)?,
            None => 0.0,
        };
        data.push(C::new(T::of(re), T::of(im)));
    }
    Vector::new(data)
}

pub fn format_coo<T: Real>(m: &Matrix<T>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {}", m.rows(), m.cols(), m.nnz());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m[(i, j)];
            if z.norm_sqr() > T::zero() {
                let _ = writeln!(s, "{i} {j} {:e} {:e}", z.re.to_f64_lossy(), z.im.to_f64_lossy());
            }
        }
    }
    s
}

pub fn format_vector<T: Real>(v: &Vector<T>) -> String {
    let mut s = String::new();
    for z in v.iter() {
        let _ = writeln!(s, "{:e} {:e}", z.re.to_f64_lossy(), z.im.to_f64_lossy());
    }
    s
}

pub fn read_coo<T: Real>(r: impl BufRead) -> Result<Matrix<T>, NumError> {
    parse_coo(&std::io::read_to_string(r).map_err(|e| NumError::Io(e.to_string()))?)
}

pub fn read_vector<T: Real>(r: impl BufRead) -> Result<Vector<T>, NumError> {
    parse_vector(&std::io::read_to_string(r).map_err(|e| NumError::Io(e.to_string()))?)
}

pub fn write_coo<T: Real>(m: &Matrix<T>, mut w: impl Write) -> Result<(), NumError> {
    w.write_all(format_coo(m).as_bytes()).map_err(|e| NumError::Io(e.to_string()))
}

pub fn write_vector<T: Real>(v: &Vector<T>, mut w: impl Write) -> Result<(), NumError> {
    w.write_all(format_vector(v).as_bytes()).map_err(|e| NumError::Io(e.to_string()))
}
