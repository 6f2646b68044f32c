//! MatrixMarket coordinate/array import and export, for operator debugging.

use super::{CsrMatrix, DenseMatrix, LinalgError};
use std::io::{BufRead, Write};

pub fn write_sparse<W: Write>(w: &mut W, a: &CsrMatrix) -> Result<(), LinalgError> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (r, c, v) in a.entries() {
        writeln!(w, "{} {} {:e}", r + 1, c + 1, v)?;
    }
    Ok(())
}

pub fn read_sparse<R: BufRead>(r: R) -> Result<CsrMatrix, LinalgError> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| LinalgError::Parse("empty file".into()))??;
    if !header.starts_with("%%MatrixMarket matrix coordinate real") {
        return Err(LinalgError::Parse(format!("unsupported header: {header}")));
    }
    let mut dims: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let mut it = line.split_whitespace();
        if dims.is_none() {
            let n: usize = parse(it.next(), "rows")?;
            let m: usize = parse(it.next(), "cols")?;
            let nnz: usize = parse(it.next(), "nnz")?;
            dims = Some((n, m, nnz));
            triplets.reserve(nnz);
        } else {
            let i: usize = parse(it.next(), "row index")?;
            let j: usize = parse(it.next(), "col index")?;
            let v: f64 = parse(it.next(), "value")?;
            triplets.push((i - 1, j - 1, v));
        }
    }
    let (n, m, _) = dims.ok_or_else(|| LinalgError::Parse("missing size line".into()))?;
    Ok(CsrMatrix::from_triplets(n, m, triplets))
}

pub fn write_dense<W: Write>(w: &mut W, a: &DenseMatrix) -> Result<(), LinalgError> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} {}", a.nrows(), a.ncols())?;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            writeln!(w, "{:e}", a.get(i, j))?;
        }
    }
    Ok(())
}

pub fn read_dense<R: BufRead>(r: R) -> Result<DenseMatrix, LinalgError> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| LinalgError::Parse("empty file".into()))??;
    if !header.starts_with("%%MatrixMarket matrix array real") {
        return Err(LinalgError::Parse(format!("unsupported header: {header}")));
    }
    let mut dims: Option<(usize, usize)> = None;
    let mut vals = Vec::new();
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if dims.is_none() {
            let mut it = line.split_whitespace();
            let n: usize = parse(it.next(), "rows")?;
            let m: usize = parse(it.next(), "cols")?;
            dims = Some((n, m));
        } else {
            vals.push(
                line.parse::<f64>()
                    .map_err(|e| LinalgError::Parse(format!("bad value {line}: {e}")))?,
            );
        }
    }
    let (n, m) = dims.ok_or_else(|| LinalgError::Parse("missing size line".into()))?;
    if vals.len() != n * m {
        return Err(LinalgError::Parse(format!(
            "expected {} values, found {}",
            n * m,
            vals.len()
        )));
    }
    let mut a = DenseMatrix::zeros(n, m);
    for j in 0..m {
        for i in 0..n {
            a.set(i, j, vals[j * n + i]);
        }
    }
    Ok(a)
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T, LinalgError>
where
    T::Err: std::fmt::Display,
{
    tok.ok_or_else(|| LinalgError::Parse(format!("missing {what}")))?
        .parse::<T>()
        .map_err(|e| LinalgError::Parse(format!("bad {what}: {e}")))
}
