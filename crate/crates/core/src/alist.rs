//! Alist serialization of parity-check matrices.
//!
//! Layout, one item per line:
//!
//! ```text
//! # swldpc k=<k> design_p=<p>
//! <n_cols> <n_rows>
//! <max column degree> <max row degree>
//! <column degrees>
//! <row degrees>
//! <1-based rows of column 1, zero padded>      (n_cols lines)
//! <1-based columns of row 1, zero padded>      (n_rows lines)
//! ```
//!
//! The comment header is optional on input. Without it, `k` is taken as
//! `n_cols - n_rows` and the design correlation is unknown.

use crate::code::SparseParityMatrix;
use std::io::{self, BufRead, Write};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum AlistError {
    #[error("alist line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A matrix together with the metadata carried in the header comment.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeFile {
    pub matrix: SparseParityMatrix,
    pub design_p: Option<f64>,
}

const MAGIC: &str = "# swldpc";

pub fn write_alist<W: Write>(mut w: W, m: &SparseParityMatrix, design_p: Option<f64>) -> io::Result<()> {
    let cols = m.columns();
    let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = m.rows().iter().map(Vec::len).max().unwrap_or(0);
    match design_p {
        Some(p) => writeln!(w, "{MAGIC} k={} design_p={p}", m.k())?,
        None => writeln!(w, "{MAGIC} k={}", m.k())?,
    }
    writeln!(w, "{} {}", m.n(), m.n_rows())?;
    writeln!(w, "{max_col} {max_row}")?;
    write_line(&mut w, cols.iter().map(Vec::len))?;
    write_line(&mut w, m.rows().iter().map(Vec::len))?;
    for list in &cols {
        write_padded(&mut w, list, max_col)?;
    }
    for list in m.rows() {
        write_padded(&mut w, list, max_row)?;
    }
    Ok(())
}

fn write_padded<W: Write>(w: &mut W, list: &[u32], width: usize) -> io::Result<()> {
    let padded = list
        .iter()
        .map(|&i| i as usize + 1)
        .chain(std::iter::repeat(0))
        .take(width);
    write_line(w, padded)
}

fn write_line<W: Write>(w: &mut W, items: impl Iterator<Item = usize>) -> io::Result<()> {
    let line: Vec<String> = items.map(|v| v.to_string()).collect();
    writeln!(w, "{}", line.join(" "))
}

pub fn to_alist_string(m: &SparseParityMatrix, design_p: Option<f64>) -> String {
    let mut buf = Vec::new();
    write_alist(&mut buf, m, design_p).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("alist output is ASCII")
}

pub fn save_alist(path: impl AsRef<Path>, m: &SparseParityMatrix, design_p: Option<f64>) -> io::Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(f);
    write_alist(&mut w, m, design_p)?;
    w.flush()
}

pub fn load_alist(path: impl AsRef<Path>) -> Result<CodeFile, AlistError> {
    let f = std::fs::File::open(path)?;
    read_alist(io::BufReader::new(f))
}

struct Lines<R> {
    inner: io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn err(&self, msg: impl Into<String>) -> AlistError {
        AlistError::Parse {
            line: self.line_no,
            msg: msg.into(),
        }
    }

    /// Next non-empty line, or an error naming what was expected.
    fn next_line(&mut self, what: &str) -> Result<String, AlistError> {
        loop {
            self.line_no += 1;
            match self.inner.next() {
                None => return Err(self.err(format!("unexpected end of file, expected {what}"))),
                Some(line) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        return Ok(line);
                    }
                }
            }
        }
    }

    fn numbers(&mut self, what: &str, count: Option<usize>) -> Result<Vec<usize>, AlistError> {
        let line = self.next_line(what)?;
        let nums = line
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| self.err(format!("bad integer {t:?} in {what}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(c) = count {
            if nums.len() != c {
                return Err(self.err(format!("{what}: expected {c} entries, found {}", nums.len())));
            }
        }
        Ok(nums)
    }
}

pub fn read_alist<R: BufRead>(r: R) -> Result<CodeFile, AlistError> {
    let mut lines = Lines {
        inner: r.lines(),
        line_no: 0,
    };
    let mut first = lines.next_line("header")?;
    let mut header_k = None;
    let mut design_p = None;
    if first.trim_start().starts_with('#') {
        for tok in first.split_whitespace() {
            if let Some(v) = tok.strip_prefix("k=") {
                header_k = Some(
                    v.parse::<usize>()
                        .map_err(|_| lines.err(format!("bad k {v:?}")))?,
                );
            } else if let Some(v) = tok.strip_prefix("design_p=") {
                design_p = Some(
                    v.parse::<f64>()
                        .map_err(|_| lines.err(format!("bad design_p {v:?}")))?,
                );
            }
        }
        first = lines.next_line("dimensions")?;
    }
    let dims: Vec<usize> = first
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| lines.err(format!("bad dimension {t:?}"))))
        .collect::<Result<_, _>>()?;
    let &[n_cols, n_rows] = &dims[..] else {
        return Err(lines.err("expected `n_cols n_rows`"));
    };
    if n_rows == 0 || n_cols <= n_rows {
        return Err(lines.err(format!("need 0 < n_rows < n_cols, got {n_cols} {n_rows}")));
    }
    let k = n_cols - n_rows;
    if let Some(hk) = header_k {
        if hk != k {
            return Err(AlistError::Parse {
                line: 1,
                msg: format!("header k={hk} disagrees with n_cols - n_rows = {k}"),
            });
        }
    }
    let maxes = lines.numbers("max degrees", Some(2))?;
    let (max_col, max_row) = (maxes[0], maxes[1]);
    let col_deg = lines.numbers("column degrees", Some(n_cols))?;
    if col_deg.iter().any(|&d| d > max_col) {
        return Err(lines.err("column degree exceeds declared maximum"));
    }
    let row_deg = lines.numbers("row degrees", Some(n_rows))?;
    if row_deg.iter().any(|&d| d > max_row) {
        return Err(lines.err("row degree exceeds declared maximum"));
    }

    let mut cols = Vec::with_capacity(n_cols);
    let mut col_lines = Vec::with_capacity(n_cols);
    for (c, &deg) in col_deg.iter().enumerate() {
        let list = read_list(&mut lines, "column", c, deg, max_col, n_rows)?;
        cols.push(list);
        col_lines.push(lines.line_no);
    }
    let mut rows = Vec::with_capacity(n_rows);
    let mut row_lines = Vec::with_capacity(n_rows);
    for (r, &deg) in row_deg.iter().enumerate() {
        let list = read_list(&mut lines, "row", r, deg, max_row, n_cols)?;
        rows.push(list);
        row_lines.push(lines.line_no);
    }

    // cross-check the two views
    let mut from_rows = vec![Vec::new(); n_cols];
    for (r, row) in rows.iter().enumerate() {
        for &c in row {
            from_rows[c as usize].push(r as u32);
        }
    }
    for (c, (a, b)) in cols.iter().zip(&from_rows).enumerate() {
        let mut a = a.clone();
        a.sort_unstable();
        if a != *b {
            return Err(AlistError::Parse {
                line: col_lines[c],
                msg: format!("column {} disagrees with the row lists", c + 1),
            });
        }
    }

    for (r, row) in rows.iter_mut().enumerate() {
        row.sort_unstable();
        let expected = crate::code::staircase_row(k, r);
        let parity: Vec<u32> = row.iter().copied().filter(|&c| c as usize >= k).collect();
        if parity != expected {
            return Err(AlistError::Parse {
                line: row_lines[r],
                msg: format!("row {} violates the staircase parity structure", r + 1),
            });
        }
    }
    let matrix = SparseParityMatrix::from_rows(k, n_cols, rows).map_err(|e| AlistError::Parse {
        line: lines.line_no,
        msg: e.to_string(),
    })?;
    Ok(CodeFile { matrix, design_p })
}

fn read_list<R: BufRead>(
    lines: &mut Lines<R>,
    what: &str,
    idx: usize,
    deg: usize,
    width: usize,
    bound: usize,
) -> Result<Vec<u32>, AlistError> {
    let nums = lines.numbers(what, None)?;
    if nums.len() != width && nums.len() != deg {
        return Err(lines.err(format!(
            "{what} {}: expected {width} entries (or {deg} unpadded), found {}",
            idx + 1,
            nums.len()
        )));
    }
    let (entries, padding) = nums.split_at(deg.min(nums.len()));
    if padding.iter().any(|&v| v != 0) {
        return Err(lines.err(format!("{what} {}: non-zero padding", idx + 1)));
    }
    let mut out = Vec::with_capacity(deg);
    for &v in entries {
        if v == 0 || v > bound {
            return Err(lines.err(format!("{what} {}: index {v} out of range 1..={bound}", idx + 1)));
        }
        out.push((v - 1) as u32);
    }
    let mut sorted = out.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(lines.err(format!("{what} {}: repeated index", idx + 1)));
    }
    Ok(out)
}
