//! Text formats for codes.
//!
//! * alist (MacKay): `n m`, `max_col_deg max_row_deg`, the column degrees, the
//!   row degrees, then one line of 1-based row indices per column and one line
//!   of 1-based column indices per row. Zero entries are padding.
//! * basegraph-text: `rows cols Zmax` followed by one 0-based
//!   `row col shift` triple per line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::{BaseEntry, BaseGraph, ParityCheckMatrix, RateLabel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeFormat {
    Alist,
    BaseGraphText,
}

impl CodeFormat {
    /// `.alist` selects alist; anything else is read as basegraph-text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("alist") => CodeFormat::Alist,
            _ => CodeFormat::BaseGraphText,
        }
    }
}

impl FromStr for CodeFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alist" => Ok(CodeFormat::Alist),
            "basegraph-text" | "basegraph" | "bg" => Ok(CodeFormat::BaseGraphText),
            other => Err(Error::Parameter(format!("unknown code format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum LoadedCode {
    BaseGraph(BaseGraph),
    Matrix(ParityCheckMatrix),
}

pub fn load_code(path: &Path, format: CodeFormat) -> Result<LoadedCode> {
    let text = fs::read_to_string(path)?;
    match format {
        CodeFormat::Alist => parse_alist(&text).map(LoadedCode::Matrix),
        CodeFormat::BaseGraphText => parse_basegraph(&text).map(LoadedCode::BaseGraph),
    }
}

/// Non-empty lines with their 1-based line numbers; `#` starts a comment.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_numbers(line_no: usize, line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::parse(line_no, format!("expected a non-negative integer, found '{t}'")))
        })
        .collect()
}

struct Lines<'a, I: Iterator<Item = (usize, &'a str)>> {
    inner: I,
    last_line: usize,
}

impl<'a, I: Iterator<Item = (usize, &'a str)>> Lines<'a, I> {
    fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        match self.inner.next() {
            Some((no, line)) => {
                self.last_line = no;
                Ok((no, parse_numbers(no, line)?))
            }
            None => Err(Error::parse(
                self.last_line + 1,
                format!("unexpected end of file, expected {what}"),
            )),
        }
    }

    fn expect_count(&mut self, what: &str, count: usize) -> Result<(usize, Vec<usize>)> {
        let (no, v) = self.next_numbers(what)?;
        if v.len() != count {
            return Err(Error::parse(
                no,
                format!("expected {count} values for {what}, found {}", v.len()),
            ));
        }
        Ok((no, v))
    }
}

pub fn parse_alist(text: &str) -> Result<ParityCheckMatrix> {
    let mut lines = Lines {
        inner: content_lines(text),
        last_line: 0,
    };
    let (_, dims) = lines.expect_count("'n m'", 2)?;
    let (n, m) = (dims[0], dims[1]);
    let (max_no, maxes) = lines.expect_count("'max_col_deg max_row_deg'", 2)?;
    let (_, col_deg) = lines.expect_count("column degrees", n)?;
    let (_, row_deg) = lines.expect_count("row degrees", m)?;

    let mut read_lists = |count: usize, bound: usize, declared: &[usize], what: &str| {
        let mut lists = Vec::with_capacity(count);
        for (idx, &deg) in declared.iter().enumerate() {
            let (no, raw) = lines.next_numbers(what)?;
            let mut list = Vec::with_capacity(deg);
            for v in raw.into_iter().filter(|&v| v != 0) {
                if v > bound {
                    return Err(Error::parse(no, format!("index {v} exceeds {bound}")));
                }
                list.push(v - 1);
            }
            if list.len() != deg {
                return Err(Error::Integrity(format!(
                    "{what} {idx} (line {no}) declares degree {deg} but lists {}",
                    list.len()
                )));
            }
            lists.push(list);
        }
        Ok::<_, Error>(lists)
    };
    let cols = read_lists(n, m, &col_deg, "column")?;
    let rows = read_lists(m, n, &row_deg, "row")?;

    let nnz_cols: usize = col_deg.iter().sum();
    let nnz_rows: usize = row_deg.iter().sum();
    if nnz_cols != nnz_rows {
        return Err(Error::Integrity(format!(
            "column degrees sum to {nnz_cols} but row degrees sum to {nnz_rows}"
        )));
    }
    let max_col = col_deg.iter().copied().max().unwrap_or(0);
    let max_row = row_deg.iter().copied().max().unwrap_or(0);
    if maxes[0] < max_col || maxes[1] < max_row {
        return Err(Error::parse(
            max_no,
            format!("declared maxima {maxes:?} below actual ({max_col}, {max_row})"),
        ));
    }

    let h = ParityCheckMatrix::from_rows(m, n, rows)?;
    let by_cols = ParityCheckMatrix::from_columns(m, n, &cols)?;
    if h != by_cols {
        return Err(Error::Integrity(
            "column lists and row lists describe different matrices".into(),
        ));
    }
    Ok(h)
}

pub fn write_alist(h: &ParityCheckMatrix) -> String {
    let mut out = String::new();
    let join = |it: &mut dyn Iterator<Item = usize>| {
        it.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(out, "{} {}", h.n(), h.m());
    let _ = writeln!(out, "{} {}", h.max_col_degree(), h.max_row_degree());
    let _ = writeln!(out, "{}", join(&mut (0..h.n()).map(|i| h.col_degree(i))));
    let _ = writeln!(out, "{}", join(&mut (0..h.m()).map(|j| h.row_degree(j))));
    // lists are zero-padded to the maximum degree (at least one entry) so an
    // empty row or column still occupies its line
    let col_width = h.max_col_degree().max(1);
    for i in 0..h.n() {
        let ids = h.col(i).iter().map(|&j| j + 1);
        let _ = writeln!(out, "{}", join(&mut ids.chain(std::iter::repeat(0)).take(col_width)));
    }
    let row_width = h.max_row_degree().max(1);
    for j in 0..h.m() {
        let ids = h.row(j).iter().map(|&i| i + 1);
        let _ = writeln!(out, "{}", join(&mut ids.chain(std::iter::repeat(0)).take(row_width)));
    }
    out
}

pub fn parse_basegraph(text: &str) -> Result<BaseGraph> {
    let mut lines = Lines {
        inner: content_lines(text),
        last_line: 0,
    };
    let (head_no, head) = lines.expect_count("'rows cols Zmax'", 3)?;
    let (rows, cols, z_max) = (head[0], head[1], head[2]);
    if rows >= cols {
        return Err(Error::parse(
            head_no,
            format!("rows ({rows}) must be fewer than cols ({cols})"),
        ));
    }
    let mut entries = Vec::new();
    for (no, line) in lines.inner {
        let v = parse_numbers(no, line)?;
        if v.len() != 3 {
            return Err(Error::parse(
                no,
                format!("expected 'row col shift', found {} values", v.len()),
            ));
        }
        if v[0] >= rows || v[1] >= cols {
            return Err(Error::parse(
                no,
                format!("entry ({}, {}) outside {rows} x {cols}", v[0], v[1]),
            ));
        }
        entries.push(BaseEntry {
            row: v[0],
            col: v[1],
            shift: v[2],
        });
    }
    BaseGraph::new(rows, cols, z_max, entries, RateLabel::new(cols - rows, cols))
}

pub fn write_basegraph(bg: &BaseGraph) -> String {
    let mut out = format!("{} {} {}\n", bg.rows(), bg.cols(), bg.z_max());
    for e in bg.entries() {
        let _ = writeln!(out, "{} {} {}", e.row, e.col, e.shift);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::bundled_bg1;

    #[test]
    fn alist_round_trip() {
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        let text = write_alist(&h);
        assert_eq!(text, "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n");
        assert_eq!(parse_alist(&text).unwrap(), h);
    }

    #[test]
    fn alist_accepts_zero_padding() {
        let text = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n";
        let h = parse_alist(text).unwrap();
        assert_eq!(h.row(1), &[1, 2]);
    }

    #[test]
    fn alist_nnz_mismatch_is_integrity_error() {
        // column degrees sum to 5, row degrees to 4
        let text = "3 2\n2 2\n2 2 1\n2 2\n1 2\n1 2\n2\n1 2\n2 3\n";
        assert!(matches!(parse_alist(text), Err(Error::Integrity(_))));
        // lists disagree with each other
        let text = "3 2\n2 2\n1 2 1\n2 2\n2\n1 2\n2\n1 2\n2 3\n";
        assert!(matches!(parse_alist(text), Err(Error::Integrity(_))));
    }

    #[test]
    fn alist_parse_errors_carry_line_numbers() {
        let err = parse_alist("3 2\n2 2\n1 x 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_alist("3 2\n2 2\n1 2 1\n2 2\n1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 6, .. }), "{err}");
    }

    #[test]
    fn basegraph_round_trip_bundled() {
        let bg = bundled_bg1();
        let text = write_basegraph(&bg);
        let back = parse_basegraph(&text).unwrap();
        assert_eq!(back.entries().len(), 316);
        assert_eq!(back.entries(), bg.entries());
        assert_eq!(back.rate_label().to_string(), "11/34");
    }

    #[test]
    fn basegraph_errors() {
        assert!(matches!(
            parse_basegraph("2 4 8\n0 0 1\n0 1\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_basegraph("2 4 8\n5 0 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_basegraph("2 4 8\n0 0 1\n0 0 2\n"),
            Err(Error::Integrity(_))
        ));
        assert!(matches!(parse_basegraph(""), Err(Error::Parse { line: 1, .. })));
    }
}
