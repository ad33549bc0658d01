use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Sparse binary parity-check matrix with both row and column adjacency
/// (the two sides of the Tanner graph).
///
/// Edges are numbered in row-major order; `col_edges` maps each column entry to
/// that edge number so message-passing decoders can keep one value per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    m: usize,
    n: usize,
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_edges: Vec<usize>,
}

impl ParityCheckMatrix {
    /// Builds the matrix from per-row column lists. Lists are sorted here;
    /// duplicates and out-of-range indices are rejected.
    pub fn from_rows(m: usize, n: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        Error::check_len(m, rows.len())?;
        let mut row_ptr = Vec::with_capacity(m + 1);
        let mut row_cols = Vec::new();
        row_ptr.push(0);
        for (j, mut cols) in rows.into_iter().enumerate() {
            cols.sort_unstable();
            if cols.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Integrity(format!("row {j} lists a column twice")));
            }
            if let Some(&c) = cols.last() {
                if c >= n {
                    return Err(Error::Integrity(format!(
                        "row {j} references column {c} >= n = {n}"
                    )));
                }
            }
            row_cols.extend(cols);
            row_ptr.push(row_cols.len());
        }
        Ok(Self::from_csr(m, n, row_ptr, row_cols))
    }

    fn from_csr(m: usize, n: usize, row_ptr: Vec<usize>, row_cols: Vec<usize>) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &c in &row_cols {
            counts[c + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let col_ptr = counts.clone();
        let mut fill = counts;
        let mut col_rows = vec![0; row_cols.len()];
        let mut col_edges = vec![0; row_cols.len()];
        for j in 0..m {
            for e in row_ptr[j]..row_ptr[j + 1] {
                let c = row_cols[e];
                col_rows[fill[c]] = j;
                col_edges[fill[c]] = e;
                fill[c] += 1;
            }
        }
        ParityCheckMatrix {
            m,
            n,
            row_ptr,
            row_cols,
            col_ptr,
            col_rows,
            col_edges,
        }
    }

    /// Builds the matrix from per-column row lists (the transpose view).
    pub fn from_columns(m: usize, n: usize, cols: &[Vec<usize>]) -> Result<Self> {
        Error::check_len(n, cols.len())?;
        let mut rows = vec![Vec::new(); m];
        for (i, col) in cols.iter().enumerate() {
            for &j in col {
                if j >= m {
                    return Err(Error::Integrity(format!(
                        "column {i} references row {j} >= m = {m}"
                    )));
                }
                rows[j].push(i);
            }
        }
        Self::from_rows(m, n, rows)
    }

    /// Number of parity checks (rows).
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Code length (columns).
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.row_cols.len()
    }

    /// Columns of check `j`, ascending.
    #[inline]
    pub fn row(&self, j: usize) -> &[usize] {
        &self.row_cols[self.row_ptr[j]..self.row_ptr[j + 1]]
    }

    /// Checks touching variable `i`, ascending.
    #[inline]
    pub fn col(&self, i: usize) -> &[usize] {
        &self.col_rows[self.col_ptr[i]..self.col_ptr[i + 1]]
    }

    /// Edge numbers of variable `i`, in the same order as [`Self::col`].
    #[inline]
    pub fn col_edges(&self, i: usize) -> &[usize] {
        &self.col_edges[self.col_ptr[i]..self.col_ptr[i + 1]]
    }

    /// Edge-number range of check `j`.
    #[inline]
    pub fn row_edge_range(&self, j: usize) -> std::ops::Range<usize> {
        self.row_ptr[j]..self.row_ptr[j + 1]
    }

    /// Column index of edge `e`.
    #[inline]
    pub fn edge_col(&self, e: usize) -> usize {
        self.row_cols[e]
    }

    #[inline]
    pub fn row_degree(&self, j: usize) -> usize {
        self.row_ptr[j + 1] - self.row_ptr[j]
    }

    #[inline]
    pub fn col_degree(&self, i: usize) -> usize {
        self.col_ptr[i + 1] - self.col_ptr[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> + '_ {
        (0..self.m).map(move |j| self.row(j))
    }

    /// Column `i` as a length-`m` vector.
    pub fn column_vector(&self, i: usize) -> BitVector {
        let mut v = BitVector::zeros(self.m);
        for &j in self.col(i) {
            v.set(j, true);
        }
        v
    }

    /// Reconstructs the column adjacency from the row adjacency alone; equal to
    /// `self` whenever the internal transposes are consistent.
    pub fn rebuild_from_rows(&self) -> Self {
        Self::from_csr(self.m, self.n, self.row_ptr.clone(), self.row_cols.clone())
    }

    /// The syndrome `H c` over GF(2): bit `j` is the XOR of `c` over row `j`.
    pub fn syndrome(&self, c: &BitVector) -> Result<BitVector> {
        Error::check_len(self.n, c.len())?;
        Ok(BitVector::from_bools(
            self.rows().map(|r| r.iter().filter(|&&i| c.get(i)).count() % 2 == 1),
        ))
    }

    /// `true` iff `c` satisfies every check.
    pub fn is_codeword(&self, c: &BitVector) -> Result<bool> {
        Error::check_len(self.n, c.len())?;
        Ok(self
            .rows()
            .all(|r| r.iter().filter(|&&i| c.get(i)).count() % 2 == 0))
    }

    /// Number of unsatisfied checks for `c`.
    pub fn unsatisfied(&self, c: &BitVector) -> Result<usize> {
        Ok(self.syndrome(c)?.count_ones())
    }

    pub fn max_row_degree(&self) -> usize {
        (0..self.m).map(|j| self.row_degree(j)).max().unwrap_or(0)
    }

    pub fn max_col_degree(&self) -> usize {
        (0..self.n).map(|i| self.col_degree(i)).max().unwrap_or(0)
    }

    /// Dense row-major 0/1 representation; intended for small matrices.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut out = vec![vec![0u8; self.n]; self.m];
        for (j, row) in self.rows().enumerate() {
            for &i in row {
                out[j][i] = 1;
            }
        }
        out
    }

    pub fn from_dense(dense: &[Vec<u8>]) -> Result<Self> {
        let m = dense.len();
        let n = dense.first().map_or(0, Vec::len);
        let mut rows = Vec::with_capacity(m);
        for r in dense {
            Error::check_len(n, r.len())?;
            rows.push(
                r.iter()
                    .enumerate()
                    .filter(|(_, &b)| b != 0)
                    .map(|(i, _)| i)
                    .collect(),
            );
        }
        Self::from_rows(m, n, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ParityCheckMatrix {
        ParityCheckMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap()
    }

    #[test]
    fn adjacency_is_transposed() {
        let h = small();
        assert_eq!(h.row(0), &[0, 1]);
        assert_eq!(h.col(1), &[0, 1]);
        assert_eq!(h.nnz(), 4);
        for i in 0..h.n() {
            for (&j, &e) in h.col(i).iter().zip(h.col_edges(i)) {
                assert_eq!(h.edge_col(e), i);
                assert!(h.row_edge_range(j).contains(&e));
            }
        }
        assert_eq!(h.rebuild_from_rows(), h);
    }

    #[test]
    fn syndrome_cases() {
        let h = small();
        assert!(h.syndrome(&BitVector::zeros(3)).unwrap().is_zero());
        assert!(h.syndrome(&BitVector::ones(3)).unwrap().is_zero());
        let s = h.syndrome(&BitVector::from_bits(&[0, 1, 0])).unwrap();
        assert_eq!(s, h.column_vector(1));
        assert!(matches!(
            h.syndrome(&BitVector::zeros(4)),
            Err(Error::Dimension { expected: 3, actual: 4 })
        ));
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(ParityCheckMatrix::from_rows(1, 3, vec![vec![0, 0]]).is_err());
        assert!(ParityCheckMatrix::from_rows(1, 3, vec![vec![3]]).is_err());
        assert!(ParityCheckMatrix::from_rows(2, 3, vec![vec![0]]).is_err());
    }

    #[test]
    fn empty_matrix() {
        let h = ParityCheckMatrix::from_rows(0, 5, vec![]).unwrap();
        assert_eq!(h.nnz(), 0);
        assert!(h.is_codeword(&BitVector::ones(5)).unwrap());
    }
}
