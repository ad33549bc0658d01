use super::ParityCheckMatrix;
use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Systematic encoder derived from a parity-check matrix by Gauss-Jordan
/// elimination over GF(2).
///
/// Pivots are searched from the last column backwards, so for codes whose
/// trailing columns form an invertible parity block (the 5G protographs) the
/// message occupies exactly the leading columns. Codewords are always kept in
/// the original column order; `message_positions` records where the message
/// bits sit.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    n: usize,
    m: usize,
    message_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    /// One row per pivot: coefficients over the message bits.
    parity_rows: Vec<BitVector>,
}

impl GeneratorMatrix {
    pub fn from_parity_check(h: &ParityCheckMatrix) -> Self {
        let n = h.n();
        let words = n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = h
            .rows()
            .map(|r| {
                let mut w = vec![0u64; words];
                for &c in r {
                    w[c / 64] |= 1 << (c % 64);
                }
                w
            })
            .collect();

        let mut pivot_cols = Vec::new();
        let mut rank = 0;
        for col in (0..n).rev() {
            if rank == rows.len() {
                break;
            }
            let (wi, bit) = (col / 64, 1u64 << (col % 64));
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][wi] & bit != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = std::mem::take(&mut rows[rank]);
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[wi] & bit != 0 {
                    for (a, b) in row.iter_mut().zip(&pivot) {
                        *a ^= b;
                    }
                }
            }
            rows[rank] = pivot;
            pivot_cols.push(col);
            rank += 1;
        }
        rows.truncate(rank);

        let mut is_pivot = vec![false; n];
        for &c in &pivot_cols {
            is_pivot[c] = true;
        }
        let message_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let parity_rows = rows
            .iter()
            .map(|row| {
                BitVector::from_bools(
                    message_positions
                        .iter()
                        .map(|&c| (row[c / 64] >> (c % 64)) & 1 == 1),
                )
            })
            .collect();

        GeneratorMatrix {
            n,
            m: h.m(),
            message_positions,
            parity_positions: pivot_cols,
            parity_rows,
        }
    }

    /// Message length (dimension of the code).
    pub fn k(&self) -> usize {
        self.message_positions.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// GF(2) rank of the parity-check matrix.
    pub fn rank(&self) -> usize {
        self.parity_positions.len()
    }

    /// Number of redundant checks (`m - rank`); zero for full-rank codes.
    pub fn rank_deficiency(&self) -> usize {
        self.m - self.rank()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    pub fn message_positions(&self) -> &[usize] {
        &self.message_positions
    }

    pub fn parity_positions(&self) -> &[usize] {
        &self.parity_positions
    }

    pub fn encode(&self, message: &BitVector) -> Result<BitVector> {
        Error::check_len(self.k(), message.len())?;
        let mut c = BitVector::zeros(self.n);
        for (t, &pos) in self.message_positions.iter().enumerate() {
            if message.get(t) {
                c.set(pos, true);
            }
        }
        for (row, &pos) in self.parity_rows.iter().zip(&self.parity_positions) {
            if row.dot(message)? {
                c.set(pos, true);
            }
        }
        Ok(c)
    }

    /// Extracts the message bits from a codeword-ordered vector.
    pub fn extract_message(&self, codeword: &BitVector) -> Result<BitVector> {
        Error::check_len(self.n, codeword.len())?;
        Ok(codeword.select(&self.message_positions))
    }

    /// Row `t` of the `k x n` generator matrix.
    pub fn row(&self, t: usize) -> BitVector {
        let mut g = BitVector::zeros(self.n);
        g.set(self.message_positions[t], true);
        for (row, &pos) in self.parity_rows.iter().zip(&self.parity_positions) {
            if row.get(t) {
                g.set(pos, true);
            }
        }
        g
    }
}

/// Free-function form of [`GeneratorMatrix::from_parity_check`].
pub fn build_generator(h: &ParityCheckMatrix) -> GeneratorMatrix {
    GeneratorMatrix::from_parity_check(h)
}
