use std::collections::HashSet;
use std::fmt;

use rand::seq::index;
use rand::Rng;

use super::ParityCheckMatrix;
use crate::error::{Error, Result};
use crate::rng;

/// Nonzero protograph entry: check row, variable column and circulant shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaseEntry {
    pub row: usize,
    pub col: usize,
    pub shift: usize,
}

/// Nominal code rate of a base graph, as a reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateLabel {
    pub num: usize,
    pub den: usize,
}

impl RateLabel {
    pub fn new(num: usize, den: usize) -> Self {
        fn gcd(a: usize, b: usize) -> usize {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        let g = gcd(num, den).max(1);
        RateLabel {
            num: num / g,
            den: den / g,
        }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for RateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Quasi-cyclic protograph: every entry lifts to a `Z x Z` circulant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseGraph {
    rows: usize,
    cols: usize,
    z_max: usize,
    entries: Vec<BaseEntry>,
    rate_label: RateLabel,
}

impl BaseGraph {
    pub fn new(
        rows: usize,
        cols: usize,
        z_max: usize,
        mut entries: Vec<BaseEntry>,
        rate_label: RateLabel,
    ) -> Result<Self> {
        if rows >= cols {
            return Err(Error::Integrity(format!(
                "base graph must have fewer rows than columns ({rows} x {cols})"
            )));
        }
        let mut seen = HashSet::with_capacity(entries.len());
        for e in &entries {
            if e.row >= rows || e.col >= cols {
                return Err(Error::Integrity(format!(
                    "entry ({}, {}) outside {rows} x {cols}",
                    e.row, e.col
                )));
            }
            if z_max > 0 && e.shift >= z_max {
                return Err(Error::Integrity(format!(
                    "shift {} at ({}, {}) not below Zmax = {z_max}",
                    e.shift, e.row, e.col
                )));
            }
            if !seen.insert((e.row, e.col)) {
                return Err(Error::Integrity(format!(
                    "duplicate entry ({}, {})",
                    e.row, e.col
                )));
            }
        }
        entries.sort_by_key(|e| (e.row, e.col));
        Ok(BaseGraph {
            rows,
            cols,
            z_max,
            entries,
            rate_label,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn z_max(&self) -> usize {
        self.z_max
    }

    pub fn entries(&self) -> &[BaseEntry] {
        &self.entries
    }

    pub fn rate_label(&self) -> RateLabel {
        self.rate_label
    }

    pub fn row_degree(&self, r: usize) -> usize {
        self.entries.iter().filter(|e| e.row == r).count()
    }

    /// Lifts the protograph: entry `(r, c, s)` becomes the ones at
    /// `(r*Z + i, c*Z + (i + s) mod Z)` for `i` in `0..Z`.
    pub fn expand(&self, z: usize) -> Result<ParityCheckMatrix> {
        if z == 0 {
            return Err(Error::InvalidExpansionFactor(z));
        }
        let mut rows = vec![Vec::new(); self.rows * z];
        for e in &self.entries {
            let s = e.shift % z;
            for i in 0..z {
                rows[e.row * z + i].push(e.col * z + (i + s) % z);
            }
        }
        ParityCheckMatrix::from_rows(self.rows * z, self.cols * z, rows)
    }
}

/// Free-function form of [`BaseGraph::expand`].
pub fn expand_base_graph(bg: &BaseGraph, z: usize) -> Result<ParityCheckMatrix> {
    bg.expand(z)
}

/// Row degrees of the bundled 46 x 68 protograph (316 entries in total).
const BG1_ROW_DEGREES: [usize; 46] = [
    19, 19, 19, 19, 3, 8, 9, 7, 10, 9, 7, 8, 7, 6, 7, 7, 6, 6, 6, 6, 6, 6, 5, 5, 6, 5, 5, 4, 5, 5,
    5, 5, 5, 5, 5, 5, 5, 4, 5, 5, 4, 5, 4, 5, 5, 4,
];

const BG1_ROWS: usize = 46;
const BG1_COLS: usize = 68;
const BG1_INFO_COLS: usize = 22;
const BG1_CORE_ROWS: usize = 4;
const BG1_Z_MAX: usize = 384;
const BG1_SEED: u64 = 0x5A_4E52_4247_3100;

/// Parity part of the 4 x 4 core: a double diagonal plus the weight-3 first
/// column, as `(row, col, shift)`. The block is invertible over the circulant
/// ring for every `Z`, so the lifted matrix always has full row rank.
const BG1_CORE_PARITY: [(usize, usize, usize); 9] = [
    (0, 22, 1),
    (0, 23, 0),
    (1, 23, 0),
    (1, 24, 0),
    (2, 22, 0),
    (2, 24, 0),
    (2, 25, 0),
    (3, 22, 1),
    (3, 25, 0),
];

/// A protograph with the shape of 5G-NR base graph 1: 46 x 68, 22 systematic
/// columns, a double-diagonal 4 x 4 parity core and a 42-row diagonal
/// extension block, with the standard row degrees (316 nonzeros).
///
/// Column positions outside the fixed parity structure and all shift values
/// are drawn from a fixed-seed generator, so the graph is identical on every
/// run. Official shift tables can be supplied as basegraph-text files instead.
pub fn bundled_bg1() -> BaseGraph {
    let mut rng = rng::stream(BG1_SEED, &[]);
    let mut entries = Vec::with_capacity(316);
    for &(row, col, shift) in &BG1_CORE_PARITY {
        entries.push(BaseEntry { row, col, shift });
    }
    for (row, &degree) in BG1_ROW_DEGREES.iter().enumerate() {
        let (pool, fixed): (usize, usize) = if row < BG1_CORE_ROWS {
            let parity = BG1_CORE_PARITY.iter().filter(|p| p.0 == row).count();
            (BG1_INFO_COLS, parity)
        } else {
            // Own diagonal column in the extension block.
            entries.push(BaseEntry {
                row,
                col: BG1_INFO_COLS + row,
                shift: 0,
            });
            (BG1_INFO_COLS + BG1_CORE_ROWS, 1)
        };
        let mut picks = index::sample(&mut rng, pool, degree - fixed).into_vec();
        picks.sort_unstable();
        for col in picks {
            entries.push(BaseEntry {
                row,
                col,
                shift: rng.random_range(0..BG1_Z_MAX),
            });
        }
    }
    BaseGraph::new(
        BG1_ROWS,
        BG1_COLS,
        BG1_Z_MAX,
        entries,
        RateLabel::new(1, 3),
    )
    .expect("bundled protograph is well formed")
}
