use std::collections::BTreeMap;

use super::{QuadraticModel, VarTag};
use crate::bits::BitVector;
use crate::error::{Error, Result};

/// `E(s) = -sum_{i<j} J_ij s_i s_j - sum_i h_i s_i + offset` over `s` in `{-1,+1}^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    pub h: Vec<f64>,
    pub j: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
    pub var_map: Vec<VarTag>,
}

impl IsingModel {
    pub fn num_vars(&self) -> usize {
        self.h.len()
    }

    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        Error::check_len(self.num_vars(), spins.len())?;
        let mut e = self.offset;
        for (h, &s) in self.h.iter().zip(spins) {
            e -= h * s as f64;
        }
        for (&(a, b), &j) in &self.j {
            e -= j * (spins[a] * spins[b]) as f64;
        }
        Ok(e)
    }

    /// Per-variable neighbour lists `(other, J)` for local-field updates.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.num_vars()];
        for (&(a, b), &j) in &self.j {
            adj[a].push((b, j));
            adj[b].push((a, j));
        }
        adj
    }
}

/// Substitutes `x_i = (1 + s_i) / 2`, so spin `+1` is bit 1.
///
/// A linear `a x` becomes `a/2 + (a/2) s` and a coupling `q x_i x_j` becomes
/// `q/4 (1 + s_i + s_j + s_i s_j)`.
pub fn to_ising(q: &QuadraticModel) -> IsingModel {
    let mut h: Vec<f64> = q.linear().iter().map(|&a| -a / 2.0).collect();
    let mut offset = q.offset() + q.linear().iter().sum::<f64>() / 2.0;
    let mut j = BTreeMap::new();
    for (&(a, b), &v) in q.quadratic() {
        let quarter = v / 4.0;
        j.insert((a, b), -quarter);
        h[a] -= quarter;
        h[b] -= quarter;
        offset += quarter;
    }
    IsingModel {
        h,
        j,
        offset,
        var_map: q.var_map().to_vec(),
    }
}

/// Spin form of a QUBO assignment under `s = 2x - 1`.
pub fn qubo_spins(x: &BitVector) -> Vec<i8> {
    x.iter().map(|b| if b { 1 } else { -1 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_variable() {
        let q = QuadraticModel::from_parts(vec![3.0], BTreeMap::new(), 0.0, vec![VarTag::CodeBit(0)]).unwrap();
        let is = to_ising(&q);
        assert_eq!(is.energy(&[-1]).unwrap(), 0.0);
        assert_eq!(is.energy(&[1]).unwrap(), 3.0);
    }

    #[test]
    fn all_zero_gives_offset() {
        let mut quad = BTreeMap::new();
        quad.insert((0, 1), -2.0);
        let q = QuadraticModel::from_parts(vec![1.0, 1.0], quad, 0.5, vec![VarTag::CodeBit(0); 2]).unwrap();
        assert_eq!(q.energy(&BitVector::zeros(2)).unwrap(), 0.5);
        let is = to_ising(&q);
        for m in 0..4u8 {
            let x = BitVector::from_bools((0..2).map(|b| (m >> b) & 1 == 1));
            let a = q.energy(&x).unwrap();
            let b = is.energy(&qubo_spins(&x)).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(is.adjacency()[1], vec![(0, 0.5)]);
    }
}
