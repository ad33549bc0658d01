use crate::bits::BitVector;
use crate::code::ParityCheckMatrix;
use crate::error::{Error, Result};

/// Parity energy with one full spin product per check:
///
/// `f(s) = sum_i bias_i s_i - (alpha / 2) sum_j prod_{i in check j} s_i`
///
/// with `bias_i = -2 R_i`. Spin `+1` is bit 0 and spin `-1` is bit 1, so a
/// product of `+1` is an even-parity (satisfied) check.
#[derive(Debug, Clone, PartialEq)]
pub struct HigherOrderModel {
    bias: Vec<f64>,
    checks: Vec<Vec<usize>>,
    var_checks: Vec<Vec<usize>>,
    alpha: f64,
}

impl HigherOrderModel {
    pub fn new(bias: Vec<f64>, checks: Vec<Vec<usize>>, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
        }
        let n = bias.len();
        let mut var_checks = vec![Vec::new(); n];
        for (j, check) in checks.iter().enumerate() {
            if check.is_empty() {
                return Err(Error::Integrity(format!("check {j} is empty")));
            }
            for &i in check {
                if i >= n {
                    return Err(Error::Integrity(format!(
                        "check {j} references variable {i} >= {n}"
                    )));
                }
                var_checks[i].push(j);
            }
        }
        Ok(HigherOrderModel {
            bias,
            checks,
            var_checks,
            alpha,
        })
    }

    pub fn n(&self) -> usize {
        self.bias.len()
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    /// Checks touching variable `i`.
    pub fn var_checks(&self, i: usize) -> &[usize] {
        &self.var_checks[i]
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn parity(&self, j: usize, spins: &[i8]) -> i8 {
        self.checks[j].iter().map(|&i| spins[i]).product()
    }

    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        Error::check_len(self.n(), spins.len())?;
        let lin: f64 = self
            .bias
            .iter()
            .zip(spins)
            .map(|(&b, &s)| b * s as f64)
            .sum();
        let parity: f64 = (0..self.checks.len())
            .map(|j| self.parity(j, spins) as f64)
            .sum();
        Ok(lin - 0.5 * self.alpha * parity)
    }

    pub fn energy_bits(&self, bits: &BitVector) -> Result<f64> {
        self.energy(&bits_to_spins(bits))
    }

    /// Energy change from flipping spin `i`:
    /// `-2 bias_i s_i + alpha * sum_{j ∋ i} P_j`.
    pub fn flip_delta(&self, spins: &[i8], i: usize) -> f64 {
        let p: f64 = self.var_checks[i]
            .iter()
            .map(|&j| self.parity(j, spins) as f64)
            .sum();
        -2.0 * self.bias[i] * spins[i] as f64 + self.alpha * p
    }
}

/// Bit 0 maps to spin `+1`, bit 1 to `-1`.
pub fn bits_to_spins(bits: &BitVector) -> Vec<i8> {
    bits.iter().map(|b| if b { -1 } else { 1 }).collect()
}

pub fn spins_to_bits(spins: &[i8]) -> BitVector {
    BitVector::from_bools(spins.iter().map(|&s| s < 0))
}

pub fn build_higher_order(h: &ParityCheckMatrix, r: &[f64], alpha: f64) -> Result<HigherOrderModel> {
    Error::check_len(h.n(), r.len())?;
    let bias = r.iter().map(|&ri| -2.0 * ri).collect();
    let checks = h.rows().filter(|c| !c.is_empty()).map(|c| c.to_vec()).collect();
    HigherOrderModel::new(bias, checks, alpha)
}
