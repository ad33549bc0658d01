//! Message-passing reference decoders: sum-product and Min-Sum variants with
//! flooding or row-layered schedules.

use std::fmt;
use std::str::FromStr;

use crate::bits::BitVector;
use crate::code::ParityCheckMatrix;
use crate::error::{Error, Result};
use crate::DecodeOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpAlgorithm {
    SumProduct,
    MinSum,
    NormalizedMinSum,
    OffsetMinSum,
}

impl BpAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            BpAlgorithm::SumProduct => "sum-product",
            BpAlgorithm::MinSum => "min-sum",
            BpAlgorithm::NormalizedMinSum => "normalized-min-sum",
            BpAlgorithm::OffsetMinSum => "offset-min-sum",
        }
    }
}

impl FromStr for BpAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum-product" | "bp" => Ok(BpAlgorithm::SumProduct),
            "min-sum" => Ok(BpAlgorithm::MinSum),
            "normalized-min-sum" | "nms" => Ok(BpAlgorithm::NormalizedMinSum),
            "offset-min-sum" | "oms" => Ok(BpAlgorithm::OffsetMinSum),
            other => Err(Error::Parameter(format!("unknown BP algorithm '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    Flooding,
    /// Checks are processed one at a time in index order, updating the
    /// posteriors immediately. For lifted protographs the rows of one block
    /// touch disjoint columns, so this is the block-layered schedule.
    Layered,
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Schedule::Flooding => "flooding",
            Schedule::Layered => "layered",
        })
    }
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flooding" => Ok(Schedule::Flooding),
            "layered" => Ok(Schedule::Layered),
            other => Err(Error::Parameter(format!("unknown schedule '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpConfig {
    pub algorithm: BpAlgorithm,
    pub schedule: Schedule,
    pub max_iterations: usize,
    pub normalization_factor: f64,
    pub offset_beta: f64,
    pub llr_clamp: f64,
}

impl Default for BpConfig {
    fn default() -> Self {
        BpConfig {
            algorithm: BpAlgorithm::OffsetMinSum,
            schedule: Schedule::Layered,
            max_iterations: 50,
            normalization_factor: 0.75,
            offset_beta: 0.5,
            llr_clamp: 25.0,
        }
    }
}

impl BpConfig {
    pub fn new(algorithm: BpAlgorithm, schedule: Schedule, max_iterations: usize) -> Self {
        BpConfig {
            algorithm,
            schedule,
            max_iterations,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Parameter("max_iterations must be at least 1".into()));
        }
        if !(self.normalization_factor > 0.0 && self.normalization_factor <= 1.0) {
            return Err(Error::Parameter(format!(
                "normalization factor must lie in (0, 1], got {}",
                self.normalization_factor
            )));
        }
        if !(self.offset_beta >= 0.0) {
            return Err(Error::Parameter(format!(
                "offset must be non-negative, got {}",
                self.offset_beta
            )));
        }
        if !(self.llr_clamp > 0.0) {
            return Err(Error::Parameter(format!(
                "llr clamp must be positive, got {}",
                self.llr_clamp
            )));
        }
        Ok(())
    }

    /// Check-to-variable message from the other incoming messages of the check.
    pub fn check_update(&self, inputs: &[f64]) -> f64 {
        match self.algorithm {
            BpAlgorithm::SumProduct => {
                let prod: f64 = inputs.iter().map(|&m| (0.5 * m).tanh()).product();
                let limit = 1.0 - 1e-15;
                (2.0 * prod.clamp(-limit, limit).atanh()).clamp(-self.llr_clamp, self.llr_clamp)
            }
            _ => {
                let negative = inputs.iter().filter(|&&m| m < 0.0).count() % 2 == 1;
                let min = inputs.iter().fold(f64::INFINITY, |a, &m| a.min(m.abs()));
                let mag = self.shape_magnitude(min);
                if negative {
                    -mag
                } else {
                    mag
                }
            }
        }
    }

    #[inline]
    fn shape_magnitude(&self, min: f64) -> f64 {
        match self.algorithm {
            BpAlgorithm::NormalizedMinSum => self.normalization_factor * min,
            BpAlgorithm::OffsetMinSum => (min - self.offset_beta).max(0.0),
            _ => min,
        }
    }

    /// Variable-to-check message: intrinsic plus the other incoming check
    /// messages, clamped to `llr_clamp`.
    pub fn variable_update(&self, intrinsic: f64, inputs: &[f64]) -> f64 {
        (intrinsic + inputs.iter().sum::<f64>()).clamp(-self.llr_clamp, self.llr_clamp)
    }
}

/// Reusable decoder with per-edge message buffers; one instance per worker.
pub struct BpDecoder<'a> {
    h: &'a ParityCheckMatrix,
    cfg: BpConfig,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    posterior: Vec<f64>,
    scratch: Vec<f64>,
    prefix: Vec<f64>,
}

impl<'a> BpDecoder<'a> {
    pub fn new(h: &'a ParityCheckMatrix, cfg: BpConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(BpDecoder {
            h,
            cfg,
            v2c: vec![0.0; h.nnz()],
            c2v: vec![0.0; h.nnz()],
            posterior: vec![0.0; h.n()],
            scratch: Vec::new(),
            prefix: Vec::new(),
        })
    }

    pub fn config(&self) -> &BpConfig {
        &self.cfg
    }

    /// Posterior LLRs after the last call to [`Self::decode`].
    pub fn posterior(&self) -> &[f64] {
        &self.posterior
    }

    pub fn decode(&mut self, llr: &[f64]) -> Result<DecodeOutcome> {
        Error::check_len(self.h.n(), llr.len())?;
        match self.cfg.schedule {
            Schedule::Flooding => self.decode_flooding(llr),
            Schedule::Layered => self.decode_layered(llr),
        }
    }

    /// Writes extrinsic outputs for one check: `out[e]` is computed from every
    /// input of the check except `inputs[e]`.
    fn check_node(&mut self, inputs_range: std::ops::Range<usize>, layered: bool) {
        let cfg = self.cfg;
        let (src, dst) = if layered {
            (&self.scratch, &mut self.c2v)
        } else {
            (&self.v2c, &mut self.c2v)
        };
        let base = inputs_range.start;
        let ins: &[f64] = if layered { &src[..] } else { &src[inputs_range.clone()] };
        let d = ins.len();
        match cfg.algorithm {
            BpAlgorithm::SumProduct => {
                // forward/backward products avoid dividing by tanh values near 0
                let t: Vec<f64> = ins.iter().map(|&m| (0.5 * m).tanh()).collect();
                self.prefix.clear();
                self.prefix.resize(d + 1, 1.0);
                for i in 0..d {
                    self.prefix[i + 1] = self.prefix[i] * t[i];
                }
                let limit = 1.0 - 1e-15;
                let mut suffix = 1.0;
                for i in (0..d).rev() {
                    let p = (self.prefix[i] * suffix).clamp(-limit, limit);
                    dst[base + i] = (2.0 * p.atanh()).clamp(-cfg.llr_clamp, cfg.llr_clamp);
                    suffix *= t[i];
                }
            }
            _ => {
                let mut min1 = f64::INFINITY;
                let mut min2 = f64::INFINITY;
                let mut arg = 0;
                let mut sign_neg = false;
                for (i, &m) in ins.iter().enumerate() {
                    let a = m.abs();
                    if m < 0.0 {
                        sign_neg = !sign_neg;
                    }
                    if a < min1 {
                        min2 = min1;
                        min1 = a;
                        arg = i;
                    } else if a < min2 {
                        min2 = a;
                    }
                }
                let mag1 = cfg.shape_magnitude(min1);
                let mag2 = cfg.shape_magnitude(min2);
                for (i, &m) in ins.iter().enumerate() {
                    let mag = if i == arg { mag2 } else { mag1 };
                    let neg = sign_neg ^ (m < 0.0);
                    dst[base + i] = if !mag.is_finite() {
                        0.0
                    } else if neg {
                        -mag
                    } else {
                        mag
                    };
                }
            }
        }
    }

    fn hard_decision(&self) -> BitVector {
        BitVector::from_bools(self.posterior.iter().map(|&l| l < 0.0))
    }

    fn finish(&self, iterations: usize) -> Result<DecodeOutcome> {
        let bits = self.hard_decision();
        let success = self.h.is_codeword(&bits)?;
        Ok(DecodeOutcome {
            bits,
            success,
            iterations,
            energy: None,
        })
    }

    fn decode_flooding(&mut self, llr: &[f64]) -> Result<DecodeOutcome> {
        let h = self.h;
        let clamp = self.cfg.llr_clamp;
        for i in 0..h.n() {
            let l = llr[i].clamp(-clamp, clamp);
            for &e in h.col_edges(i) {
                self.v2c[e] = l;
            }
        }
        for iter in 1..=self.cfg.max_iterations {
            for j in 0..h.m() {
                self.check_node(h.row_edge_range(j), false);
            }
            for i in 0..h.n() {
                let edges = h.col_edges(i);
                let total = llr[i] + edges.iter().map(|&e| self.c2v[e]).sum::<f64>();
                self.posterior[i] = total;
                for &e in edges {
                    self.v2c[e] = (total - self.c2v[e]).clamp(-clamp, clamp);
                }
            }
            let out = self.finish(iter)?;
            if out.success || iter == self.cfg.max_iterations {
                return Ok(out);
            }
        }
        unreachable!("max_iterations validated to be at least 1")
    }

    fn decode_layered(&mut self, llr: &[f64]) -> Result<DecodeOutcome> {
        let h = self.h;
        let clamp = self.cfg.llr_clamp;
        self.posterior.copy_from_slice(llr);
        self.c2v.iter_mut().for_each(|m| *m = 0.0);
        for iter in 1..=self.cfg.max_iterations {
            for j in 0..h.m() {
                let range = h.row_edge_range(j);
                self.scratch.clear();
                for e in range.clone() {
                    let v = h.edge_col(e);
                    self.scratch
                        .push((self.posterior[v] - self.c2v[e]).clamp(-clamp, clamp));
                }
                self.check_node(range.clone(), true);
                for (k, e) in range.enumerate() {
                    let v = h.edge_col(e);
                    self.posterior[v] = self.scratch[k] + self.c2v[e];
                }
            }
            let out = self.finish(iter)?;
            if out.success || iter == self.cfg.max_iterations {
                return Ok(out);
            }
        }
        unreachable!("max_iterations validated to be at least 1")
    }
}

/// One-shot convenience wrapper around [`BpDecoder`].
pub fn decode(h: &ParityCheckMatrix, llr: &[f64], cfg: &BpConfig) -> Result<DecodeOutcome> {
    BpDecoder::new(h, *cfg)?.decode(llr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(alg: BpAlgorithm) -> BpConfig {
        BpConfig::new(alg, Schedule::Flooding, 20)
    }

    #[test]
    fn check_update_examples() {
        assert_eq!(cfg(BpAlgorithm::MinSum).check_update(&[2.0, -3.0]), -2.0);
        assert_eq!(cfg(BpAlgorithm::OffsetMinSum).check_update(&[2.0, -3.0]), -1.5);
        assert_eq!(
            cfg(BpAlgorithm::NormalizedMinSum).check_update(&[2.0, -3.0]),
            -1.5
        );
        let sp = cfg(BpAlgorithm::SumProduct);
        for m in [-7.5, -1.0, 0.3, 4.0, 12.0] {
            assert!((sp.check_update(&[m]) - m).abs() < 1e-9, "{m}");
        }
        // saturated inputs stay finite
        assert!(sp.check_update(&[1e6, 1e6]).is_finite());
    }

    #[test]
    fn offset_never_flips_sign() {
        let c = cfg(BpAlgorithm::OffsetMinSum);
        assert_eq!(c.check_update(&[0.2, 3.0]), 0.0);
    }

    #[test]
    fn variable_update_examples() {
        let c = cfg(BpAlgorithm::MinSum);
        assert_eq!(c.variable_update(2.0, &[1.0, -0.5]), 2.5);
        assert_eq!(c.variable_update(2.0, &[]), 2.0);
        let mut c20 = c;
        c20.llr_clamp = 20.0;
        assert_eq!(c20.variable_update(30.0, &[]), 20.0);
        assert_eq!(c20.variable_update(-30.0, &[]), -20.0);
    }

    #[test]
    fn config_validation() {
        let mut c = BpConfig::default();
        c.max_iterations = 0;
        assert!(c.validate().is_err());
        let mut c = BpConfig::default();
        c.normalization_factor = 1.5;
        assert!(c.validate().is_err());
        let mut c = BpConfig::default();
        c.offset_beta = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn internal_check_node_matches_scalar_update() {
        let h = ParityCheckMatrix::from_rows(1, 4, vec![vec![0, 1, 2, 3]]).unwrap();
        let inputs = [1.5, -0.7, 3.2, -2.1];
        for alg in [
            BpAlgorithm::SumProduct,
            BpAlgorithm::MinSum,
            BpAlgorithm::NormalizedMinSum,
            BpAlgorithm::OffsetMinSum,
        ] {
            let c = cfg(alg);
            let mut dec = BpDecoder::new(&h, c).unwrap();
            dec.v2c.copy_from_slice(&inputs);
            dec.check_node(h.row_edge_range(0), false);
            for e in 0..4 {
                let others: Vec<f64> = (0..4).filter(|&k| k != e).map(|k| inputs[k]).collect();
                let want = c.check_update(&others);
                assert!((dec.c2v[e] - want).abs() < 1e-12, "{alg:?} edge {e}");
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        assert!(matches!(
            decode(&h, &[1.0, 1.0], &BpConfig::default()),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn noiseless_converges_first_iteration() {
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        for schedule in [Schedule::Flooding, Schedule::Layered] {
            let c = BpConfig::new(BpAlgorithm::SumProduct, schedule, 10);
            let out = decode(&h, &[-20.0, -20.0, -20.0], &c).unwrap();
            assert!(out.success);
            assert_eq!(out.iterations, 1);
            assert_eq!(out.bits, BitVector::ones(3));
        }
    }

    #[test]
    fn zero_llr_ties_decode_to_zero() {
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        let out = decode(&h, &[0.0, 0.0, 0.0], &BpConfig::default()).unwrap();
        assert!(out.bits.is_zero());
        assert!(out.success);
    }

    #[test]
    fn failure_reports_current_hard_decision() {
        // an offset larger than every message silences the checks entirely
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        let mut c = BpConfig::new(BpAlgorithm::OffsetMinSum, Schedule::Flooding, 3);
        c.offset_beta = 100.0;
        let out = decode(&h, &[-1.0, 2.0, 2.0], &c).unwrap();
        assert!(!out.success);
        assert_eq!(out.iterations, 3);
        assert_eq!(out.bits, BitVector::from_bits(&[1, 0, 0]));
    }
}
