//! Error statistics, expected BER over anneal ensembles and Monte-Carlo sweeps.
//!
//! BER is always counted over the message (systematic) bits of a codeword.

mod plan;
mod sweep;

pub use plan::{parse_decoder_list, CodeSource, DecoderDefaults, DecoderKind, DecoderSpec, SweepPlan, DECODER_NAMES};
pub use sweep::{
    decode_trial, resolve_code, run_sweep, trial_message, trial_observation, CellResult, SweepResult, TrialRecord,
    CSV_COLUMNS,
};

use std::cmp::Ordering;

use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Accumulated bit and frame error counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BerStats {
    pub bits_total: u64,
    pub bit_errors: u64,
    pub frames_total: u64,
    pub frame_errors: u64,
}

impl BerStats {
    /// Adds one frame; returns its number of bit errors.
    pub fn record(&mut self, decoded: &BitVector, truth: &BitVector) -> Result<usize> {
        let d = decoded.hamming_distance(truth)?;
        self.record_errors(truth.len(), d);
        Ok(d)
    }

    pub fn record_errors(&mut self, bits: usize, errors: usize) {
        debug_assert!(errors <= bits);
        self.bits_total += bits as u64;
        self.bit_errors += errors as u64;
        self.frames_total += 1;
        self.frame_errors += u64::from(errors > 0);
    }

    pub fn merge(&mut self, other: &BerStats) {
        self.bits_total += other.bits_total;
        self.bit_errors += other.bit_errors;
        self.frames_total += other.frames_total;
        self.frame_errors += other.frame_errors;
    }

    pub fn ber(&self) -> f64 {
        ratio(self.bit_errors, self.bits_total)
    }

    pub fn fer(&self) -> f64 {
        ratio(self.frame_errors, self.frames_total)
    }

    /// Normal-approximation standard error `sqrt(p (1 - p) / bits)`.
    pub fn stderr_ber(&self) -> f64 {
        if self.bits_total == 0 {
            return 0.0;
        }
        let p = self.ber();
        (p * (1.0 - p) / self.bits_total as f64).sqrt()
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Single-frame increment.
pub fn ber(decoded: &BitVector, truth: &BitVector) -> Result<BerStats> {
    let mut s = BerStats::default();
    s.record(decoded, truth)?;
    Ok(s)
}

/// A distinct solution seen across anneals.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedSolution {
    pub bits: BitVector,
    pub energy: f64,
    pub multiplicity: usize,
    /// Bit errors against the transmitted message.
    pub errors: usize,
}

/// Distinct anneal results ranked by energy, ties by bit pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealEnsemble {
    ranked: Vec<RankedSolution>,
    total: usize,
}

impl AnnealEnsemble {
    /// Groups `(bits, energy)` samples, typically message bits of each anneal.
    pub fn from_samples(samples: &[(BitVector, f64)], truth: &BitVector) -> Result<Self> {
        let mut sols: Vec<RankedSolution> = Vec::new();
        for (bits, energy) in samples {
            let errors = bits.hamming_distance(truth)?;
            match sols.iter_mut().find(|s| &s.bits == bits) {
                Some(s) => {
                    s.multiplicity += 1;
                    s.energy = s.energy.min(*energy);
                }
                None => sols.push(RankedSolution {
                    bits: bits.clone(),
                    energy: *energy,
                    multiplicity: 1,
                    errors,
                }),
            }
        }
        Self::from_solutions(sols)
    }

    pub fn from_solutions(mut sols: Vec<RankedSolution>) -> Result<Self> {
        if sols.is_empty() {
            return Err(Error::Parameter("empty anneal ensemble".into()));
        }
        if sols.iter().any(|s| s.multiplicity == 0 || !s.energy.is_finite()) {
            return Err(Error::Parameter(
                "solutions need a positive multiplicity and finite energy".into(),
            ));
        }
        sols.sort_by(|a, b| match a.energy.total_cmp(&b.energy) {
            Ordering::Equal => a.bits.lex_cmp(&b.bits),
            o => o,
        });
        let total = sols.iter().map(|s| s.multiplicity).sum();
        Ok(AnnealEnsemble { ranked: sols, total })
    }

    pub fn ranked(&self) -> &[RankedSolution] {
        &self.ranked
    }

    /// Number of anneals behind the ensemble.
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn probability(&self, rank: usize) -> f64 {
        self.ranked[rank].multiplicity as f64 / self.total as f64
    }
}

/// Expected BER when keeping the lowest-energy result of `n_a` anneals drawn
/// from the empirical distribution of `ens`; `n` is the number of bits.
///
/// Rank `k` wins iff every draw lands at rank `>= k` and not all land at
/// `> k`, giving `T(k)^n_a - T(k+1)^n_a` with `T` the upper tail.
pub fn expected_ber(ens: &AnnealEnsemble, n_a: u32, n: usize) -> Result<f64> {
    if n_a == 0 {
        return Err(Error::Parameter("N_a must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::Parameter("bit count must be positive".into()));
    }
    let l = ens.ranked.len();
    // tails[k] = sum of P(r) for r >= k
    let mut tails = vec![0.0; l + 1];
    for k in (0..l).rev() {
        tails[k] = tails[k + 1] + ens.probability(k);
    }
    let na = n_a as i32;
    let mut acc = 0.0;
    for k in 0..l {
        let w = tails[k].min(1.0).powi(na) - tails[k + 1].min(1.0).powi(na);
        acc += w * ens.ranked[k].errors as f64 / n as f64;
    }
    Ok(acc)
}

/// Outcome of a paired comparison across trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTest {
    /// Trials where the first decoder made fewer bit errors.
    pub wins: u64,
    pub losses: u64,
    pub ties: u64,
    pub p_value: f64,
}

/// Two-sided exact sign test on paired error counts; ties are dropped.
pub fn sign_test(a: &[usize], b: &[usize]) -> Result<SignTest> {
    Error::check_len(a.len(), b.len())?;
    let (mut wins, mut losses, mut ties) = (0u64, 0u64, 0u64);
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Less => wins += 1,
            Ordering::Greater => losses += 1,
            Ordering::Equal => ties += 1,
        }
    }
    Ok(SignTest {
        wins,
        losses,
        ties,
        p_value: binomial_two_sided(wins, wins + losses),
    })
}

/// `P(|X - n/2| >= |k - n/2|)` for `X ~ Bin(n, 1/2)`.
fn binomial_two_sided(k: u64, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let lo = k.min(n - k);
    let ln_half_n = n as f64 * std::f64::consts::LN_2;
    let ln_choose = |i: u64| {
        libm::lgamma(n as f64 + 1.0) - libm::lgamma(i as f64 + 1.0) - libm::lgamma((n - i) as f64 + 1.0)
    };
    // one tail in log space, then doubled
    let terms: Vec<f64> = (0..=lo).map(|i| ln_choose(i) - ln_half_n).collect();
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tail = max.exp() * terms.iter().map(|t| (t - max).exp()).sum::<f64>();
    (2.0 * tail).min(1.0)
}

/// Formats with six significant digits, switching to exponent form outside
/// `[1e-4, 1e6)`. Trailing zeros are trimmed.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&exp) {
        let s = format!("{:.5e}", x);
        let (mant, e) = s.split_once('e').unwrap();
        let mant = trim_zeros(mant);
        let e: i32 = e.parse().unwrap();
        return format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    // rounding may push 999999.5 up a digit, which is fine for a report
    trim_zeros(&s).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sol(bits: &[u8], energy: f64, m: usize, errors: usize) -> RankedSolution {
        RankedSolution {
            bits: BitVector::from_bits(bits),
            energy,
            multiplicity: m,
            errors,
        }
    }

    #[test]
    fn ber_increments() {
        let t = BitVector::zeros(100);
        assert_eq!(ber(&t, &t).unwrap().bit_errors, 0);
        let mut one = t.clone();
        one.flip(3);
        assert!((ber(&one, &t).unwrap().ber() - 0.01).abs() < 1e-15);
        let all = BitVector::ones(100);
        let s = ber(&all, &t).unwrap();
        assert_eq!(s.ber(), 1.0);
        assert_eq!(s.frame_errors, 1);
        assert!(ber(&BitVector::zeros(3), &t).is_err());
    }

    #[test]
    fn worked_two_solution_example() {
        let ens = AnnealEnsemble::from_solutions(vec![sol(&[0], 1.0, 1, 0), sol(&[1], 2.0, 1, 10)]).unwrap();
        let e = expected_ber(&ens, 2, 100).unwrap();
        assert!((e - 0.025).abs() < 1e-15, "{e}");
    }

    #[test]
    fn single_anneal_is_the_mean() {
        let ens = AnnealEnsemble::from_solutions(vec![
            sol(&[0, 0], -3.0, 3, 0),
            sol(&[0, 1], -1.0, 5, 1),
            sol(&[1, 1], 2.0, 2, 2),
        ])
        .unwrap();
        let mean = (3.0 * 0.0 + 5.0 * 1.0 + 2.0 * 2.0) / 10.0 / 2.0;
        assert!((expected_ber(&ens, 1, 2).unwrap() - mean).abs() < 1e-12);
        // many anneals converge on the best-ranked solution
        assert!(expected_ber(&ens, 200, 2).unwrap() < 1e-12);
    }

    #[test]
    fn ties_rank_lexicographically() {
        let ens = AnnealEnsemble::from_solutions(vec![sol(&[1, 0], 0.0, 1, 1), sol(&[0, 1], 0.0, 1, 2)]).unwrap();
        assert_eq!(ens.ranked()[0].bits, BitVector::from_bits(&[0, 1]));
    }

    #[test]
    fn samples_are_grouped() {
        let truth = BitVector::zeros(3);
        let a = BitVector::from_bits(&[1, 0, 0]);
        let samples = vec![(a.clone(), 1.0), (truth.clone(), 0.5), (a, 1.0)];
        let ens = AnnealEnsemble::from_samples(&samples, &truth).unwrap();
        assert_eq!(ens.ranked().len(), 2);
        assert_eq!(ens.ranked()[1].multiplicity, 2);
        assert_eq!(ens.total(), 3);
    }

    #[test]
    fn sign_test_values() {
        // 10 wins, 0 losses: 2 / 1024
        let t = sign_test(&[0; 10], &[1; 10]).unwrap();
        assert_eq!((t.wins, t.losses), (10, 0));
        assert!((t.p_value - 2.0 / 1024.0).abs() < 1e-12);
        let even = sign_test(&[0, 1], &[1, 0]).unwrap();
        assert_eq!(even.p_value, 1.0);
        assert_eq!(sign_test(&[1], &[1]).unwrap().p_value, 1.0);
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(0.025), "0.025");
        assert_eq!(fmt_g(1.0 / 3.0), "0.333333");
        assert_eq!(fmt_g(123456.7), "123457");
        assert_eq!(fmt_g(2.2e-6), "2.2e-06");
        assert_eq!(fmt_g(1.23456789e-5), "1.23457e-05");
        assert_eq!(fmt_g(3.0), "3");
    }
}
